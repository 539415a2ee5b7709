mod common;

use std::sync::Arc;

use common::*;
use sitecalc::comonad::{
    apply_s, check_comonad_laws, counit_square_commutes, enumerate_cofree, enumerate_filters, lext_filter,
    lext_filter_by_restriction, CofreeCategory, CofreeConfig, DeltaVariant,
};

/// Cofree sites of the pool categories that fit the default filter bound.
fn cofree_pool() -> Vec<Option<Arc<CofreeCategory>>> {
    pool().categories.iter().map(|c| enumerate_cofree(c).ok()).collect()
}

#[test]
fn image_filters_agree_with_preimage_formula() {
    let mut checked = 0;
    for (i, _, f) in &pool().functors {
        let dom = &pool().categories[*i];
        for c in dom.objects() {
            let Ok(filters) = enumerate_filters(dom, c, CofreeConfig::default()) else {
                continue;
            };
            for filter in &filters {
                assert_eq!(lext_filter(f, filter), lext_filter_by_restriction(f, filter).unwrap());
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn image_functor_commutes_with_projections_and_is_functorial() {
    let cofree = cofree_pool();
    let mut checked = 0;
    for (i, j, f) in &pool().functors {
        let (Some(src), Some(tgt)) = (&cofree[*i], &cofree[*j]) else {
            continue;
        };
        assert!(counit_square_commutes(f, src, tgt).unwrap());
        let sf = apply_s(f, src, tgt).unwrap();
        let (sc, tc) = (&src.category, &tgt.category);
        for x in sc.objects() {
            assert_eq!(sf.arrow(sc.identity(x)), tc.identity(sf.object(x)));
        }
        for a in sc.arrows() {
            for &b in sc.arrows_out_of(sc.target(a)) {
                assert_eq!(sf.arrow(sc.comp(b, a)), tc.comp(sf.arrow(b), sf.arrow(a)));
            }
        }
        checked += 1;
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn comonad_laws_on_every_enumerable_cofree_site() {
    let mut checked = 0;
    for m in cofree_pool().into_iter().flatten() {
        let report = check_comonad_laws(&m, None, DeltaVariant::Standard).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.objects_checked, m.category.n_objects());
        checked += 1;
    }
    assert!(checked > 5, "{checked}");
}
