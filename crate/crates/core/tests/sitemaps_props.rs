mod common;

use common::*;
use proptest::prelude::*;
use proptest::sample::Index;
use sitecalc::site::saturate;
use sitecalc::sitemaps::{
    cover_lifting_on, cover_preserving_on, covering_flat_on, is_cover_lifting, is_cover_preserving, FlatMode,
    SiteFunctor,
};

#[test]
fn saturating_either_side_changes_nothing() {
    let p = pool();
    let covs: Vec<Vec<_>> = p
        .categories
        .iter()
        .map(|c| if c.n_objects() <= 2 { generating_coverages(c) } else { Vec::new() })
        .collect();
    let mut checked = 0;
    for (i, j, f) in &p.functors {
        for gen in &covs[*i] {
            let sat = saturate(gen).unwrap();
            for site in &p.sites[*j] {
                let k = site.topology();
                assert_eq!(
                    cover_preserving_on(f, gen, k).unwrap().passed(),
                    cover_preserving_on(f, sat.topology(), k).unwrap().passed()
                );
                assert_eq!(
                    cover_lifting_on(f, gen, k).unwrap().passed(),
                    cover_lifting_on(f, sat.topology(), k).unwrap().passed()
                );
                checked += 1;
            }
        }
        for gen in &covs[*j] {
            let sat = saturate(gen).unwrap();
            assert_eq!(
                covering_flat_on(f, gen, FlatMode::Shapes).unwrap().passed(),
                covering_flat_on(f, sat.topology(), FlatMode::Shapes).unwrap().passed()
            );
            for site in &p.sites[*i] {
                let j = site.topology();
                assert_eq!(
                    cover_preserving_on(f, j, gen).unwrap().passed(),
                    cover_preserving_on(f, j, sat.topology()).unwrap().passed()
                );
                assert_eq!(
                    cover_lifting_on(f, j, gen).unwrap().passed(),
                    cover_lifting_on(f, j, sat.topology()).unwrap().passed()
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn composites_stay_in_class(
        k in functor_index(),
        g in any::<Index>(),
        a in any::<Index>(),
        b in any::<Index>(),
        c in any::<Index>(),
    ) {
        let (i, j, f) = functor(k);
        let g = *g.get(&functors_from(j));
        let l = pool().categories.iter().position(|x| std::sync::Arc::ptr_eq(x, g.codomain())).unwrap();
        let (sa, sb, sc) = (site_on(i, a), site_on(j, b), site_on(l, c));
        let first = SiteFunctor::new(f.clone(), sa.clone(), sb.clone()).unwrap();
        let second = SiteFunctor::new(g.clone(), sb.clone(), sc.clone()).unwrap();
        let both = first.then(&second).unwrap();
        if first.cover_preserving() && second.cover_preserving() {
            prop_assert!(both.cover_preserving());
        }
        if first.cover_lifting() && second.cover_lifting() {
            prop_assert!(both.cover_lifting());
        }
        if first.is_morphism() && second.is_morphism() {
            prop_assert!(both.is_morphism());
        }
        prop_assert_eq!(both.cover_preserving(), is_cover_preserving(&both.functor, sa, sc).unwrap().passed());
        prop_assert_eq!(both.cover_lifting(), is_cover_lifting(&both.functor, sa, sc).unwrap().passed());
    }
}

#[test]
fn identities_are_morphisms_and_comorphisms() {
    for sites in &pool().sites {
        for site in sites {
            let id = SiteFunctor::identity(site);
            assert!(id.is_morphism() && id.is_comorphism());
        }
    }
}

#[test]
fn reduced_shapes_agree_with_exhaustive_diagrams() {
    let p = pool();
    let mut disagreements = Vec::new();
    let mut checked = 0;
    for (i, j, f) in &p.functors {
        if p.categories[*i].n_objects() > 2 || p.categories[*j].n_objects() > 2 {
            continue;
        }
        for site in &p.sites[*j] {
            let reduced = covering_flat_on(f, site.topology(), FlatMode::Shapes).unwrap().passed();
            let exhaustive = covering_flat_on(f, site.topology(), FlatMode::Exhaustive(3)).unwrap().passed();
            if reduced != exhaustive {
                disagreements.push((f.clone(), site.clone()));
            }
            checked += 1;
        }
    }
    assert!(disagreements.is_empty(), "{} of {checked} disagree", disagreements.len());
}
