mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use proptest::sample::Index;
use sitecalc::fincat::FinCategory;
use sitecalc::presheaf::{lextend, Presheaf};
use sitecalc::site::{
    all_sieves, check_axiom, image_sieve, preimage_sieve, pullback_sieve, saturate, Axiom, Coverage, Sieve, Site,
};

fn contained(small: &Coverage, large: &Coverage) -> bool {
    small.category().objects().all(|c| small.covers(c).is_subset(large.covers(c)))
}

fn same_covers(a: &Coverage, b: &Coverage) -> bool {
    contained(a, b) && contained(b, a)
}

fn union(a: &Coverage, b: &Coverage) -> Coverage {
    let gens = a
        .category()
        .objects()
        .map(|c| a.generators(c).union(b.generators(c)).cloned().collect())
        .collect();
    Coverage::from_sieves(a.category().clone(), gens)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn image_is_left_adjoint_to_preimage(k in functor_index(), s in any::<Index>(), r in any::<Index>(), c in any::<Index>()) {
        let (_, _, f) = functor(k);
        let (dom, cod) = (f.domain(), f.codomain());
        let c = c.index(dom.n_objects());
        let s = s.get(&all_sieves(dom, c)).clone();
        let r = r.get(&all_sieves(cod, f.object(c))).clone();
        prop_assert_eq!(
            image_sieve(f, &s).is_subset(&r),
            s.is_subset(&preimage_sieve(f, &r, c).unwrap())
        );
    }

    #[test]
    fn image_consists_of_factored_arrows(k in functor_index(), s in any::<Index>(), c in any::<Index>()) {
        let (_, _, f) = functor(k);
        let (dom, cod) = (f.domain(), f.codomain());
        let c = c.index(dom.n_objects());
        let s = s.get(&all_sieves(dom, c)).clone();
        // arrows of the form f(u)∘w with u in the sieve
        let mut expected = BTreeSet::new();
        for u in s.arrows() {
            for &w in cod.arrows_into(f.object(dom.source(u))) {
                expected.insert(cod.comp(f.arrow(u), w));
            }
        }
        let got: BTreeSet<_> = image_sieve(f, &s).arrows().collect();
        prop_assert_eq!(got, expected);
    }
}

/// Pushing each class `[(v, s)]` of `lext_f S` into `y_{f c}` as `f(s)∘v`
/// gives the image of `lext_f S -> lext_f y_c ≅ y_{f c}`; that image is the
/// image sieve. The map need not be injective.
#[test]
fn image_sieve_is_the_image_of_lext() {
    let mut collapsed = 0;
    for (_, _, f) in &pool().functors {
        let (dom, cod) = (f.domain(), f.codomain());
        for c in dom.objects() {
            for s in all_sieves(dom, c) {
                let as_presheaf = Presheaf::from_sieve(dom.clone(), &s);
                let ext = lextend(f, &as_presheaf).unwrap();
                let image = image_sieve(f, &s);
                for e in cod.objects() {
                    let mut pushed = BTreeSet::new();
                    for k in 0..ext.presheaf.size(e) {
                        let r = ext.representative(e, k);
                        let member = dom.hom(r.object, c).iter().copied().filter(|&a| s.contains(a)).nth(r.element);
                        pushed.insert(cod.comp(f.arrow(member.unwrap()), r.arrow));
                    }
                    let expected: BTreeSet<_> = image.arrows().filter(|&a| cod.source(a) == e).collect();
                    if pushed.len() < ext.presheaf.size(e) {
                        collapsed += 1;
                    }
                    assert_eq!(pushed, expected);
                }
            }
        }
    }
    // some extensions of sieves are not subpresheaves
    assert!(collapsed > 0);
}

#[test]
fn pullback_is_functorial() {
    for cat in &pool().categories {
        for c in cat.objects() {
            for s in all_sieves(cat, c) {
                for &u in cat.arrows_into(c) {
                    let once = pullback_sieve(cat, u, &s).unwrap();
                    for &v in cat.arrows_into(cat.source(u)) {
                        assert_eq!(
                            pullback_sieve(cat, v, &once).unwrap(),
                            pullback_sieve(cat, cat.comp(u, v), &s).unwrap()
                        );
                    }
                }
                assert_eq!(pullback_sieve(cat, cat.identity(c), &s).unwrap(), s);
            }
        }
    }
}

fn small(cat: &FinCategory) -> bool {
    cat.n_objects() <= 2
}

#[test]
fn saturation_is_the_least_topology() {
    for (cat, sites) in pool().categories.iter().zip(&pool().sites) {
        if !small(cat) {
            continue;
        }
        for gen in generating_coverages(cat) {
            let sat = saturate(&gen).unwrap();
            let above: Vec<&Site> = sites.iter().filter(|t| contained(&gen, t.topology())).collect();
            assert!(above.iter().any(|t| same_covers(t.topology(), sat.topology())));
            assert!(above.iter().all(|t| contained(sat.topology(), t.topology())));
        }
    }
}

#[test]
fn saturation_is_idempotent_and_monotone() {
    for cat in &pool().categories {
        if !small(cat) {
            continue;
        }
        let gens = generating_coverages(cat);
        for a in &gens {
            let sat = saturate(a).unwrap();
            assert!(same_covers(saturate(sat.topology()).unwrap().topology(), sat.topology()));
            for b in &gens {
                let both = union(a, b);
                if let Ok(big) = saturate(&both) {
                    assert!(contained(sat.topology(), big.topology()));
                }
            }
        }
    }
}

#[test]
fn topologies_pass_every_axiom() {
    for sites in &pool().sites {
        for site in sites {
            for axiom in Axiom::ALL {
                assert!(check_axiom(site.topology(), axiom).passed(), "{}", axiom.name());
            }
        }
    }
}

#[test]
fn trivial_and_total_are_the_extremes() {
    for (cat, sites) in pool().categories.iter().zip(&pool().sites) {
        let trivial = Site::trivial(cat.clone());
        let total = Site::total(cat.clone());
        for site in sites {
            assert!(contained(trivial.topology(), site.topology()));
            assert!(contained(site.topology(), total.topology()));
        }
        for c in cat.objects() {
            assert!(total.is_cover(&Sieve::empty(cat, c)));
            assert_eq!(trivial.covers(c).len(), 1);
        }
    }
}
