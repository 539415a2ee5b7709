mod common;

use std::collections::VecDeque;
use std::sync::Arc;

use common::*;
use sitecalc::corpus::{categories, squares};
use sitecalc::exactness::{is_exact_coend, is_locally_exact_square, LaxSquare};
use sitecalc::fincat::{is_final, is_fully_faithful, FinCategory, FunctorMap};
use sitecalc::site::all_topologies;

fn fixture(name: &str) -> Arc<FinCategory> {
    categories().into_iter().find(|p| p.0 == name).unwrap().1
}

/// Finality by breadth-first search over `y↓F`: objects `(x, v: y -> F x)`,
/// edges from arrows `w: x -> x'` with `F(w)∘v = v'`.
fn final_by_search(f: &FunctorMap) -> bool {
    let (dom, cod) = (f.domain(), f.codomain());
    cod.objects().all(|y| {
        let nodes: Vec<(usize, usize)> = dom
            .objects()
            .flat_map(|x| cod.hom(y, f.object(x)).iter().map(move |&v| (x, v)))
            .collect();
        if nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..nodes.len() {
                if seen[j] {
                    continue;
                }
                let linked = |(a, v): (usize, usize), (b, u): (usize, usize)| {
                    dom.hom(a, b).iter().any(|&w| cod.comp(f.arrow(w), v) == u)
                };
                if linked(nodes[i], nodes[j]) || linked(nodes[j], nodes[i]) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    })
}

#[test]
fn finality_matches_search() {
    let mut finals = 0;
    for (_, _, f) in &pool().functors {
        let expected = final_by_search(f);
        assert_eq!(is_final(f).passed(), expected);
        finals += expected as usize;
    }
    assert!(finals > 0);
}

#[test]
fn full_faithfulness_matches_hom_counts() {
    for (_, _, f) in &pool().functors {
        let (dom, cod) = (f.domain(), f.codomain());
        let expected = dom.objects().all(|x| {
            dom.objects().all(|y| {
                let mut images: Vec<usize> = dom.hom(x, y).iter().map(|&u| f.arrow(u)).collect();
                images.sort_unstable();
                images.dedup();
                images.len() == dom.hom(x, y).len() && images.len() == cod.hom(f.object(x), f.object(y)).len()
            })
        });
        assert_eq!(is_fully_faithful(f), expected);
    }
}

#[test]
fn exact_squares_are_locally_exact_everywhere() {
    let corners = [fixture("One"), fixture("Two")];
    let mut exact = 0;
    for tl in &corners {
        for tr in &corners {
            let sites = all_topologies(tr);
            for bl in &corners {
                for br in &corners {
                    for sq in squares(tl, tr, bl, br) {
                        if !is_exact_coend(&sq).passed() {
                            continue;
                        }
                        exact += 1;
                        for site in &sites {
                            assert!(is_locally_exact_square(&sq, site).unwrap().passed());
                        }
                    }
                }
            }
        }
    }
    assert!(exact > 0);
}

#[test]
fn identity_squares_of_identities_are_exact() {
    for cat in &pool().categories {
        let id = FunctorMap::identity(cat.clone());
        assert!(is_exact_coend(&LaxSquare::identity_of(&id)).passed());
        assert!(is_exact_coend(&LaxSquare::dual_identity_of(&id)).passed());
    }
}
