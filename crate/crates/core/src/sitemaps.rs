//! Conditions on functors between sites: cover-preserving, cover-lifting,
//! covering-flat, and the morphisms, comorphisms and dense functors built
//! from them.
//!
//! The `_on` checks accept any [`Coverage`]: covers are quantified over the
//! family given and membership is tested in its saturation, so a generating
//! family and its topology give the same answer. The `Site` versions skip the
//! saturation step.

use std::sync::{Arc, OnceLock};

use crate::fincat::{same_category, Arr, FinCategory, FunctorMap, Ob};
use crate::site::{generate_sieve, image_sieve, preimage_sieve, saturate, Coverage, Sieve, Site};
use crate::{Error, Outcome, Result};

/// A cover `sieve` on `object` whose transport is not a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveWitness {
    pub object: Ob,
    pub sieve: Sieve,
}

fn check_sides(f: &FunctorMap, dom: &Arc<FinCategory>, cod: &Arc<FinCategory>) -> Result<()> {
    if same_category(f.domain(), dom) && same_category(f.codomain(), cod) {
        Ok(())
    } else {
        Err(Error::Mismatch("functor does not run between these sites".into()))
    }
}

/// `∀c, ∀S ∈ J(c): image_sieve(f, S) ∈ K(f c)`. The witness is the first
/// failing `(c, S)` in canonical order.
pub fn cover_preserving_on(f: &FunctorMap, j: &Coverage, k: &Coverage) -> Result<Outcome<SieveWitness>> {
    check_sides(f, j.category(), k.category())?;
    preserving_in(f, j, saturate(k)?.topology())
}

fn preserving_in(f: &FunctorMap, j: &Coverage, k: &Coverage) -> Result<Outcome<SieveWitness>> {
    check_sides(f, j.category(), k.category())?;
    for c in j.category().objects() {
        for s in j.covers(c) {
            if !k.is_cover(&image_sieve(f, s)) {
                return Ok(Outcome::Fail(SieveWitness {
                    object: c,
                    sieve: s.clone(),
                }));
            }
        }
    }
    Ok(Outcome::Pass)
}

/// For `F: (D,K) -> (C,J)`: `∀d, ∀S ∈ J(F d): F⁻¹(S) ∈ K(d)`. The witness
/// sieve lives on `F(d)`.
pub fn cover_lifting_on(f: &FunctorMap, k: &Coverage, j: &Coverage) -> Result<Outcome<SieveWitness>> {
    check_sides(f, k.category(), j.category())?;
    lifting_in(f, saturate(k)?.topology(), j)
}

fn lifting_in(f: &FunctorMap, k: &Coverage, j: &Coverage) -> Result<Outcome<SieveWitness>> {
    check_sides(f, k.category(), j.category())?;
    for d in k.category().objects() {
        for s in j.covers(f.object(d)) {
            if !k.is_cover(&preimage_sieve(f, s, d)?) {
                return Ok(Outcome::Fail(SieveWitness {
                    object: d,
                    sieve: s.clone(),
                }));
            }
        }
    }
    Ok(Outcome::Pass)
}

pub fn is_cover_preserving(f: &FunctorMap, j: &Site, k: &Site) -> Result<Outcome<SieveWitness>> {
    preserving_in(f, j.topology(), k.topology())
}

pub fn is_cover_lifting(f: &FunctorMap, k: &Site, j: &Site) -> Result<Outcome<SieveWitness>> {
    lifting_in(f, k.topology(), j.topology())
}

/// A finite graph-shaped diagram in the domain: vertices are objects,
/// edges `(i, j, u)` with `u: objects[i] -> objects[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDiagram {
    pub objects: Vec<Ob>,
    pub edges: Vec<(usize, usize, Arr)>,
}

/// Which finite diagrams the covering-flatness check ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatMode {
    /// Empty diagram, discrete pairs and parallel pairs.
    Shapes,
    /// Every graph diagram with at most this many vertices and edges.
    Exhaustive(usize),
}

impl Default for FlatMode {
    fn default() -> Self {
        FlatMode::Shapes
    }
}

/// A cone `(w_i: vertex -> f(objects[i]))` whose factorization sieve is not
/// covering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatnessWitness {
    pub diagram: GraphDiagram,
    pub vertex: Ob,
    pub cone: Vec<Arr>,
}

/// All cones over `diagram` pushed through `arrow_of` (identity or `f`),
/// with apex `apex`, in lexicographic order.
fn cones(
    cat: &FinCategory,
    apex: Ob,
    legs_to: &[Ob],
    edges: &[(usize, usize, Arr)],
    arrow_of: impl Fn(Arr) -> Arr,
) -> Vec<Vec<Arr>> {
    let mut out = Vec::new();
    let mut legs = Vec::with_capacity(legs_to.len());
    fn rec(
        cat: &FinCategory,
        apex: Ob,
        legs_to: &[Ob],
        edges: &[(usize, usize, Arr)],
        arrow_of: &dyn Fn(Arr) -> Arr,
        legs: &mut Vec<Arr>,
        out: &mut Vec<Vec<Arr>>,
    ) {
        let i = legs.len();
        if i == legs_to.len() {
            out.push(legs.clone());
            return;
        }
        for &w in cat.hom(apex, legs_to[i]) {
            legs.push(w);
            let ok = edges.iter().all(|&(s, t, u)| {
                s.max(t) > i || cat.comp(arrow_of(u), legs[s]) == legs[t]
            });
            if ok {
                rec(cat, apex, legs_to, edges, arrow_of, legs, out);
            }
            legs.pop();
        }
    }
    rec(cat, apex, legs_to, edges, &arrow_of, &mut legs, &mut out);
    out
}

/// The arrows `s: d' -> d` such that `(w_i∘s)` factors as `f(a_i)∘v` for a
/// cone `(a_i)` over the diagram in the domain.
pub fn factorization_sieve(f: &FunctorMap, diagram: &GraphDiagram, vertex: Ob, cone: &[Arr]) -> Sieve {
    let (cc, dc) = (f.domain(), f.codomain());
    let lower: Vec<(Ob, Vec<Vec<Arr>>)> = cc
        .objects()
        .map(|c| (c, cones(cc, c, &diagram.objects, &diagram.edges, |u| u)))
        .collect();
    Sieve::from_arrows(
        dc,
        vertex,
        dc.arrows_into(vertex).iter().copied().filter(|&s| {
            let d2 = dc.source(s);
            lower.iter().any(|(c, lower_cones)| {
                dc.hom(d2, f.object(*c)).iter().any(|&v| {
                    lower_cones.iter().any(|a| {
                        a.iter()
                            .zip(cone)
                            .all(|(&ai, &wi)| dc.comp(f.arrow(ai), v) == dc.comp(wi, s))
                    })
                })
            })
        }),
    )
}

fn shape_diagrams(cat: &FinCategory, mode: FlatMode) -> Vec<GraphDiagram> {
    let mut out = vec![GraphDiagram {
        objects: vec![],
        edges: vec![],
    }];
    match mode {
        FlatMode::Shapes => {
            for x in cat.objects() {
                for y in cat.objects() {
                    out.push(GraphDiagram {
                        objects: vec![x, y],
                        edges: vec![],
                    });
                    let hom = cat.hom(x, y);
                    for (i, &u) in hom.iter().enumerate() {
                        for &v in &hom[i + 1..] {
                            out.push(GraphDiagram {
                                objects: vec![x, y],
                                edges: vec![(0, 1, u), (0, 1, v)],
                            });
                        }
                    }
                }
            }
        }
        FlatMode::Exhaustive(bound) => {
            for n in 1..=bound {
                let mut objects = vec![0; n];
                loop {
                    let candidates: Vec<(usize, usize, Arr)> = (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .flat_map(|(i, j)| {
                            cat.hom(objects[i], objects[j])
                                .iter()
                                .filter(move |&&u| i != j || !cat.is_identity(u))
                                .map(move |&u| (i, j, u))
                        })
                        .collect();
                    push_edge_subsets(&objects, &candidates, bound, &mut out);
                    // next nondecreasing tuple
                    let Some(pos) = (0..n).rev().find(|&i| objects[i] + 1 < cat.n_objects()) else {
                        break;
                    };
                    let next = objects[pos] + 1;
                    for o in &mut objects[pos..] {
                        *o = next;
                    }
                }
            }
        }
    }
    out
}

fn push_edge_subsets(objects: &[Ob], candidates: &[(usize, usize, Arr)], bound: usize, out: &mut Vec<GraphDiagram>) {
    fn rec(
        objects: &[Ob],
        candidates: &[(usize, usize, Arr)],
        start: usize,
        bound: usize,
        chosen: &mut Vec<(usize, usize, Arr)>,
        out: &mut Vec<GraphDiagram>,
    ) {
        out.push(GraphDiagram {
            objects: objects.to_vec(),
            edges: chosen.clone(),
        });
        if chosen.len() == bound {
            return;
        }
        for i in start..candidates.len() {
            chosen.push(candidates[i]);
            rec(objects, candidates, i + 1, bound, chosen, out);
            chosen.pop();
        }
    }
    rec(objects, candidates, 0, bound, &mut Vec::new(), out);
}

/// Covering-flatness: only the topology on the codomain is involved.
pub fn covering_flat_on(f: &FunctorMap, k: &Coverage, mode: FlatMode) -> Result<Outcome<FlatnessWitness>> {
    if !same_category(f.codomain(), k.category()) {
        return Err(Error::Mismatch("topology is not on the codomain".into()));
    }
    flat_in(f, saturate(k)?.topology(), mode)
}

fn flat_in(f: &FunctorMap, k: &Coverage, mode: FlatMode) -> Result<Outcome<FlatnessWitness>> {
    if !same_category(f.codomain(), k.category()) {
        return Err(Error::Mismatch("topology is not on the codomain".into()));
    }
    let dc = f.codomain();
    for diagram in shape_diagrams(f.domain(), mode) {
        let fx: Vec<Ob> = diagram.objects.iter().map(|&x| f.object(x)).collect();
        for d in dc.objects() {
            for cone in cones(dc, d, &fx, &diagram.edges, |u| f.arrow(u)) {
                if !k.is_cover(&factorization_sieve(f, &diagram, d, &cone)) {
                    return Ok(Outcome::Fail(FlatnessWitness {
                        diagram,
                        vertex: d,
                        cone,
                    }));
                }
            }
        }
    }
    Ok(Outcome::Pass)
}

pub fn is_covering_flat(f: &FunctorMap, k: &Site, mode: FlatMode) -> Result<Outcome<FlatnessWitness>> {
    flat_in(f, k.topology(), mode)
}

/// Covering-flat and cover-preserving.
pub fn is_site_morphism(f: &FunctorMap, j: &Site, k: &Site) -> Result<bool> {
    Ok(is_covering_flat(f, k, FlatMode::Shapes)?.passed() && is_cover_preserving(f, j, k)?.passed())
}

/// Cover-lifting.
pub fn is_site_comorphism(f: &FunctorMap, k: &Site, j: &Site) -> Result<bool> {
    Ok(is_cover_lifting(f, k, j)?.passed())
}

/// Every object `d` is covered by the sieve generated by the arrows
/// `f(c) -> d`. The witness is the first uncovered object.
pub fn is_cover_dense(f: &FunctorMap, k: &Site) -> Result<Outcome<Ob>> {
    if !same_category(f.codomain(), k.category()) {
        return Err(Error::Mismatch("topology is not on the codomain".into()));
    }
    let dc = f.codomain();
    for d in dc.objects() {
        let gens: Vec<Arr> = f
            .domain()
            .objects()
            .flat_map(|c| dc.hom(f.object(c), d).iter().copied())
            .collect();
        if !k.is_cover(&generate_sieve(dc, d, &gens)?) {
            return Ok(Outcome::Fail(d));
        }
    }
    Ok(Outcome::Pass)
}

/// A functor between two sites, with the three conditions computed on
/// demand and cached.
#[derive(Debug, Clone)]
pub struct SiteFunctor {
    pub functor: FunctorMap,
    pub source: Site,
    pub target: Site,
    preserving: OnceLock<bool>,
    lifting: OnceLock<bool>,
    flat: OnceLock<bool>,
}

impl SiteFunctor {
    pub fn new(functor: FunctorMap, source: Site, target: Site) -> Result<Self> {
        check_sides(&functor, source.category(), target.category())?;
        Ok(SiteFunctor {
            functor,
            source,
            target,
            preserving: OnceLock::new(),
            lifting: OnceLock::new(),
            flat: OnceLock::new(),
        })
    }

    pub fn identity(site: &Site) -> Self {
        SiteFunctor::new(FunctorMap::identity(site.category().clone()), site.clone(), site.clone())
            .expect("identity runs between its own site")
    }

    pub fn cover_preserving(&self) -> bool {
        *self.preserving.get_or_init(|| {
            is_cover_preserving(&self.functor, &self.source, &self.target)
                .expect("checked sides")
                .passed()
        })
    }

    pub fn cover_lifting(&self) -> bool {
        *self.lifting.get_or_init(|| {
            is_cover_lifting(&self.functor, &self.source, &self.target)
                .expect("checked sides")
                .passed()
        })
    }

    pub fn covering_flat(&self) -> bool {
        *self.flat.get_or_init(|| {
            is_covering_flat(&self.functor, &self.target, FlatMode::Shapes)
                .expect("checked sides")
                .passed()
        })
    }

    pub fn is_morphism(&self) -> bool {
        self.covering_flat() && self.cover_preserving()
    }

    pub fn is_comorphism(&self) -> bool {
        self.cover_lifting()
    }

    /// The cached flags, where computed.
    pub fn flags(&self) -> [Option<bool>; 3] {
        [
            self.preserving.get().copied(),
            self.lifting.get().copied(),
            self.flat.get().copied(),
        ]
    }

    /// `next∘self`.
    pub fn then(&self, next: &SiteFunctor) -> Result<SiteFunctor> {
        if self.target != next.source {
            return Err(Error::Mismatch("site functors do not compose".into()));
        }
        SiteFunctor::new(next.functor.after(&self.functor)?, self.source.clone(), next.target.clone())
    }
}
