//! Finite presheaves, natural maps between them, and the adjoint triple
//! `lext_f ⊣ res_f ⊣ rext_f` along a functor `f`.
//!
//! Elements of `X(c)` are `0..X.size(c)`. Left extensions are coends,
//! computed by union-find over all pairs `(v: d -> f(c), x ∈ X(c))`; right
//! extensions are ends, computed by listing every natural family. Element
//! numbering is canonical (first representative in lexicographic order), so
//! equal inputs give equal outputs.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::exactness::LaxSquare;
use crate::fincat::{Arr, FinCategory, FunctorMap, NatTransMap, Ob};
use crate::site::Sieve;
use crate::{Error, Outcome, Result};

fn same_base(a: &Arc<FinCategory>, b: &Arc<FinCategory>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Position of `a` in the (sorted) hom list it belongs to.
pub(crate) fn hom_position(cat: &FinCategory, a: Arr) -> usize {
    cat.hom(cat.source(a), cat.target(a))
        .binary_search(&a)
        .expect("arrow is in its own hom-set")
}

/// A contravariant functor into finite sets.
#[derive(Debug, Clone)]
pub struct Presheaf {
    base: Arc<FinCategory>,
    sizes: Vec<usize>,
    /// For `u: a -> b`, the map `X(b) -> X(a)`.
    actions: Vec<Vec<usize>>,
}

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        same_base(&self.base, &other.base) && self.sizes == other.sizes && self.actions == other.actions
    }
}

impl Eq for Presheaf {}

impl Presheaf {
    pub fn new(base: Arc<FinCategory>, sizes: Vec<usize>, actions: Vec<Vec<usize>>) -> Result<Self> {
        if sizes.len() != base.n_objects() || actions.len() != base.n_arrows() {
            return Err(Error::NotAPresheaf("sizes do not match the base".into()));
        }
        for u in base.arrows() {
            let (a, b) = (base.source(u), base.target(u));
            if actions[u].len() != sizes[b] || actions[u].iter().any(|&x| x >= sizes[a]) {
                return Err(Error::NotAPresheaf(format!(
                    "action of {} has the wrong shape",
                    base.arrow_name(u)
                )));
            }
        }
        let p = Presheaf {
            base,
            sizes,
            actions,
        };
        if let Some(msg) = p.first_defect() {
            return Err(Error::NotAPresheaf(msg));
        }
        Ok(p)
    }

    fn first_defect(&self) -> Option<String> {
        let c = &*self.base;
        for x in c.objects() {
            let id = c.identity(x);
            if self.actions[id].iter().enumerate().any(|(i, &j)| i != j) {
                return Some(format!("identity of {} acts nontrivially", c.object_name(x)));
            }
        }
        for v in c.arrows() {
            for &u in c.arrows_into(c.source(v)) {
                let vu = c.comp(v, u);
                for e in 0..self.sizes[c.target(v)] {
                    if self.act(vu, e) != self.act(u, self.act(v, e)) {
                        return Some(format!(
                            "action of {}∘{} is not the composite",
                            c.arrow_name(v),
                            c.arrow_name(u)
                        ));
                    }
                }
            }
        }
        None
    }

    /// `y_c`: elements at `d` are the arrows `d -> c`, in hom-list order.
    pub fn representable(base: Arc<FinCategory>, c: Ob) -> Self {
        let sizes = base.objects().map(|d| base.hom(d, c).len()).collect();
        let actions = base
            .arrows()
            .map(|u| {
                base.hom(base.target(u), c)
                    .iter()
                    .map(|&v| hom_position(&base, base.comp(v, u)))
                    .collect()
            })
            .collect();
        Presheaf {
            base,
            sizes,
            actions,
        }
    }

    /// `D(f(-), d)` as a presheaf on the domain of `f`.
    pub fn hom_into(f: &FunctorMap, d: Ob) -> Self {
        let (c, dc) = (f.domain().clone(), f.codomain());
        let sizes = c.objects().map(|x| dc.hom(f.object(x), d).len()).collect();
        let actions = c
            .arrows()
            .map(|u| {
                dc.hom(f.object(c.target(u)), d)
                    .iter()
                    .map(|&v| hom_position(dc, dc.comp(v, f.arrow(u))))
                    .collect()
            })
            .collect();
        Presheaf {
            base: c,
            sizes,
            actions,
        }
    }

    /// A sieve as a subpresheaf of `y_c`: elements at `d` are its arrows out
    /// of `d`, ascending.
    pub fn from_sieve(base: Arc<FinCategory>, s: &Sieve) -> Self {
        let members: Vec<Vec<Arr>> = base
            .objects()
            .map(|d| base.hom(d, s.base()).iter().copied().filter(|&a| s.contains(a)).collect())
            .collect();
        let sizes = members.iter().map(Vec::len).collect();
        let actions = base
            .arrows()
            .map(|u| {
                members[base.target(u)]
                    .iter()
                    .map(|&v| {
                        let vu = base.comp(v, u);
                        members[base.source(u)].binary_search(&vu).expect("sieves are down-closed")
                    })
                    .collect()
            })
            .collect();
        Presheaf {
            base,
            sizes,
            actions,
        }
    }

    pub fn terminal(base: Arc<FinCategory>) -> Self {
        Presheaf::constant(base, 1)
    }

    pub fn initial(base: Arc<FinCategory>) -> Self {
        Presheaf::constant(base, 0)
    }

    /// Every fiber is `0..n` and every arrow acts as the identity.
    pub fn constant(base: Arc<FinCategory>, n: usize) -> Self {
        let sizes = vec![n; base.n_objects()];
        let actions = vec![(0..n).collect(); base.n_arrows()];
        Presheaf {
            base,
            sizes,
            actions,
        }
    }

    /// Pointwise product; `(x, y)` is numbered `x * |Y(c)| + y`.
    pub fn product(&self, other: &Presheaf) -> Result<Presheaf> {
        self.check_base(other)?;
        let c = &self.base;
        let sizes = c.objects().map(|x| self.sizes[x] * other.sizes[x]).collect();
        let actions = c
            .arrows()
            .map(|u| {
                let (a, b) = (c.source(u), c.target(u));
                (0..self.sizes[b] * other.sizes[b])
                    .map(|e| {
                        let (x, y) = (e / other.sizes[b], e % other.sizes[b]);
                        self.act(u, x) * other.sizes[a] + other.act(u, y)
                    })
                    .collect()
            })
            .collect();
        Ok(Presheaf {
            base: self.base.clone(),
            sizes,
            actions,
        })
    }

    /// Pointwise disjoint union; the right summand is shifted by `|X(c)|`.
    pub fn coproduct(&self, other: &Presheaf) -> Result<Presheaf> {
        self.check_base(other)?;
        let c = &self.base;
        let sizes = c.objects().map(|x| self.sizes[x] + other.sizes[x]).collect();
        let actions = c
            .arrows()
            .map(|u| {
                let a = c.source(u);
                self.actions[u]
                    .iter()
                    .copied()
                    .chain(other.actions[u].iter().map(|&y| self.sizes[a] + y))
                    .collect()
            })
            .collect();
        Ok(Presheaf {
            base: self.base.clone(),
            sizes,
            actions,
        })
    }

    fn check_base(&self, other: &Presheaf) -> Result<()> {
        if same_base(&self.base, &other.base) {
            Ok(())
        } else {
            Err(Error::Mismatch("presheaves live on different categories".into()))
        }
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn size(&self, c: Ob) -> usize {
        self.sizes[c]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `X(u)(x)`.
    pub fn act(&self, u: Arr, x: usize) -> usize {
        self.actions[u][x]
    }

    pub fn action(&self, u: Arr) -> &[usize] {
        &self.actions[u]
    }
}

/// A natural map between presheaves on the same category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresheafMap {
    source: Presheaf,
    target: Presheaf,
    components: Vec<Vec<usize>>,
}

/// Why a map is not invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoFailure {
    NotInjective { object: Ob, elements: (usize, usize) },
    NotSurjective { object: Ob, element: usize },
}

impl PresheafMap {
    pub fn new(source: Presheaf, target: Presheaf, components: Vec<Vec<usize>>) -> Result<Self> {
        source.check_base(&target)?;
        let c = source.base.clone();
        if components.len() != c.n_objects() {
            return Err(Error::NotNatural("wrong number of components".into()));
        }
        for x in c.objects() {
            if components[x].len() != source.size(x) || components[x].iter().any(|&y| y >= target.size(x)) {
                return Err(Error::NotNatural(format!(
                    "component at {} has the wrong shape",
                    c.object_name(x)
                )));
            }
        }
        for u in c.arrows() {
            let (a, b) = (c.source(u), c.target(u));
            for e in 0..source.size(b) {
                if components[a][source.act(u, e)] != target.act(u, components[b][e]) {
                    return Err(Error::NotNatural(format!(
                        "square at {} does not commute",
                        c.arrow_name(u)
                    )));
                }
            }
        }
        Ok(PresheafMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(x: &Presheaf) -> Self {
        PresheafMap {
            source: x.clone(),
            target: x.clone(),
            components: x.sizes.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    pub fn source(&self) -> &Presheaf {
        &self.source
    }

    pub fn target(&self) -> &Presheaf {
        &self.target
    }

    pub fn apply(&self, c: Ob, x: usize) -> usize {
        self.components[c][x]
    }

    pub fn component(&self, c: Ob) -> &[usize] {
        &self.components[c]
    }

    /// `next∘self`.
    pub fn then(&self, next: &PresheafMap) -> Result<PresheafMap> {
        if self.target != next.source {
            return Err(Error::Mismatch("maps do not compose".into()));
        }
        Ok(PresheafMap {
            source: self.source.clone(),
            target: next.target.clone(),
            components: self
                .components
                .iter()
                .zip(&next.components)
                .map(|(s, t)| s.iter().map(|&e| t[e]).collect())
                .collect(),
        })
    }

    /// Every component a bijection; the first failure otherwise.
    pub fn is_iso(&self) -> Outcome<IsoFailure> {
        for c in self.source.base.objects() {
            let mut seen = vec![None; self.target.size(c)];
            for (x, &y) in self.components[c].iter().enumerate() {
                if let Some(prev) = seen[y] {
                    return Outcome::Fail(IsoFailure::NotInjective {
                        object: c,
                        elements: (prev, x),
                    });
                }
                seen[y] = Some(x);
            }
            if let Some(y) = seen.iter().position(Option::is_none) {
                return Outcome::Fail(IsoFailure::NotSurjective { object: c, element: y });
            }
        }
        Outcome::Pass
    }
}

/// Backtracking search over natural maps `X -> Y`. Assigning `α_c(x)`
/// forces `α_{c'}(X(u)x) = Y(u)(α_c x)` for every `u: c' -> c`, which is
/// propagated eagerly.
struct MapSearch<'a> {
    x: &'a Presheaf,
    y: &'a Presheaf,
    injective: bool,
    value: Vec<Vec<Option<usize>>>,
    used: Vec<Vec<bool>>,
}

impl<'a> MapSearch<'a> {
    fn new(x: &'a Presheaf, y: &'a Presheaf, injective: bool) -> Self {
        MapSearch {
            x,
            y,
            injective,
            value: x.sizes.iter().map(|&n| vec![None; n]).collect(),
            used: y.sizes.iter().map(|&n| vec![false; n]).collect(),
        }
    }

    fn assign(&mut self, c: Ob, e: usize, val: usize, trail: &mut Vec<(Ob, usize)>) -> bool {
        let base = self.x.base.clone();
        let mut stack = vec![(c, e, val)];
        while let Some((c, e, val)) = stack.pop() {
            match self.value[c][e] {
                Some(v) if v == val => continue,
                Some(_) => return false,
                None => {}
            }
            if self.injective {
                if self.used[c][val] {
                    return false;
                }
                self.used[c][val] = true;
            }
            self.value[c][e] = Some(val);
            trail.push((c, e));
            for &u in base.arrows_into(c) {
                stack.push((base.source(u), self.x.act(u, e), self.y.act(u, val)));
            }
        }
        true
    }

    fn undo(&mut self, trail: &[(Ob, usize)]) {
        for &(c, e) in trail {
            if let Some(v) = self.value[c][e].take() {
                if self.injective {
                    self.used[c][v] = false;
                }
            }
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(Vec<Vec<usize>>) -> bool) -> bool {
        let next = self
            .x
            .base
            .objects()
            .find_map(|c| self.value[c].iter().position(Option::is_none).map(|e| (c, e)));
        let Some((c, e)) = next else {
            let comps = self
                .value
                .iter()
                .map(|v| v.iter().map(|o| o.unwrap()).collect())
                .collect();
            return visit(comps);
        };
        for val in 0..self.y.size(c) {
            let mut trail = Vec::new();
            if self.assign(c, e, val, &mut trail) && !self.run(visit) {
                self.undo(&trail);
                return false;
            }
            self.undo(&trail);
        }
        true
    }
}

/// Calls `visit` on the components of every natural map `X -> Y`, in
/// lexicographic order, until it returns `false`.
pub fn for_each_natural_map(x: &Presheaf, y: &Presheaf, visit: &mut dyn FnMut(Vec<Vec<usize>>) -> bool) {
    MapSearch::new(x, y, false).run(visit);
}

pub fn natural_maps(x: &Presheaf, y: &Presheaf) -> Vec<PresheafMap> {
    let mut out = Vec::new();
    for_each_natural_map(x, y, &mut |comps| {
        out.push(PresheafMap {
            source: x.clone(),
            target: y.clone(),
            components: comps,
        });
        true
    });
    out
}

pub fn count_natural_maps(x: &Presheaf, y: &Presheaf) -> usize {
    let mut n = 0;
    for_each_natural_map(x, y, &mut |_| {
        n += 1;
        true
    });
    n
}

/// An isomorphism `X ≅ Y` if there is one.
pub fn find_iso(x: &Presheaf, y: &Presheaf) -> Option<PresheafMap> {
    if !same_base(&x.base, &y.base) || x.sizes != y.sizes {
        return None;
    }
    let mut found = None;
    MapSearch::new(x, y, true).run(&mut |comps| {
        found = Some(comps);
        false
    });
    found.map(|components| PresheafMap {
        source: x.clone(),
        target: y.clone(),
        components,
    })
}

fn check_on(f_side: &Arc<FinCategory>, x: &Presheaf) -> Result<()> {
    if same_base(f_side, &x.base) {
        Ok(())
    } else {
        Err(Error::Mismatch("presheaf does not live on the functor's side".into()))
    }
}

/// `(res_f Y)(c) = Y(f(c))`.
pub fn restrict(f: &FunctorMap, y: &Presheaf) -> Result<Presheaf> {
    check_on(f.codomain(), y)?;
    let c = f.domain();
    Ok(Presheaf {
        base: c.clone(),
        sizes: c.objects().map(|x| y.size(f.object(x))).collect(),
        actions: c.arrows().map(|u| y.action(f.arrow(u)).to_vec()).collect(),
    })
}

pub fn restrict_map(f: &FunctorMap, beta: &PresheafMap) -> Result<PresheafMap> {
    Ok(PresheafMap {
        source: restrict(f, &beta.source)?,
        target: restrict(f, &beta.target)?,
        components: f
            .domain()
            .objects()
            .map(|x| beta.components[f.object(x)].clone())
            .collect(),
    })
}

/// Representative `(c, v: d -> f(c), x ∈ X(c))` of a coend class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementClass {
    pub object: Ob,
    pub arrow: Arr,
    pub element: usize,
}

/// `lext_f X` together with the bookkeeping that names its elements.
#[derive(Debug, Clone)]
pub struct LeftExtension {
    pub presheaf: Presheaf,
    functor: FunctorMap,
    class_of: Vec<HashMap<ElementClass, usize>>,
    representatives: Vec<Vec<ElementClass>>,
}

impl LeftExtension {
    /// Class at `d` of the pair `(v: d -> f(c), x ∈ X(c))`.
    pub fn class(&self, d: Ob, c: Ob, v: Arr, x: usize) -> usize {
        self.class_of[d][&ElementClass {
            object: c,
            arrow: v,
            element: x,
        }]
    }

    pub fn representative(&self, d: Ob, k: usize) -> ElementClass {
        self.representatives[d][k]
    }

    /// The unit `X -> res_f lext_f X`, `x ↦ [(id_{f c}, x)]`.
    pub fn unit(&self, x: &Presheaf) -> PresheafMap {
        let f = &self.functor;
        let dc = f.codomain();
        let components = x
            .base
            .objects()
            .map(|c| {
                let fc = f.object(c);
                (0..x.size(c)).map(|e| self.class(fc, c, dc.identity(fc), e)).collect()
            })
            .collect();
        PresheafMap {
            source: x.clone(),
            target: restrict(f, &self.presheaf).expect("same functor"),
            components,
        }
    }
}

pub fn lextend(f: &FunctorMap, x: &Presheaf) -> Result<LeftExtension> {
    check_on(f.domain(), x)?;
    let (cc, dc) = (f.domain().clone(), f.codomain().clone());
    let mut class_of = Vec::with_capacity(dc.n_objects());
    let mut representatives = Vec::with_capacity(dc.n_objects());
    for d in dc.objects() {
        let mut pairs = Vec::new();
        for c in cc.objects() {
            for &v in dc.hom(d, f.object(c)) {
                for e in 0..x.size(c) {
                    pairs.push(ElementClass {
                        object: c,
                        arrow: v,
                        element: e,
                    });
                }
            }
        }
        let index: HashMap<ElementClass, usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut uf = UnionFind::<usize>::new(pairs.len());
        // (v, X(u)x) at c' ~ (f(u)∘v, x) at c, for u: c' -> c
        for (i, p) in pairs.iter().enumerate() {
            for &u in cc.arrows_out_of(p.object) {
                let q = ElementClass {
                    object: cc.target(u),
                    arrow: dc.comp(f.arrow(u), p.arrow),
                    element: 0,
                };
                for e in 0..x.size(q.object) {
                    if x.act(u, e) == p.element {
                        uf.union(i, index[&ElementClass { element: e, ..q }]);
                    }
                }
            }
        }
        let mut class_by_root = HashMap::new();
        let mut reps = Vec::new();
        let mut classes = HashMap::with_capacity(pairs.len());
        for (i, &p) in pairs.iter().enumerate() {
            let root = uf.find_mut(i);
            let k = *class_by_root.entry(root).or_insert_with(|| {
                reps.push(p);
                reps.len() - 1
            });
            classes.insert(p, k);
        }
        class_of.push(classes);
        representatives.push(reps);
    }
    let sizes: Vec<usize> = representatives.iter().map(Vec::len).collect();
    let actions = dc
        .arrows()
        .map(|w| {
            let (d2, d) = (dc.source(w), dc.target(w));
            representatives[d]
                .iter()
                .map(|r| {
                    class_of[d2][&ElementClass {
                        arrow: dc.comp(r.arrow, w),
                        ..*r
                    }]
                })
                .collect()
        })
        .collect();
    Ok(LeftExtension {
        presheaf: Presheaf {
            base: dc,
            sizes,
            actions,
        },
        functor: f.clone(),
        class_of,
        representatives,
    })
}

/// `lext_f α`: `[(v, x)] ↦ [(v, α(x))]`.
pub fn lextend_map(f: &FunctorMap, alpha: &PresheafMap) -> Result<PresheafMap> {
    let src = lextend(f, &alpha.source)?;
    let tgt = lextend(f, &alpha.target)?;
    let components = f
        .codomain()
        .objects()
        .map(|d| {
            src.representatives[d]
                .iter()
                .map(|r| tgt.class(d, r.object, r.arrow, alpha.apply(r.object, r.element)))
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: src.presheaf,
        target: tgt.presheaf,
        components,
    })
}

/// The counit `lext_f res_f Y -> Y`, `[(v, y)] ↦ Y(v)(y)`.
pub fn lext_counit(f: &FunctorMap, y: &Presheaf) -> Result<PresheafMap> {
    let ext = lextend(f, &restrict(f, y)?)?;
    let components = f
        .codomain()
        .objects()
        .map(|d| {
            ext.representatives[d]
                .iter()
                .map(|r| y.act(r.arrow, r.element))
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: ext.presheaf,
        target: y.clone(),
        components,
    })
}

/// `rext_f X`: elements at `d` are the natural families
/// `(x_v ∈ X(c))_{v: f(c) -> d}`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct RightExtension {
    pub presheaf: Presheaf,
    functor: FunctorMap,
    /// Per `d`, the slots `(c, v: f(c) -> d)`.
    slots: Vec<Vec<(Ob, Arr)>>,
    slot_index: Vec<HashMap<(Ob, Arr), usize>>,
    families: Vec<Vec<Vec<usize>>>,
    family_index: Vec<HashMap<Vec<usize>, usize>>,
}

impl RightExtension {
    /// Value of family `k` at `d` in the slot `(c, v)`.
    pub fn value(&self, d: Ob, k: usize, c: Ob, v: Arr) -> usize {
        self.families[d][k][self.slot_index[d][&(c, v)]]
    }

    pub fn family_at(&self, d: Ob, family: &[usize]) -> Option<usize> {
        self.family_index[d].get(family).copied()
    }

    pub fn slots(&self, d: Ob) -> &[(Ob, Arr)] {
        &self.slots[d]
    }

    pub fn family(&self, d: Ob, k: usize) -> &[usize] {
        &self.families[d][k]
    }

    /// The counit `res_f rext_f X -> X`, a family goes to its value at
    /// `id_{f(c)}`.
    pub fn counit(&self, x: &Presheaf) -> PresheafMap {
        let f = &self.functor;
        let dc = f.codomain();
        let components = x
            .base
            .objects()
            .map(|c| {
                let fc = f.object(c);
                (0..self.presheaf.size(fc))
                    .map(|k| self.value(fc, k, c, dc.identity(fc)))
                    .collect()
            })
            .collect();
        PresheafMap {
            source: restrict(f, &self.presheaf).expect("same functor"),
            target: x.clone(),
            components,
        }
    }
}

pub fn rextend(f: &FunctorMap, x: &Presheaf) -> Result<RightExtension> {
    check_on(f.domain(), x)?;
    let (cc, dc) = (f.domain().clone(), f.codomain().clone());
    let mut slots = Vec::new();
    let mut slot_index = Vec::new();
    let mut families = Vec::new();
    let mut family_index: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
    for d in dc.objects() {
        let here: Vec<(Ob, Arr)> = cc
            .objects()
            .flat_map(|c| dc.hom(f.object(c), d).iter().map(move |&v| (c, v)))
            .collect();
        let index: HashMap<(Ob, Arr), usize> = here.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let shape = Presheaf::hom_into(f, d);
        let mut fams = Vec::new();
        for_each_natural_map(&shape, x, &mut |comps| {
            fams.push(
                here.iter()
                    .map(|&(c, v)| comps[c][hom_position(&dc, v)])
                    .collect::<Vec<usize>>(),
            );
            true
        });
        fams.sort();
        family_index.push(fams.iter().enumerate().map(|(i, fam)| (fam.clone(), i)).collect());
        families.push(fams);
        slots.push(here);
        slot_index.push(index);
    }
    let sizes: Vec<usize> = families.iter().map(Vec::len).collect();
    // for w: d' -> d, the family at d' has value x_{w∘v'} in slot (c, v')
    let actions = dc
        .arrows()
        .map(|w| {
            let (d2, d) = (dc.source(w), dc.target(w));
            families[d]
                .iter()
                .map(|fam| {
                    let pulled: Vec<usize> = slots[d2]
                        .iter()
                        .map(|&(c, v)| fam[slot_index[d][&(c, dc.comp(w, v))]])
                        .collect();
                    family_index[d2][&pulled]
                })
                .collect()
        })
        .collect();
    Ok(RightExtension {
        presheaf: Presheaf {
            base: dc,
            sizes,
            actions,
        },
        functor: f.clone(),
        slots,
        slot_index,
        families,
        family_index,
    })
}

/// `rext_f α`: apply `α` slotwise.
pub fn rextend_map(f: &FunctorMap, alpha: &PresheafMap) -> Result<PresheafMap> {
    let src = rextend(f, &alpha.source)?;
    let tgt = rextend(f, &alpha.target)?;
    let components = f
        .codomain()
        .objects()
        .map(|d| {
            src.families[d]
                .iter()
                .map(|fam| {
                    let mapped: Vec<usize> = src.slots[d]
                        .iter()
                        .zip(fam)
                        .map(|(&(c, _), &e)| alpha.apply(c, e))
                        .collect();
                    tgt.family_index[d][&mapped]
                })
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: src.presheaf,
        target: tgt.presheaf,
        components,
    })
}

/// The unit `Y -> rext_f res_f Y`, `y ↦ (Y(v)(y))_v`.
pub fn rext_unit(f: &FunctorMap, y: &Presheaf) -> Result<PresheafMap> {
    let ext = rextend(f, &restrict(f, y)?)?;
    let components = f
        .codomain()
        .objects()
        .map(|d| {
            (0..y.size(d))
                .map(|e| {
                    let fam: Vec<usize> = ext.slots[d].iter().map(|&(_, v)| y.act(v, e)).collect();
                    ext.family_index[d][&fam]
                })
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: y.clone(),
        target: ext.presheaf,
        components,
    })
}

fn check_two_cell(phi: &NatTransMap, x: &Presheaf, on_codomain: bool) -> Result<()> {
    let side = if on_codomain {
        phi.source().codomain()
    } else {
        phi.source().domain()
    };
    check_on(side, x)
}

/// For `φ: f ⇒ g`, the map `res_g Y -> res_f Y` with components `Y(φ_c)`.
pub fn res_two_cell(phi: &NatTransMap, y: &Presheaf) -> Result<PresheafMap> {
    check_two_cell(phi, y, true)?;
    let (f, g) = (phi.source(), phi.target());
    Ok(PresheafMap {
        source: restrict(g, y)?,
        target: restrict(f, y)?,
        components: f
            .domain()
            .objects()
            .map(|c| y.action(phi.component(c)).to_vec())
            .collect(),
    })
}

/// For `φ: f ⇒ g`, the map `lext_f X -> lext_g X`, `[(v, x)] ↦ [(φ_c∘v, x)]`.
pub fn lext_two_cell(phi: &NatTransMap, x: &Presheaf) -> Result<PresheafMap> {
    check_two_cell(phi, x, false)?;
    let (f, g) = (phi.source(), phi.target());
    let dc = f.codomain();
    let src = lextend(f, x)?;
    let tgt = lextend(g, x)?;
    let components = dc
        .objects()
        .map(|d| {
            src.representatives[d]
                .iter()
                .map(|r| tgt.class(d, r.object, dc.comp(phi.component(r.object), r.arrow), r.element))
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: src.presheaf,
        target: tgt.presheaf,
        components,
    })
}

/// For `φ: f ⇒ g`, the map `rext_f X -> rext_g X`, sending a family `x` to
/// `(x_{w∘φ_c})_{w: g(c) -> d}`.
pub fn rext_two_cell(phi: &NatTransMap, x: &Presheaf) -> Result<PresheafMap> {
    check_two_cell(phi, x, false)?;
    let (f, g) = (phi.source(), phi.target());
    let dc = f.codomain();
    let src = rextend(f, x)?;
    let tgt = rextend(g, x)?;
    let components = dc
        .objects()
        .map(|d| {
            (0..src.presheaf.size(d))
                .map(|k| {
                    let fam: Vec<usize> = tgt.slots[d]
                        .iter()
                        .map(|&(c, w)| src.value(d, k, c, dc.comp(w, phi.component(c))))
                        .collect();
                    tgt.family_index[d][&fam]
                })
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: src.presheaf,
        target: tgt.presheaf,
        components,
    })
}

/// The comparison `lext_top res_left X -> res_right lext_bottom X` of a lax
/// square, `[(v: b -> top(a), x)] ↦ [(φ_a∘right(v), x)]`.
pub fn mate_flat(sq: &LaxSquare, x: &Presheaf) -> Result<PresheafMap> {
    let (f, g, k, h) = (&sq.top, &sq.left, &sq.right, &sq.bottom);
    let dc = k.codomain();
    let src = lextend(f, &restrict(g, x)?)?;
    let inner = lextend(h, x)?;
    let target = restrict(k, &inner.presheaf)?;
    let components = f
        .codomain()
        .objects()
        .map(|b| {
            src.representatives[b]
                .iter()
                .map(|r| {
                    let a = r.object;
                    let arrow = dc.comp(sq.filler.component(a), k.arrow(r.arrow));
                    inner.class(k.object(b), g.object(a), arrow, r.element)
                })
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source: src.presheaf,
        target,
        components,
    })
}

/// The comparison `res_bottom rext_right Y -> rext_left res_top Y` of a lax
/// square: a family `y` goes to `(y_{bottom(v)∘φ_a})_{v: left(a) -> c}`.
pub fn mate_sharp(sq: &LaxSquare, y: &Presheaf) -> Result<PresheafMap> {
    let (f, g, k, h) = (&sq.top, &sq.left, &sq.right, &sq.bottom);
    let dc = k.codomain();
    let inner = rextend(k, y)?;
    let source = restrict(h, &inner.presheaf)?;
    let tgt = rextend(g, &restrict(f, y)?)?;
    let components = g
        .codomain()
        .objects()
        .map(|c| {
            (0..source.size(c))
                .map(|kk| {
                    let fam: Vec<usize> = tgt.slots[c]
                        .iter()
                        .map(|&(a, v)| {
                            let w = dc.comp(h.arrow(v), sq.filler.component(a));
                            inner.value(h.object(c), kk, f.object(a), w)
                        })
                        .collect();
                    tgt.family_index[c][&fam]
                })
                .collect()
        })
        .collect();
    Ok(PresheafMap {
        source,
        target: tgt.presheaf,
        components,
    })
}

/// The canonical comparison `lext_g lext_f X -> lext_{g∘f} X`,
/// `[(w, [(v, x)])] ↦ [(g(v)∘w, x)]`.
pub fn lext_composite_comparison(f: &FunctorMap, g: &FunctorMap, x: &Presheaf) -> Result<PresheafMap> {
    let gf = g.after(f)?;
    let first = lextend(f, x)?;
    let twice = lextend(g, &first.presheaf)?;
    let once = lextend(&gf, x)?;
    let ec = g.codomain();
    let components = ec
        .objects()
        .map(|e| {
            twice.representatives[e]
                .iter()
                .map(|outer| {
                    let r = first.representative(outer.object, outer.element);
                    once.class(e, r.object, ec.comp(g.arrow(r.arrow), outer.arrow), r.element)
                })
                .collect()
        })
        .collect();
    PresheafMap::new(twice.presheaf, once.presheaf, components)
}

/// The canonical comparison `rext_g rext_f X -> rext_{g∘f} X`: the value
/// in slot `(c, z: gf(c) -> e)` is the inner family at `(f c, z)` read at
/// `(c, id_{f c})`.
pub fn rext_composite_comparison(f: &FunctorMap, g: &FunctorMap, x: &Presheaf) -> Result<PresheafMap> {
    let gf = g.after(f)?;
    let first = rextend(f, x)?;
    let twice = rextend(g, &first.presheaf)?;
    let once = rextend(&gf, x)?;
    let (dc, ec) = (f.codomain(), g.codomain());
    let components = ec
        .objects()
        .map(|e| {
            (0..twice.presheaf.size(e))
                .map(|k| {
                    let fam: Vec<usize> = once.slots[e]
                        .iter()
                        .map(|&(c, z)| {
                            let fc = f.object(c);
                            let inner = twice.value(e, k, fc, z);
                            first.value(fc, inner, c, dc.identity(fc))
                        })
                        .collect();
                    once.family_index[e][&fam]
                })
                .collect()
        })
        .collect();
    PresheafMap::new(twice.presheaf, once.presheaf, components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn arc(c: FinCategory) -> Arc<FinCategory> {
        Arc::new(c)
    }

    #[test]
    fn presheaf_axioms_are_checked() {
        let two = arc(fixtures::two());
        let f = two.arrow_by_name("f").unwrap();
        let mut actions = vec![vec![0, 1], vec![0], vec![0]];
        actions[f] = vec![0];
        // X(a) = 2 elements, X(b) = 1, f acts 0 -> 0
        let x = Presheaf::new(two.clone(), vec![2, 1], actions).unwrap();
        assert_eq!(x.act(f, 0), 0);
        assert!(Presheaf::new(two.clone(), vec![1, 1], vec![vec![0], vec![0], vec![1]]).is_err());
        let bad_identity = Presheaf::new(two, vec![2, 1], vec![vec![1, 0], vec![0], vec![0]]);
        assert!(bad_identity.is_err());
    }

    #[test]
    fn restriction_examples() {
        let two = arc(fixtures::two());
        let one = arc(fixtures::one());
        let y = Presheaf::representable(two.clone(), 1);
        assert_eq!(restrict(&FunctorMap::identity(two.clone()), &y).unwrap(), y);
        let bang = FunctorMap::to_terminal(two.clone(), one.clone());
        assert_eq!(
            restrict(&bang, &Presheaf::terminal(one)).unwrap(),
            Presheaf::terminal(two.clone())
        );
        let (_, inc_b) = two.full_subcategory(&[1]);
        let r = restrict(&inc_b, &y).unwrap();
        assert_eq!(r.sizes(), &[1]);
    }

    #[test]
    fn left_extension_examples() {
        let two = arc(fixtures::two());
        let one = arc(fixtures::one());
        let (sub_a, inc_a) = two.full_subcategory(&[0]);
        let ext = lextend(&inc_a, &Presheaf::terminal(sub_a)).unwrap();
        // oracle: Hom(d, a) × {·}
        assert_eq!(ext.presheaf.sizes(), &[1, 0]);
        let bang = FunctorMap::to_terminal(two.clone(), one);
        let ext = lextend(&bang, &Presheaf::representable(two.clone(), 0)).unwrap();
        assert_eq!(ext.presheaf.sizes(), &[1]);
        let x = Presheaf::representable(two.clone(), 1);
        let ext = lextend(&FunctorMap::identity(two), &x).unwrap();
        assert!(find_iso(&ext.presheaf, &x).is_some());
    }

    #[test]
    fn right_extension_examples() {
        let two = arc(fixtures::two());
        let (sub_a, inc_a) = two.full_subcategory(&[0]);
        let ext = rextend(&inc_a, &Presheaf::terminal(sub_a)).unwrap();
        assert_eq!(ext.presheaf.sizes(), &[1, 1]);
        let x = Presheaf::representable(two.clone(), 1);
        let ext = rextend(&FunctorMap::identity(two), &x).unwrap();
        assert!(find_iso(&ext.presheaf, &x).is_some());
    }

    #[test]
    fn natural_map_counts_match_brute_force() {
        let two = arc(fixtures::two());
        let ya = Presheaf::representable(two.clone(), 0);
        let yb = Presheaf::representable(two.clone(), 1);
        // Yoneda: Nat(y_c, X) ≅ X(c)
        assert_eq!(count_natural_maps(&ya, &yb), yb.size(0));
        assert_eq!(count_natural_maps(&yb, &ya), ya.size(1));
        assert_eq!(count_natural_maps(&yb, &yb), 1);
        let t = Presheaf::terminal(two.clone());
        assert_eq!(count_natural_maps(&t, &ya), 0);
        assert_eq!(count_natural_maps(&ya, &t), 1);
    }

    #[test]
    fn iso_detection() {
        let two = arc(fixtures::two());
        let two_points = Presheaf::constant(two.clone(), 2);
        let t = Presheaf::terminal(two.clone());
        let m = &natural_maps(&two_points, &t)[0];
        assert!(matches!(m.is_iso(), Outcome::Fail(IsoFailure::NotInjective { .. })));
        assert!(PresheafMap::identity(&t).is_iso().passed());
        assert!(find_iso(&two_points, &t).is_none());
    }

    #[test]
    fn identity_two_cell_acts_trivially() {
        let two = arc(fixtures::two());
        let id = FunctorMap::identity(two.clone());
        let phi = NatTransMap::identity(&id);
        let x = Presheaf::representable(two.clone(), 1);
        assert_eq!(res_two_cell(&phi, &x).unwrap(), PresheafMap::identity(&x));
        let l = lext_two_cell(&phi, &x).unwrap();
        assert!(l.is_iso().passed() && l.source() == l.target());
        assert_eq!(l, PresheafMap::identity(l.source()));
        let r = rext_two_cell(&phi, &x).unwrap();
        assert_eq!(r, PresheafMap::identity(r.source()));
    }

    #[test]
    fn point_functors_on_par() {
        // the unique 2-cell between the two constant functors Par -> Two
        let par = arc(fixtures::par());
        let two = arc(fixtures::two());
        let at_a = FunctorMap::constant(par.clone(), two.clone(), 0);
        let at_b = FunctorMap::constant(par.clone(), two.clone(), 1);
        let f = two.arrow_by_name("f").unwrap();
        let phi = NatTransMap::new(at_a, at_b, vec![f, f]).unwrap();
        let yb = Presheaf::representable(two.clone(), 1);
        let r = res_two_cell(&phi, &yb).unwrap();
        // y_b(f): Hom(b,b) -> Hom(a,b), id_b ↦ f
        for c in par.objects() {
            assert_eq!(r.component(c), &[0]);
        }
        assert_eq!(r.source().sizes(), &[1, 1]);
    }
}
