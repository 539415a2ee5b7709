//! Finite categories held as explicit composition tables.
//!
//! Objects and arrows are dense integer ids. The table is indexed by
//! `(g, f)` and holds `g∘f`, defined exactly when `target(f) = source(g)`.
//! Construction does not insist on the category laws: [`validate_category`]
//! reports violations as data, and everything downstream assumes a table
//! that validates.

mod comma;
mod functor;

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

pub use comma::{cocomma, comma, Cocomma, CocommaArrow, Comma};
pub use functor::{FunctorMap, NatTransMap};
pub(crate) use functor::same_category;

use crate::{Error, Outcome, Result};

pub type Ob = usize;
pub type Arr = usize;

#[derive(Debug, Clone)]
pub struct FinCategory {
    object_names: Vec<String>,
    arrow_names: Vec<String>,
    source: Vec<Ob>,
    target: Vec<Ob>,
    identities: Vec<Arr>,
    table: Vec<Option<Arr>>,
    homs: Vec<Vec<Arr>>,
    into: Vec<Vec<Arr>>,
    out_of: Vec<Vec<Arr>>,
}

/// Structural equality: names are labels and do not take part.
impl PartialEq for FinCategory {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.identities == other.identities
            && self.table == other.table
    }
}

impl Eq for FinCategory {}

impl FinCategory {
    /// Raw constructor. Only index ranges and the identity endpoints are
    /// checked here; the category laws are left to [`validate_category`].
    pub fn from_table(
        object_names: Vec<String>,
        arrows: Vec<(String, Ob, Ob)>,
        identities: Vec<Arr>,
        table: Vec<Option<Arr>>,
    ) -> Result<Self> {
        let n_ob = object_names.len();
        let n_arr = arrows.len();
        if identities.len() != n_ob {
            return Err(Error::Build(format!(
                "{} identities for {} objects",
                identities.len(),
                n_ob
            )));
        }
        if table.len() != n_arr * n_arr {
            return Err(Error::Build(format!(
                "composition table has {} entries, expected {}",
                table.len(),
                n_arr * n_arr
            )));
        }
        let mut arrow_names = Vec::with_capacity(n_arr);
        let mut source = Vec::with_capacity(n_arr);
        let mut target = Vec::with_capacity(n_arr);
        for (name, s, t) in arrows {
            if s >= n_ob || t >= n_ob {
                return Err(Error::Build(format!("arrow {name} has an unknown endpoint")));
            }
            arrow_names.push(name);
            source.push(s);
            target.push(t);
        }
        for (x, &i) in identities.iter().enumerate() {
            if i >= n_arr || source[i] != x || target[i] != x {
                return Err(Error::Build(format!(
                    "identity of object {} is not an endo-arrow on it",
                    object_names[x]
                )));
            }
        }
        if let Some(bad) = table.iter().flatten().find(|&&h| h >= n_arr) {
            return Err(Error::Build(format!("composite {bad} is out of range")));
        }
        let mut homs = vec![Vec::new(); n_ob * n_ob];
        let mut into = vec![Vec::new(); n_ob];
        let mut out_of = vec![Vec::new(); n_ob];
        for a in 0..n_arr {
            homs[source[a] * n_ob + target[a]].push(a);
            into[target[a]].push(a);
            out_of[source[a]].push(a);
        }
        Ok(FinCategory {
            object_names,
            arrow_names,
            source,
            target,
            identities,
            table,
            homs,
            into,
            out_of,
        })
    }

    /// The terminal category, one object `*`.
    pub fn terminal() -> Self {
        FinCategory::discrete(&["*"])
    }

    pub fn discrete(names: &[&str]) -> Self {
        let mut b = CategoryBuilder::new();
        for n in names {
            b = b.object(n);
        }
        b.build().expect("discrete category")
    }

    /// A thin category on `names` where `leq(x, y)` says there is an arrow
    /// `x -> y`. The relation must be reflexive and transitive.
    pub fn from_preorder(names: &[&str], leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = names.len();
        for x in 0..n {
            if !leq(x, x) {
                return Err(Error::Build(format!("{} is not related to itself", names[x])));
            }
            for y in 0..n {
                for z in 0..n {
                    if leq(x, y) && leq(y, z) && !leq(x, z) {
                        return Err(Error::Build("relation is not transitive".into()));
                    }
                }
            }
        }
        let mut b = CategoryBuilder::new();
        for name in names {
            b = b.object(name);
        }
        let arrow_name = |x: usize, y: usize| format!("{}_to_{}", names[x], names[y]);
        for x in 0..n {
            for y in 0..n {
                if x != y && leq(x, y) {
                    b = b.arrow(&arrow_name(x, y), names[x], names[y]);
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x != y && y != z && x != z && leq(x, y) && leq(y, z) {
                        b = b.compose(&arrow_name(y, z), &arrow_name(x, y), &arrow_name(x, z));
                    }
                }
            }
        }
        b.build()
    }

    /// The free category on a finite acyclic graph. Arrows are paths; the
    /// path `f` then `g` is named `g.f`.
    pub fn free_on_acyclic(objects: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self> {
        let index: HashMap<&str, usize> = objects.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut edge_ends = Vec::new();
        for &(name, s, t) in edges {
            let s = *index
                .get(s)
                .ok_or_else(|| Error::Build(format!("unknown object {s}")))?;
            let t = *index
                .get(t)
                .ok_or_else(|| Error::Build(format!("unknown object {t}")))?;
            edge_ends.push((name, s, t));
        }
        // paths as edge sequences, listed in first-edge-first order
        let mut paths: Vec<Vec<usize>> = edge_ends.iter().enumerate().map(|(i, _)| vec![i]).collect();
        let mut frontier = paths.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for p in &frontier {
                let end = edge_ends[*p.last().unwrap()].2;
                for (i, e) in edge_ends.iter().enumerate() {
                    if e.1 == end {
                        let mut q = p.clone();
                        q.push(i);
                        if q.len() > edges.len() {
                            return Err(Error::Build("graph has a cycle".into()));
                        }
                        next.push(q);
                    }
                }
            }
            paths.extend(next.iter().cloned());
            frontier = next;
        }
        let path_name = |p: &Vec<usize>| {
            p.iter()
                .rev()
                .map(|&i| edge_ends[i].0)
                .collect::<Vec<_>>()
                .join(".")
        };
        let mut b = CategoryBuilder::new();
        for o in objects {
            b = b.object(o);
        }
        for p in &paths {
            let s = edge_ends[p[0]].1;
            let t = edge_ends[*p.last().unwrap()].2;
            b = b.arrow(&path_name(p), objects[s], objects[t]);
        }
        for p in &paths {
            for q in &paths {
                if edge_ends[*p.last().unwrap()].2 == edge_ends[q[0]].1 {
                    let mut pq = p.clone();
                    pq.extend(q);
                    b = b.compose(&path_name(q), &path_name(p), &path_name(&pq));
                }
            }
        }
        b.build()
    }

    pub fn n_objects(&self) -> usize {
        self.object_names.len()
    }

    pub fn n_arrows(&self) -> usize {
        self.arrow_names.len()
    }

    pub fn objects(&self) -> std::ops::Range<Ob> {
        0..self.n_objects()
    }

    pub fn arrows(&self) -> std::ops::Range<Arr> {
        0..self.n_arrows()
    }

    pub fn source(&self, a: Arr) -> Ob {
        self.source[a]
    }

    pub fn target(&self, a: Arr) -> Ob {
        self.target[a]
    }

    pub fn identity(&self, x: Ob) -> Arr {
        self.identities[x]
    }

    pub fn is_identity(&self, a: Arr) -> bool {
        self.identities[self.source[a]] == a
    }

    /// `g∘f`, if the pair is composable and the table has an entry.
    pub fn compose(&self, g: Arr, f: Arr) -> Option<Arr> {
        if self.target[f] != self.source[g] {
            return None;
        }
        self.table[g * self.n_arrows() + f]
    }

    /// `g∘f` for a pair known to be composable in a validated category.
    pub fn comp(&self, g: Arr, f: Arr) -> Arr {
        self.compose(g, f).unwrap_or_else(|| {
            panic!(
                "{} and {} do not compose",
                self.arrow_names[g], self.arrow_names[f]
            )
        })
    }

    /// Raw table entry, composable or not.
    pub fn table_entry(&self, g: Arr, f: Arr) -> Option<Arr> {
        self.table[g * self.n_arrows() + f]
    }

    pub fn hom(&self, x: Ob, y: Ob) -> &[Arr] {
        &self.homs[x * self.n_objects() + y]
    }

    pub fn arrows_into(&self, c: Ob) -> &[Arr] {
        &self.into[c]
    }

    pub fn arrows_out_of(&self, c: Ob) -> &[Arr] {
        &self.out_of[c]
    }

    pub fn object_name(&self, x: Ob) -> &str {
        &self.object_names[x]
    }

    pub fn arrow_name(&self, a: Arr) -> &str {
        &self.arrow_names[a]
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn object_by_name(&self, name: &str) -> Option<Ob> {
        self.object_names.iter().position(|n| n == name)
    }

    pub fn arrow_by_name(&self, name: &str) -> Option<Arr> {
        self.arrow_names.iter().position(|n| n == name)
    }

    /// A copy with one table entry replaced; used to build broken fixtures.
    pub fn with_table_entry(&self, g: Arr, f: Arr, h: Option<Arr>) -> Self {
        let mut c = self.clone();
        let n = c.n_arrows();
        c.table[g * n + f] = h;
        c
    }

    /// The full subcategory on `objects` (in the given order) with its
    /// inclusion functor.
    pub fn full_subcategory(self: &Arc<Self>, objects: &[Ob]) -> (Arc<FinCategory>, FunctorMap) {
        let mut arrows = Vec::new();
        let mut back = HashMap::new();
        for &x in objects {
            for &y in objects {
                for &a in self.hom(x, y) {
                    back.insert(a, arrows.len());
                    arrows.push(a);
                }
            }
        }
        let pos = |x: Ob| objects.iter().position(|&o| o == x).unwrap();
        let n = arrows.len();
        let mut table = vec![None; n * n];
        for (i, &g) in arrows.iter().enumerate() {
            for (j, &f) in arrows.iter().enumerate() {
                if let Some(h) = self.compose(g, f) {
                    table[i * n + j] = Some(back[&h]);
                }
            }
        }
        let sub = FinCategory::from_table(
            objects.iter().map(|&x| self.object_names[x].clone()).collect(),
            arrows
                .iter()
                .map(|&a| (self.arrow_names[a].clone(), pos(self.source[a]), pos(self.target[a])))
                .collect(),
            objects.iter().map(|&x| back[&self.identities[x]]).collect(),
            table,
        )
        .expect("full subcategory");
        let sub = Arc::new(sub);
        let inc = FunctorMap::new(sub.clone(), self.clone(), objects.to_vec(), arrows)
            .expect("inclusion is a functor");
        (sub, inc)
    }
}

/// Builds a [`FinCategory`] by name. Identities are implicit (named
/// `id_<object>`) and so are their composites; every other composite must be
/// listed.
#[derive(Debug, Clone, Default)]
pub struct CategoryBuilder {
    objects: Vec<String>,
    arrows: Vec<(String, String, String)>,
    composites: Vec<(String, String, String)>,
}

impl CategoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(mut self, name: &str) -> Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn arrow(mut self, name: &str, src: &str, tgt: &str) -> Self {
        self.arrows.push((name.to_string(), src.to_string(), tgt.to_string()));
        self
    }

    /// Declares `g∘f = h`.
    pub fn compose(mut self, g: &str, f: &str, h: &str) -> Self {
        self.composites.push((g.to_string(), f.to_string(), h.to_string()));
        self
    }

    pub fn build(self) -> Result<FinCategory> {
        let mut ob_index = HashMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            if ob_index.insert(o.clone(), i).is_some() {
                return Err(Error::Build(format!("duplicate object {o}")));
            }
        }
        let mut arrows: Vec<(String, Ob, Ob)> = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (format!("id_{o}"), i, i))
            .collect();
        for (name, s, t) in &self.arrows {
            let s = *ob_index
                .get(s)
                .ok_or_else(|| Error::Build(format!("arrow {name}: unknown object {s}")))?;
            let t = *ob_index
                .get(t)
                .ok_or_else(|| Error::Build(format!("arrow {name}: unknown object {t}")))?;
            arrows.push((name.clone(), s, t));
        }
        let mut ar_index = HashMap::new();
        for (i, (name, _, _)) in arrows.iter().enumerate() {
            if ar_index.insert(name.clone(), i).is_some() {
                return Err(Error::Build(format!("duplicate arrow {name}")));
            }
        }
        let n = arrows.len();
        let mut table = vec![None; n * n];
        for a in 0..n {
            let (_, s, t) = arrows[a];
            table[t * n + a] = Some(a);
            table[a * n + s] = Some(a);
        }
        for (g, f, h) in &self.composites {
            let look = |name: &String| {
                ar_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::Build(format!("compose: unknown arrow {name}")))
            };
            let (gi, fi, hi) = (look(g)?, look(f)?, look(h)?);
            table[gi * n + fi] = Some(hi);
        }
        let identities = (0..self.objects.len()).collect();
        FinCategory::from_table(self.objects, arrows, identities, table)
    }
}

/// One violated category law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `id_{tgt f}∘f ≠ f`.
    LeftIdentity { arrow: Arr },
    /// `f∘id_{src f} ≠ f`.
    RightIdentity { arrow: Arr },
    /// A composable pair without an entry.
    MissingComposite { g: Arr, f: Arr },
    /// An entry for a non-composable pair.
    SpuriousComposite { g: Arr, f: Arr },
    /// `g∘f` has the wrong source or target.
    WrongEndpoints { g: Arr, f: Arr },
    /// `h∘(g∘f) ≠ (h∘g)∘f`.
    Associativity { h: Arr, g: Arr, f: Arr },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated identity, totality and associativity instance.
/// Pairs involving an identity are judged by the identity laws alone, and
/// associativity is only checked on triples of non-identity arrows whose
/// composites are well formed.
pub fn validate_category(c: &FinCategory) -> ValidationReport {
    let mut violations = Vec::new();
    let n = c.n_arrows();
    for a in c.arrows() {
        let (s, t) = (c.source(a), c.target(a));
        if c.table_entry(c.identity(t), a) != Some(a) {
            violations.push(Violation::LeftIdentity { arrow: a });
        }
        if c.table_entry(a, c.identity(s)) != Some(a) {
            violations.push(Violation::RightIdentity { arrow: a });
        }
    }
    for g in 0..n {
        for f in 0..n {
            if c.is_identity(g) || c.is_identity(f) {
                continue;
            }
            let composable = c.target(f) == c.source(g);
            match (composable, c.table_entry(g, f)) {
                (true, None) => violations.push(Violation::MissingComposite { g, f }),
                (false, Some(_)) => violations.push(Violation::SpuriousComposite { g, f }),
                (true, Some(h)) if c.source(h) != c.source(f) || c.target(h) != c.target(g) => {
                    violations.push(Violation::WrongEndpoints { g, f })
                }
                _ => {}
            }
        }
    }
    let well_formed = |g: Arr, f: Arr| -> Option<Arr> {
        let h = c.compose(g, f)?;
        (c.source(h) == c.source(f) && c.target(h) == c.target(g)).then_some(h)
    };
    for f in 0..n {
        for g in 0..n {
            let Some(gf) = well_formed(g, f) else { continue };
            for h in 0..n {
                if c.is_identity(f) || c.is_identity(g) || c.is_identity(h) {
                    continue;
                }
                let Some(hg) = well_formed(h, g) else { continue };
                if well_formed(h, gf) != well_formed(hg, f) {
                    violations.push(Violation::Associativity { h, g, f });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Partition of the objects under "there is an arrow between". Blocks are
/// sorted, and listed by their smallest object.
pub fn connected_components(c: &FinCategory) -> Vec<Vec<Ob>> {
    let mut uf = UnionFind::<usize>::new(c.n_objects());
    for a in c.arrows() {
        uf.union(c.source(a), c.target(a));
    }
    group_by_root(c.n_objects(), |x| uf.find_mut(x))
}

pub(crate) fn group_by_root(n: usize, mut root: impl FnMut(usize) -> usize) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for x in 0..n {
        let r = root(x);
        let i = *slot.entry(r).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[i].push(x);
    }
    blocks
}

/// Why a functor is not final: the object `y` of the codomain and the
/// connected components of `y↓F`, each listed as pairs `(x, v: y -> F x)`.
/// An empty list means `y↓F` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalityWitness {
    pub object: Ob,
    pub components: Vec<Vec<(Ob, Arr)>>,
}

/// `F` is final when every `y↓F` is nonempty and connected.
pub fn is_final(functor: &FunctorMap) -> Outcome<FinalityWitness> {
    let cod = functor.codomain();
    let one = Arc::new(FinCategory::terminal());
    for y in cod.objects() {
        let at_y = FunctorMap::constant(one.clone(), cod.clone(), y);
        let under = comma(&at_y, functor).expect("shared codomain");
        let blocks = connected_components(&under.category);
        if blocks.len() != 1 {
            let components = blocks
                .into_iter()
                .map(|b| {
                    b.into_iter()
                        .map(|o| (under.objects[o].1, under.objects[o].2))
                        .collect()
                })
                .collect();
            return Outcome::Fail(FinalityWitness {
                object: y,
                components,
            });
        }
    }
    Outcome::Pass
}

/// Every hom-set map `Hom(x, y) -> Hom(Fx, Fy)` is a bijection.
pub fn is_fully_faithful(functor: &FunctorMap) -> bool {
    let (dom, cod) = (functor.domain(), functor.codomain());
    for x in dom.objects() {
        for y in dom.objects() {
            let hom = dom.hom(x, y);
            let image_hom = cod.hom(functor.object(x), functor.object(y));
            if hom.len() != image_hom.len() {
                return false;
            }
            let mut images: Vec<Arr> = hom.iter().map(|&a| functor.arrow(a)).collect();
            images.sort_unstable();
            images.dedup();
            if images.len() != hom.len() {
                return false;
            }
        }
    }
    true
}
