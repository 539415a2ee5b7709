use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use super::functor::same_category;
use super::{Arr, FinCategory, FunctorMap, NatTransMap, Ob};
use crate::{Error, Result};

/// The comma category `G↓f` of `G: B -> D` and `f: C -> D`, with its two
/// projections and the canonical transformation `λ: G∘π0 ⇒ f∘π1`.
#[derive(Debug, Clone)]
pub struct Comma {
    pub category: Arc<FinCategory>,
    /// `(b, c, u: G(b) -> f(c))` per object.
    pub objects: Vec<(Ob, Ob, Arr)>,
    /// `(β, γ)` per arrow.
    pub arrows: Vec<(Arr, Arr)>,
    pub pi0: FunctorMap,
    pub pi1: FunctorMap,
    pub lambda: NatTransMap,
    object_index: HashMap<(Ob, Ob, Arr), Ob>,
    arrow_index: HashMap<(Ob, Ob, Arr, Arr), Arr>,
}

impl Comma {
    pub fn object_of(&self, b: Ob, c: Ob, u: Arr) -> Option<Ob> {
        self.object_index.get(&(b, c, u)).copied()
    }

    /// The arrow `(β, γ)` between two given comma objects, if it is one.
    pub fn arrow_of(&self, src: Ob, tgt: Ob, beta: Arr, gamma: Arr) -> Option<Arr> {
        self.arrow_index.get(&(src, tgt, beta, gamma)).copied()
    }
}

pub fn comma(g: &FunctorMap, f: &FunctorMap) -> Result<Comma> {
    if !same_category(g.codomain(), f.codomain()) {
        return Err(Error::Mismatch("comma needs functors with a common codomain".into()));
    }
    let (bc, cc, dc) = (g.domain().clone(), f.domain().clone(), g.codomain().clone());
    let mut objects = Vec::new();
    for b in bc.objects() {
        for c in cc.objects() {
            for &u in dc.hom(g.object(b), f.object(c)) {
                objects.push((b, c, u));
            }
        }
    }
    let object_index: HashMap<_, _> = objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let mut arrows = Vec::new();
    let mut ends = Vec::new();
    let mut arrow_index = HashMap::new();
    for (s, &(b, c, u)) in objects.iter().enumerate() {
        for (t, &(b2, c2, u2)) in objects.iter().enumerate() {
            for &beta in bc.hom(b, b2) {
                for &gamma in cc.hom(c, c2) {
                    if dc.comp(f.arrow(gamma), u) == dc.comp(u2, g.arrow(beta)) {
                        arrow_index.insert((s, t, beta, gamma), arrows.len());
                        arrows.push((beta, gamma));
                        ends.push((s, t));
                    }
                }
            }
        }
    }
    let n = arrows.len();
    let mut table = vec![None; n * n];
    for (j, &(s, m)) in ends.iter().enumerate() {
        for (i, &(m2, t)) in ends.iter().enumerate() {
            if m != m2 {
                continue;
            }
            let beta = bc.comp(arrows[i].0, arrows[j].0);
            let gamma = cc.comp(arrows[i].1, arrows[j].1);
            table[i * n + j] = Some(arrow_index[&(s, t, beta, gamma)]);
        }
    }
    let ob_name = |&(b, c, u): &(Ob, Ob, Arr)| {
        format!("({},{},{})", bc.object_name(b), cc.object_name(c), dc.arrow_name(u))
    };
    let object_names: Vec<String> = objects.iter().map(ob_name).collect();
    let arrow_data = arrows
        .iter()
        .zip(&ends)
        .map(|(&(beta, gamma), &(s, t))| {
            (
                format!(
                    "({},{}):{}->{}",
                    bc.arrow_name(beta),
                    cc.arrow_name(gamma),
                    object_names[s],
                    object_names[t]
                ),
                s,
                t,
            )
        })
        .collect();
    let identities = objects
        .iter()
        .enumerate()
        .map(|(i, &(b, c, _))| arrow_index[&(i, i, bc.identity(b), cc.identity(c))])
        .collect();
    let category = Arc::new(FinCategory::from_table(object_names, arrow_data, identities, table)?);
    let pi0 = FunctorMap::new(
        category.clone(),
        bc.clone(),
        objects.iter().map(|o| o.0).collect(),
        arrows.iter().map(|a| a.0).collect(),
    )?;
    let pi1 = FunctorMap::new(
        category.clone(),
        cc.clone(),
        objects.iter().map(|o| o.1).collect(),
        arrows.iter().map(|a| a.1).collect(),
    )?;
    let lambda = NatTransMap::new(
        g.after(&pi0)?,
        f.after(&pi1)?,
        objects.iter().map(|o| o.2).collect(),
    )?;
    Ok(Comma {
        category,
        objects,
        arrows,
        pi0,
        pi1,
        lambda,
        object_index,
        arrow_index,
    })
}

/// What an arrow of a cocomma category is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocommaArrow {
    Left(Arr),
    Right(Arr),
    /// The class of `(1,w)∘λ_c∘(0,v)`, named by its first triple `(v, c, w)`
    /// in enumeration order.
    Connecting { v: Arr, c: Ob, w: Arr },
}

/// The cocomma category `f↑G` of `f: C -> B` and `G: C -> D`, with its two
/// injections and `λ: ι0∘f ⇒ ι1∘G`.
#[derive(Debug, Clone)]
pub struct Cocomma {
    pub category: Arc<FinCategory>,
    pub arrows: Vec<CocommaArrow>,
    pub iota0: FunctorMap,
    pub iota1: FunctorMap,
    pub lambda: NatTransMap,
    /// Class of every formal composite `(v, c, w)`.
    pub triple_class: HashMap<(Arr, Ob, Arr), Arr>,
    n_left_objects: usize,
}

impl Cocomma {
    /// The connecting arrow `(1,w)∘λ_c∘(0,v)`.
    pub fn connecting(&self, v: Arr, c: Ob, w: Arr) -> Option<Arr> {
        self.triple_class.get(&(v, c, w)).copied()
    }

    pub fn left_object(&self, b: Ob) -> Ob {
        b
    }

    pub fn right_object(&self, d: Ob) -> Ob {
        self.n_left_objects + d
    }
}

pub fn cocomma(f: &FunctorMap, g: &FunctorMap) -> Result<Cocomma> {
    if !same_category(f.domain(), g.domain()) {
        return Err(Error::Mismatch("cocomma needs functors with a common domain".into()));
    }
    let (cc, bc, dc) = (f.domain().clone(), f.codomain().clone(), g.codomain().clone());
    let nb = bc.n_objects();
    let mut triples = Vec::new();
    for c in cc.objects() {
        for &v in bc.arrows_into(f.object(c)) {
            for &w in dc.arrows_out_of(g.object(c)) {
                triples.push((v, c, w));
            }
        }
    }
    let index: HashMap<_, _> = triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut uf = UnionFind::<usize>::new(triples.len());
    // for u: c' -> c, (f(u)∘v, c, w) ~ (v, c', w∘G(u))
    for (i, &(fuv, c, w)) in triples.iter().enumerate() {
        for &u in cc.arrows_into(c) {
            let c2 = cc.source(u);
            let wu = dc.comp(w, g.arrow(u));
            for &v in bc.arrows_into(f.object(c2)) {
                if bc.source(v) == bc.source(fuv) && bc.comp(f.arrow(u), v) == fuv {
                    uf.union(i, index[&(v, c2, wu)]);
                }
            }
        }
    }
    // classes keyed by root, ordered by (b, d, least triple)
    let mut least: HashMap<usize, usize> = HashMap::new();
    for i in 0..triples.len() {
        let r = uf.find_mut(i);
        least.entry(r).or_insert(i);
    }
    let mut classes: Vec<(Ob, Ob, (Arr, Ob, Arr), usize)> = least
        .iter()
        .map(|(&r, &i)| {
            let t = triples[i];
            (bc.source(t.0), dc.target(t.2), t, r)
        })
        .collect();
    classes.sort();

    let mut arrows = Vec::new();
    let mut data = Vec::new();
    let ob_names: Vec<String> = bc
        .objects()
        .map(|b| format!("(0,{})", bc.object_name(b)))
        .chain(dc.objects().map(|d| format!("(1,{})", dc.object_name(d))))
        .collect();
    for a in bc.arrows() {
        arrows.push(CocommaArrow::Left(a));
        data.push((format!("(0,{})", bc.arrow_name(a)), bc.source(a), bc.target(a)));
    }
    for a in dc.arrows() {
        arrows.push(CocommaArrow::Right(a));
        data.push((format!("(1,{})", dc.arrow_name(a)), nb + dc.source(a), nb + dc.target(a)));
    }
    let mut root_arrow = HashMap::new();
    for &(b, d, (v, c, w), r) in &classes {
        root_arrow.insert(r, arrows.len());
        arrows.push(CocommaArrow::Connecting { v, c, w });
        data.push((
            format!(
                "[{},{},{}]",
                bc.arrow_name(v),
                cc.object_name(c),
                dc.arrow_name(w)
            ),
            b,
            nb + d,
        ));
    }
    let triple_class: HashMap<(Arr, Ob, Arr), Arr> = triples
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, root_arrow[&uf.find_mut(i)]))
        .collect();

    let n = arrows.len();
    let n_left = bc.n_arrows();
    let mut table = vec![None; n * n];
    for (i, &gi) in arrows.iter().enumerate() {
        for (j, &fj) in arrows.iter().enumerate() {
            let entry = match (gi, fj) {
                (CocommaArrow::Left(x), CocommaArrow::Left(y)) => bc.compose(x, y),
                (CocommaArrow::Right(x), CocommaArrow::Right(y)) => {
                    dc.compose(x, y).map(|z| n_left + z)
                }
                (CocommaArrow::Connecting { v, c, w }, CocommaArrow::Left(x)) => {
                    bc.compose(v, x).map(|vx| triple_class[&(vx, c, w)])
                }
                (CocommaArrow::Right(y), CocommaArrow::Connecting { v, c, w }) => {
                    dc.compose(y, w).map(|yw| triple_class[&(v, c, yw)])
                }
                _ => None,
            };
            table[i * n + j] = entry;
        }
    }
    let identities = bc
        .objects()
        .map(|b| bc.identity(b))
        .chain(dc.objects().map(|d| n_left + dc.identity(d)))
        .collect();
    let category = Arc::new(FinCategory::from_table(ob_names, data, identities, table)?);
    let iota0 = FunctorMap::new(
        bc.clone(),
        category.clone(),
        bc.objects().collect(),
        bc.arrows().collect(),
    )?;
    let iota1 = FunctorMap::new(
        dc.clone(),
        category.clone(),
        dc.objects().map(|d| nb + d).collect(),
        dc.arrows().map(|a| n_left + a).collect(),
    )?;
    let lambda = NatTransMap::new(
        iota0.after(f)?,
        iota1.after(g)?,
        cc.objects()
            .map(|c| triple_class[&(bc.identity(f.object(c)), c, dc.identity(g.object(c)))])
            .collect(),
    )?;
    Ok(Cocomma {
        category,
        arrows,
        iota0,
        iota1,
        lambda,
        triple_class,
        n_left_objects: nb,
    })
}
