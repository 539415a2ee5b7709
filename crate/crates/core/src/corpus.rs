//! The standard corpus: the fixture categories, every small category up to
//! isomorphism, every functor and natural transformation between them, every
//! topology on them and small presheaves.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::exactness::LaxSquare;
use crate::fincat::{Arr, FinCategory, FunctorMap, NatTransMap};
use crate::fixtures;
use crate::presheaf::Presheaf;
use crate::site::{all_topologies, Site};
use crate::{Error, Result};

/// `One`, `Two`, `Par`, `Span`, `Tri` and the discrete pair.
pub fn categories() -> Vec<(&'static str, Arc<FinCategory>)> {
    vec![
        ("One", Arc::new(fixtures::one())),
        ("Two", Arc::new(fixtures::two())),
        ("Par", Arc::new(fixtures::par())),
        ("Span", Arc::new(fixtures::span())),
        ("Tri", Arc::new(fixtures::tri())),
        ("Discrete2", Arc::new(fixtures::discrete_pair())),
    ]
}

/// The corpus categories with at most two objects.
pub fn small_categories() -> Vec<(&'static str, Arc<FinCategory>)> {
    categories().into_iter().filter(|(_, c)| c.n_objects() <= 2).collect()
}

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Every functor `c -> d`.
pub fn functors(c: &Arc<FinCategory>, d: &Arc<FinCategory>) -> Vec<FunctorMap> {
    let mut out = Vec::new();
    let object_choices: Vec<Vec<usize>> = c.objects().map(|_| d.objects().collect()).collect();
    for objects in product(&object_choices) {
        let arrow_choices: Vec<Vec<Arr>> = c
            .arrows()
            .map(|u| {
                if c.is_identity(u) {
                    vec![d.identity(objects[c.source(u)])]
                } else {
                    d.hom(objects[c.source(u)], objects[c.target(u)]).to_vec()
                }
            })
            .collect();
        for arrows in product(&arrow_choices) {
            if let Ok(f) = FunctorMap::new(c.clone(), d.clone(), objects.clone(), arrows) {
                out.push(f);
            }
        }
    }
    out
}

/// Every natural transformation `f ⇒ g`.
pub fn transformations(f: &FunctorMap, g: &FunctorMap) -> Vec<NatTransMap> {
    let c = f.domain();
    let d = f.codomain();
    let choices: Vec<Vec<Arr>> = c.objects().map(|x| d.hom(f.object(x), g.object(x)).to_vec()).collect();
    product(&choices)
        .into_iter()
        .filter_map(|comps| NatTransMap::new(f.clone(), g.clone(), comps).ok())
        .collect()
}

/// Every Grothendieck topology on `c`.
pub fn sites(c: &Arc<FinCategory>) -> Vec<Site> {
    all_topologies(c)
}

/// Every presheaf on `c` whose sets have at most `max_size` elements.
pub fn presheaves(c: &Arc<FinCategory>, max_size: usize) -> Vec<Presheaf> {
    let size_choices: Vec<Vec<usize>> = c.objects().map(|_| (0..=max_size).collect()).collect();
    let mut out = Vec::new();
    for sizes in product(&size_choices) {
        let action_choices: Vec<Vec<Vec<usize>>> = c
            .arrows()
            .map(|u| {
                let (a, b) = (c.source(u), c.target(u));
                if c.is_identity(u) {
                    vec![(0..sizes[a]).collect()]
                } else {
                    let maps: Vec<Vec<usize>> = (0..sizes[b]).map(|_| (0..sizes[a]).collect()).collect();
                    product(&maps)
                }
            })
            .collect();
        for actions in product(&action_choices) {
            if let Ok(x) = Presheaf::new(c.clone(), sizes.clone(), actions) {
                out.push(x);
            }
        }
    }
    out
}

/// Every lax square with the given corners.
pub fn squares(
    top_left: &Arc<FinCategory>,
    top_right: &Arc<FinCategory>,
    bottom_left: &Arc<FinCategory>,
    bottom_right: &Arc<FinCategory>,
) -> Vec<LaxSquare> {
    let mut out = Vec::new();
    let tops = functors(top_left, top_right);
    let lefts = functors(top_left, bottom_left);
    let rights = functors(top_right, bottom_right);
    let bottoms = functors(bottom_left, bottom_right);
    for top in &tops {
        for right in &rights {
            let across_top = right.after(top).expect("composable");
            for left in &lefts {
                for bottom in &bottoms {
                    let across_bottom = bottom.after(left).expect("composable");
                    for filler in transformations(&across_top, &across_bottom) {
                        if let Ok(sq) = LaxSquare::new(top.clone(), left.clone(), right.clone(), bottom.clone(), filler) {
                            out.push(sq);
                        }
                    }
                }
            }
        }
    }
    out
}

// Arrows of a raw table are identities `0..n` followed by the others,
// sorted by (source, target).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct RawCategory {
    n_objects: usize,
    ends: Vec<(usize, usize)>,
    table: Vec<Option<usize>>,
}

impl RawCategory {
    fn n_arrows(&self) -> usize {
        self.ends.len()
    }

    fn comp(&self, g: usize, f: usize) -> Option<usize> {
        self.table[g * self.n_arrows() + f]
    }

    fn is_associative(&self) -> bool {
        let n = self.n_arrows();
        for f in 0..n {
            for g in 0..n {
                let Some(gf) = self.comp(g, f) else { continue };
                for h in 0..n {
                    if let Some(hg) = self.comp(h, g) {
                        if self.comp(h, gf) != self.comp(hg, f) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn relabel(&self, objects: &[usize], arrows: &[usize]) -> RawCategory {
        let n = self.n_arrows();
        let mut ends = vec![(0, 0); n];
        let mut table = vec![None; n * n];
        for a in 0..n {
            let (s, t) = self.ends[a];
            ends[arrows[a]] = (objects[s], objects[t]);
        }
        for g in 0..n {
            for f in 0..n {
                table[arrows[g] * n + arrows[f]] = self.comp(g, f).map(|h| arrows[h]);
            }
        }
        RawCategory {
            n_objects: self.n_objects,
            ends,
            table,
        }
    }

    /// The least relabeling that keeps identities first and the other
    /// arrows sorted by their ends.
    fn canonical(&self) -> RawCategory {
        let n_ob = self.n_objects;
        let mut best: Option<RawCategory> = None;
        for sigma in permutations(n_ob) {
            let mut order: Vec<usize> = (n_ob..self.n_arrows()).collect();
            order.sort_by_key(|&a| {
                let (s, t) = self.ends[a];
                (sigma[s], sigma[t])
            });
            let mut bins: Vec<Vec<usize>> = Vec::new();
            for &a in &order {
                let (s, t) = self.ends[a];
                match bins.last() {
                    Some(bin) if {
                        let (s0, t0) = self.ends[bin[0]];
                        (sigma[s0], sigma[t0]) == (sigma[s], sigma[t])
                    } => bins.last_mut().unwrap().push(a),
                    _ => bins.push(vec![a]),
                }
            }
            let choices: Vec<Vec<Vec<usize>>> = bins
                .iter()
                .map(|bin| {
                    permutations(bin.len())
                        .into_iter()
                        .map(|p| p.into_iter().map(|i| bin[i]).collect())
                        .collect()
                })
                .collect();
            for pick in product(&choices) {
                let mut arrows = vec![0; self.n_arrows()];
                for x in 0..n_ob {
                    arrows[x] = sigma[x];
                }
                let mut next = n_ob;
                for bin in pick {
                    for a in bin {
                        arrows[a] = next;
                        next += 1;
                    }
                }
                let candidate = self.relabel(&sigma, &arrows);
                if best.as_ref().is_none_or(|b| candidate < *b) {
                    best = Some(candidate);
                }
            }
        }
        best.expect("at least one relabeling")
    }

    fn build(&self) -> FinCategory {
        let letters = ["a", "b", "c", "d"];
        let object_names: Vec<String> = (0..self.n_objects)
            .map(|x| letters.get(x).map_or(format!("x{x}"), |l| l.to_string()))
            .collect();
        let arrows = self
            .ends
            .iter()
            .enumerate()
            .map(|(a, &(s, t))| {
                let name = if a < self.n_objects {
                    format!("id_{}", object_names[a])
                } else {
                    format!("u{}", a - self.n_objects)
                };
                (name, s, t)
            })
            .collect();
        FinCategory::from_table(object_names, arrows, (0..self.n_objects).collect(), self.table.clone())
            .expect("raw tables are in range")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

// Ways to put `k` arrows into `bins` ordered hom-sets.
fn distributions(k: usize, bins: usize) -> Vec<Vec<usize>> {
    if bins == 0 {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in distributions(k - first, bins - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every category with at most `max_objects` objects and `max_arrows`
/// arrows (identities included), one per isomorphism class, in a fixed
/// order. Objects are named `a, b, ...` and other arrows `u0, u1, ...`.
pub fn enumerate_categories(max_objects: usize, max_arrows: usize) -> Vec<FinCategory> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 1..=max_objects {
        if n > max_arrows {
            break;
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).collect();
        for k in 0..=max_arrows - n {
            for counts in distributions(k, pairs.len()) {
                let mut ends: Vec<(usize, usize)> = (0..n).map(|x| (x, x)).collect();
                for (i, &c) in counts.iter().enumerate() {
                    ends.extend(std::iter::repeat_n(pairs[i], c));
                }
                for raw in tables(n, &ends) {
                    let key = raw.canonical();
                    if seen.insert(key.clone()) {
                        out.push(key);
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| (x.n_objects, x.n_arrows()).cmp(&(y.n_objects, y.n_arrows())).then(x.cmp(y)));
    out.iter().map(RawCategory::build).collect()
}

fn tables(n: usize, ends: &[(usize, usize)]) -> Vec<RawCategory> {
    let m = ends.len();
    let mut base = vec![None; m * m];
    let mut free = Vec::new();
    for g in 0..m {
        for f in 0..m {
            if ends[f].1 != ends[g].0 {
                continue;
            }
            if g < n {
                base[g * m + f] = Some(f);
            } else if f < n {
                base[g * m + f] = Some(g);
            } else {
                let (s, t) = (ends[f].0, ends[g].1);
                let options: Vec<usize> = (0..m).filter(|&h| ends[h] == (s, t)).collect();
                free.push((g * m + f, options));
            }
        }
    }
    let choices: Vec<Vec<usize>> = free.iter().map(|(_, o)| o.clone()).collect();
    if choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    product(&choices)
        .into_iter()
        .filter_map(|pick| {
            let mut table = base.clone();
            for ((slot, _), h) in free.iter().zip(pick) {
                table[*slot] = Some(h);
            }
            let raw = RawCategory {
                n_objects: n,
                ends: ends.to_vec(),
                table,
            };
            raw.is_associative().then_some(raw)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusBounds {
    pub max_objects: usize,
    pub max_arrows: usize,
    pub max_topologies: usize,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub category: Arc<FinCategory>,
    pub sites: Vec<Site>,
}

/// The categories within the bounds with all of their topologies; a
/// category with more topologies than allowed is reported, not cut.
pub fn generate(bounds: CorpusBounds) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (i, c) in enumerate_categories(bounds.max_objects, bounds.max_arrows).into_iter().enumerate() {
        let category = Arc::new(c);
        let sites = all_topologies(&category);
        if sites.len() > bounds.max_topologies {
            return Err(Error::BoundExceeded {
                what: format!("topologies on corpus category {i}"),
                bound: bounds.max_topologies,
                found: sites.len(),
            });
        }
        out.push(CorpusEntry {
            name: format!("C{i}"),
            category,
            sites,
        });
    }
    Ok(out)
}
