//! Sieves, coverages and Grothendieck topologies on finite categories.
//!
//! A [`Coverage`] keeps the sieve families it was given, closed upward
//! under inclusion. A [`Site`] pairs a category with a topology that passes
//! every axiom; the only ways to get one are [`saturate`], the two extreme
//! topologies, or [`Site::from_topology`], which checks.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::fincat::{Arr, FinCategory, FunctorMap, Ob};
use crate::{Error, Outcome, Result};

/// A down-closed set of arrows into `base`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sieve {
    base: Ob,
    arrows: FixedBitSet,
}

/// Canonical order: base, then size, then the sorted arrow list.
impl Ord for Sieve {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then(self.len().cmp(&other.len()))
            .then_with(|| self.arrows.ones().cmp(other.arrows.ones()))
    }
}

impl PartialOrd for Sieve {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Sieve {
    /// Wraps an arrow set without checking closure; see [`Sieve::is_down_closed`].
    pub fn from_arrows(cat: &FinCategory, base: Ob, arrows: impl IntoIterator<Item = Arr>) -> Self {
        let mut set = FixedBitSet::with_capacity(cat.n_arrows());
        set.extend(arrows);
        Sieve { base, arrows: set }
    }

    pub fn empty(cat: &FinCategory, base: Ob) -> Self {
        Sieve::from_arrows(cat, base, [])
    }

    pub fn maximal(cat: &FinCategory, base: Ob) -> Self {
        Sieve::from_arrows(cat, base, cat.arrows_into(base).iter().copied())
    }

    pub fn base(&self) -> Ob {
        self.base
    }

    pub fn contains(&self, a: Arr) -> bool {
        self.arrows.contains(a)
    }

    pub fn arrows(&self) -> impl Iterator<Item = Arr> + '_ {
        self.arrows.ones()
    }

    pub fn len(&self) -> usize {
        self.arrows.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_clear()
    }

    pub fn is_maximal(&self, cat: &FinCategory) -> bool {
        self.contains(cat.identity(self.base))
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.base == other.base && self.arrows.is_subset(&other.arrows)
    }

    pub fn intersection(&self, other: &Sieve) -> Sieve {
        let mut arrows = self.arrows.clone();
        arrows.intersect_with(&other.arrows);
        Sieve {
            base: self.base,
            arrows,
        }
    }

    pub fn union(&self, other: &Sieve) -> Sieve {
        let mut arrows = self.arrows.clone();
        arrows.union_with(&other.arrows);
        Sieve {
            base: self.base,
            arrows,
        }
    }

    pub fn is_down_closed(&self, cat: &FinCategory) -> bool {
        self.arrows().all(|u| {
            cat.target(u) == self.base
                && cat
                    .arrows_into(cat.source(u))
                    .iter()
                    .all(|&v| self.contains(cat.comp(u, v)))
        })
    }

    /// Arrow names in canonical order.
    pub fn names(&self, cat: &FinCategory) -> Vec<String> {
        self.arrows().map(|a| cat.arrow_name(a).to_string()).collect()
    }
}

/// The least sieve on `c` containing `gens`.
pub fn generate_sieve(cat: &FinCategory, c: Ob, gens: &[Arr]) -> Result<Sieve> {
    if let Some(&g) = gens.iter().find(|&&g| cat.target(g) != c) {
        return Err(Error::Mismatch(format!(
            "{} does not end at {}",
            cat.arrow_name(g),
            cat.object_name(c)
        )));
    }
    Ok(Sieve::from_arrows(
        cat,
        c,
        gens.iter()
            .flat_map(|&g| cat.arrows_into(cat.source(g)).iter().map(move |&v| cat.comp(g, v))),
    ))
}

/// `u*S = {v | u∘v ∈ S}`. Since `S` is down-closed this is exactly the set
/// of `v` with `u∘v` factoring through a member of `S`.
pub fn pullback_sieve(cat: &FinCategory, u: Arr, s: &Sieve) -> Result<Sieve> {
    if cat.target(u) != s.base {
        return Err(Error::Mismatch(format!(
            "{} does not end at the sieve's base",
            cat.arrow_name(u)
        )));
    }
    let d = cat.source(u);
    Ok(Sieve::from_arrows(
        cat,
        d,
        cat.arrows_into(d)
            .iter()
            .copied()
            .filter(|&v| s.contains(cat.comp(u, v))),
    ))
}

/// The sieve on `f(c)` generated by the images of the arrows of `s`.
pub fn image_sieve(f: &FunctorMap, s: &Sieve) -> Sieve {
    let cod = f.codomain();
    let gens: Vec<Arr> = s.arrows().map(|u| f.arrow(u)).collect();
    generate_sieve(cod, f.object(s.base), &gens).expect("images end at f(c)")
}

/// `f⁻¹(R) = {u: c' -> c | f(u) ∈ R}` for a sieve `R` on `f(c)`.
pub fn preimage_sieve(f: &FunctorMap, r: &Sieve, c: Ob) -> Result<Sieve> {
    if f.object(c) != r.base {
        return Err(Error::Mismatch("sieve is not based at f(c)".into()));
    }
    let dom = f.domain();
    Ok(Sieve::from_arrows(
        dom,
        c,
        dom.arrows_into(c)
            .iter()
            .copied()
            .filter(|&u| r.contains(f.arrow(u))),
    ))
}

/// Every sieve on `c`, in canonical order.
pub fn all_sieves(cat: &FinCategory, c: Ob) -> Vec<Sieve> {
    let mut seen: HashSet<Sieve> = HashSet::new();
    seen.insert(Sieve::empty(cat, c));
    for &u in cat.arrows_into(c) {
        let principal = generate_sieve(cat, c, &[u]).expect("ends at c");
        let grown: Vec<Sieve> = seen.iter().map(|s| s.union(&principal)).collect();
        seen.extend(grown);
    }
    let mut out: Vec<Sieve> = seen.into_iter().collect();
    out.sort();
    out
}

/// Per-object sets of covering sieves, closed upward under inclusion.
#[derive(Debug, Clone)]
pub struct Coverage {
    category: Arc<FinCategory>,
    generators: Vec<BTreeSet<Sieve>>,
    covers: Vec<BTreeSet<Sieve>>,
}

impl PartialEq for Coverage {
    fn eq(&self, other: &Self) -> bool {
        *self.category == *other.category && self.covers == other.covers
    }
}

impl Eq for Coverage {}

impl Coverage {
    /// One generated sieve per arrow list: `(c, [[f, g], ...])` declares
    /// that the sieve generated by `{f, g}` covers `c`.
    pub fn from_generators(cat: &Arc<FinCategory>, gens: Vec<(Ob, Vec<Vec<Arr>>)>) -> Result<Self> {
        let mut sieves = vec![BTreeSet::new(); cat.n_objects()];
        for (c, lists) in gens {
            if c >= cat.n_objects() {
                return Err(Error::Mismatch(format!("object {c} out of range")));
            }
            for list in lists {
                sieves[c].insert(generate_sieve(cat, c, &list)?);
            }
        }
        Ok(Coverage::from_sieves(cat.clone(), sieves))
    }

    /// Takes the listed sieves as generators and closes them upward.
    pub fn from_sieves(category: Arc<FinCategory>, generators: Vec<BTreeSet<Sieve>>) -> Self {
        let covers = generators
            .iter()
            .enumerate()
            .map(|(c, gens)| {
                all_sieves(&category, c)
                    .into_iter()
                    .filter(|s| gens.iter().any(|g| g.is_subset(s)))
                    .collect()
            })
            .collect();
        Coverage {
            category,
            generators,
            covers,
        }
    }

    pub fn empty(category: Arc<FinCategory>) -> Self {
        let n = category.n_objects();
        Coverage::from_sieves(category, vec![BTreeSet::new(); n])
    }

    pub fn category(&self) -> &Arc<FinCategory> {
        &self.category
    }

    pub fn covers(&self, c: Ob) -> &BTreeSet<Sieve> {
        &self.covers[c]
    }

    pub fn generators(&self, c: Ob) -> &BTreeSet<Sieve> {
        &self.generators[c]
    }

    pub fn is_cover(&self, s: &Sieve) -> bool {
        self.covers[s.base].contains(s)
    }
}

/// The axioms a family of covers may be checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Maximality,
    UpClosure,
    Stability,
    Filteredness,
    WeakLocality,
    Locality,
    Transitivity,
    CoverageCondition,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Maximality,
        Axiom::UpClosure,
        Axiom::Stability,
        Axiom::Filteredness,
        Axiom::WeakLocality,
        Axiom::Locality,
        Axiom::Transitivity,
        Axiom::CoverageCondition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Maximality => "maximality",
            Axiom::UpClosure => "up-closure",
            Axiom::Stability => "stability",
            Axiom::Filteredness => "filteredness",
            Axiom::WeakLocality => "weak-locality",
            Axiom::Locality => "locality",
            Axiom::Transitivity => "transitivity",
            Axiom::CoverageCondition => "coverage-condition",
        }
    }

    pub fn from_name(name: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// The violating data for a failed axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomWitness {
    /// The maximal sieve on this object does not cover.
    Maximality { object: Ob },
    /// `cover` covers, `larger` contains it and does not.
    UpClosure { cover: Sieve, larger: Sieve },
    /// `cover` covers but its pullback along `arrow` does not.
    Stability { cover: Sieve, arrow: Arr },
    /// Both cover, their intersection does not.
    Filteredness { left: Sieve, right: Sieve },
    /// `sieve ⊆ cover` is locally covering along `cover` but does not cover.
    WeakLocality { cover: Sieve, sieve: Sieve },
    /// The localizing sieve of `sieve` covers, `sieve` does not.
    Locality { sieve: Sieve },
    /// A multicomposite along `cover` that does not cover.
    Transitivity { cover: Sieve, multicomposite: Sieve },
    /// No cover of the source of `arrow` lands inside `cover`.
    CoverageCondition { cover: Sieve, arrow: Arr },
}

fn covers_family(cat: &FinCategory, covers: &[BTreeSet<Sieve>], s: &Sieve) -> bool {
    debug_assert!(s.base < cat.n_objects());
    covers[s.base].contains(s)
}

/// `{v into c | v*S covers}`; may fail to be down-closed when the family is
/// not stable.
fn localizing(cat: &FinCategory, covers: &[BTreeSet<Sieve>], s: &Sieve) -> Sieve {
    Sieve::from_arrows(
        cat,
        s.base,
        cat.arrows_into(s.base).iter().copied().filter(|&v| {
            let pulled = pullback_sieve(cat, v, s).expect("ends at base");
            covers_family(cat, covers, &pulled)
        }),
    )
}

/// The sieve generated by `{u∘t | t ∈ T}` for a sieve `T` on the source of `u`.
fn push_along(cat: &FinCategory, u: Arr, t: &Sieve) -> Sieve {
    Sieve::from_arrows(cat, cat.target(u), t.arrows().map(|x| cat.comp(u, x)))
}

pub fn check_axiom(j: &Coverage, axiom: Axiom) -> Outcome<AxiomWitness> {
    check_family(&j.category, &j.covers, axiom)
}

pub(crate) fn check_family(
    cat: &FinCategory,
    covers: &[BTreeSet<Sieve>],
    axiom: Axiom,
) -> Outcome<AxiomWitness> {
    let sieves: Vec<Vec<Sieve>> = cat.objects().map(|c| all_sieves(cat, c)).collect();
    for c in cat.objects() {
        let here = &covers[c];
        let found = match axiom {
            Axiom::Maximality => (!here.contains(&Sieve::maximal(cat, c)))
                .then_some(AxiomWitness::Maximality { object: c }),
            Axiom::UpClosure => here.iter().find_map(|s| {
                sieves[c]
                    .iter()
                    .find(|t| s.is_subset(t) && !here.contains(*t))
                    .map(|t| AxiomWitness::UpClosure {
                        cover: s.clone(),
                        larger: t.clone(),
                    })
            }),
            Axiom::Stability => here.iter().find_map(|s| {
                cat.arrows_into(c).iter().find_map(|&u| {
                    let pulled = pullback_sieve(cat, u, s).unwrap();
                    (!covers_family(cat, covers, &pulled)).then(|| AxiomWitness::Stability {
                        cover: s.clone(),
                        arrow: u,
                    })
                })
            }),
            Axiom::Filteredness => here.iter().find_map(|s| {
                here.iter().find_map(|r| {
                    (!here.contains(&s.intersection(r))).then(|| AxiomWitness::Filteredness {
                        left: s.clone(),
                        right: r.clone(),
                    })
                })
            }),
            Axiom::WeakLocality => here.iter().find_map(|s| {
                sieves[c].iter().find_map(|t| {
                    let local = t.is_subset(s)
                        && s.arrows().all(|u| {
                            let pulled = pullback_sieve(cat, u, t).unwrap();
                            covers_family(cat, covers, &pulled)
                        });
                    (local && !here.contains(t)).then(|| AxiomWitness::WeakLocality {
                        cover: s.clone(),
                        sieve: t.clone(),
                    })
                })
            }),
            Axiom::Locality => sieves[c].iter().find_map(|s| {
                let loc = localizing(cat, covers, s);
                (here.contains(&loc) && !here.contains(s))
                    .then(|| AxiomWitness::Locality { sieve: s.clone() })
            }),
            Axiom::Transitivity => here.iter().find_map(|s| {
                // every union of one pushed-forward cover per arrow of s
                let mut reachable: BTreeSet<Sieve> = BTreeSet::from([Sieve::empty(cat, c)]);
                for u in s.arrows() {
                    let options: BTreeSet<Sieve> = covers[cat.source(u)]
                        .iter()
                        .map(|t| push_along(cat, u, t))
                        .collect();
                    reachable = reachable
                        .iter()
                        .flat_map(|r| options.iter().map(move |o| r.union(o)))
                        .collect();
                }
                reachable
                    .into_iter()
                    .find(|m| !here.contains(m))
                    .map(|m| AxiomWitness::Transitivity {
                        cover: s.clone(),
                        multicomposite: m,
                    })
            }),
            Axiom::CoverageCondition => here.iter().find_map(|s| {
                cat.arrows_into(c).iter().find_map(|&u| {
                    let pulled = pullback_sieve(cat, u, s).unwrap();
                    let ok = covers[cat.source(u)].iter().any(|r| r.is_subset(&pulled));
                    (!ok).then(|| AxiomWitness::CoverageCondition {
                        cover: s.clone(),
                        arrow: u,
                    })
                })
            }),
        };
        if let Some(w) = found {
            return Outcome::Fail(w);
        }
    }
    Outcome::Pass
}

/// A finite category with a Grothendieck topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    topology: Coverage,
}

impl Site {
    /// Only maximal sieves cover.
    pub fn trivial(cat: Arc<FinCategory>) -> Self {
        let sieves = cat
            .objects()
            .map(|c| BTreeSet::from([Sieve::maximal(&cat, c)]))
            .collect();
        Site {
            topology: Coverage::from_sieves(cat, sieves),
        }
    }

    /// Every sieve covers.
    pub fn total(cat: Arc<FinCategory>) -> Self {
        let sieves = cat
            .objects()
            .map(|c| BTreeSet::from([Sieve::empty(&cat, c)]))
            .collect();
        Site {
            topology: Coverage::from_sieves(cat, sieves),
        }
    }

    /// Accepts a coverage that already passes every axiom.
    pub fn from_topology(topology: Coverage) -> Result<Self> {
        for axiom in Axiom::ALL {
            if let Outcome::Fail(w) = check_axiom(&topology, axiom) {
                return Err(Error::Unsaturated(format!("{} fails: {w:?}", axiom.name())));
            }
        }
        Ok(Site { topology })
    }

    pub fn category(&self) -> &Arc<FinCategory> {
        &self.topology.category
    }

    pub fn topology(&self) -> &Coverage {
        &self.topology
    }

    pub fn covers(&self, c: Ob) -> &BTreeSet<Sieve> {
        self.topology.covers(c)
    }

    pub fn is_cover(&self, s: &Sieve) -> bool {
        self.topology.is_cover(s)
    }

    /// The intersection of all covers of `c`, itself a cover.
    pub fn least_cover(&self, c: Ob) -> Sieve {
        let cat = self.category();
        self.covers(c)
            .iter()
            .fold(Sieve::maximal(cat, c), |acc, s| acc.intersection(s))
    }
}

/// The least Grothendieck topology containing `j`.
///
/// The coverage condition is checked first, on `j` together with the maximal
/// sieves (which saturation adds anyway).
pub fn saturate(j: &Coverage) -> Result<Site> {
    let cat = j.category.clone();
    let sieves: Vec<Vec<Sieve>> = cat.objects().map(|c| all_sieves(&cat, c)).collect();
    let mut covers = j.covers.clone();
    for c in cat.objects() {
        covers[c].insert(Sieve::maximal(&cat, c));
    }
    if let Outcome::Fail(AxiomWitness::CoverageCondition { cover, arrow }) =
        check_family(&cat, &covers, Axiom::CoverageCondition)
    {
        return Err(Error::CoverageCondition {
            object: cover.base(),
            arrow,
        });
    }
    loop {
        let mut added: Vec<Sieve> = Vec::new();
        for c in cat.objects() {
            for s in &covers[c] {
                for t in &sieves[c] {
                    if s.is_subset(t) && !covers[c].contains(t) {
                        added.push(t.clone());
                    }
                }
                for &u in cat.arrows_into(c) {
                    let pulled = pullback_sieve(&cat, u, s).unwrap();
                    if !covers[pulled.base()].contains(&pulled) {
                        added.push(pulled);
                    }
                }
            }
            for r in &sieves[c] {
                if !covers[c].contains(r) && covers[c].contains(&localizing(&cat, &covers, r)) {
                    added.push(r.clone());
                }
            }
        }
        if added.is_empty() {
            break;
        }
        for s in added {
            covers[s.base()].insert(s);
        }
    }
    Ok(Site {
        topology: Coverage {
            category: cat,
            generators: j.generators.clone(),
            covers,
        },
    })
}

/// Every Grothendieck topology on `cat`, by brute force over all families of
/// sieves. Only sensible for very small categories.
pub fn all_topologies(cat: &Arc<FinCategory>) -> Vec<Site> {
    let sieves: Vec<Vec<Sieve>> = cat.objects().map(|c| all_sieves(cat, c)).collect();
    let mut out = Vec::new();
    let mut choice: Vec<BTreeSet<Sieve>> = vec![BTreeSet::new(); cat.n_objects()];
    fn rec(
        cat: &Arc<FinCategory>,
        sieves: &[Vec<Sieve>],
        c: usize,
        choice: &mut Vec<BTreeSet<Sieve>>,
        out: &mut Vec<Site>,
    ) {
        if c == sieves.len() {
            let cov = Coverage::from_sieves(cat.clone(), choice.clone());
            if cov.covers == *choice {
                if let Ok(site) = Site::from_topology(cov) {
                    out.push(site);
                }
            }
            return;
        }
        let n = sieves[c].len();
        for mask in 0u64..(1u64 << n) {
            let family: BTreeSet<Sieve> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| sieves[c][i].clone())
                .collect();
            if !family.contains(&Sieve::maximal(cat, c)) {
                continue;
            }
            choice[c] = family;
            rec(cat, sieves, c + 1, choice, out);
        }
    }
    rec(cat, &sieves, 0, &mut choice, &mut out);
    out
}
