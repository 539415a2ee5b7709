//! The cofree-site comonad `𝕊`: objects of `𝕊C` are pairs `(c, F)` with `F`
//! an up-closed set of sieves on `c` containing the maximal sieve, and an
//! arrow `u: (c,F) -> (c',F')` is an arrow `u: c -> c'` with `u*R ∈ F` for
//! every `R ∈ F'`.
//!
//! Filters are enumerated lazily per object under a bound. Sieves on `𝕊C`
//! are computed extensionally inside the materialized category; objects of
//! `𝕊𝕊C` and `𝕊𝕊𝕊C` are only ever built one at a time.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::fincat::{Arr, FinCategory, FunctorMap, Ob};
use crate::site::{all_sieves, check_axiom, check_family, image_sieve, preimage_sieve, pullback_sieve, Axiom, Coverage, Sieve, Site};
use crate::sitemaps::{cover_lifting_on, cover_preserving_on};
use crate::{Error, Result};

pub const DEFAULT_MAX_FILTERS: usize = 64;
const MAX_SIEVES: usize = 4096;

/// An up-closed set of sieves on one object, containing the maximal sieve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SieveFilter {
    base: Ob,
    sieves: BTreeSet<Sieve>,
}

impl SieveFilter {
    pub fn new(cat: &FinCategory, base: Ob, sieves: BTreeSet<Sieve>) -> Result<Self> {
        if sieves.iter().any(|s| s.base() != base) {
            return Err(Error::Mismatch("sieve on the wrong object".into()));
        }
        if !sieves.contains(&Sieve::maximal(cat, base)) {
            return Err(Error::Precondition("filter does not contain the maximal sieve".into()));
        }
        for s in all_sieves(cat, base) {
            if !sieves.contains(&s) && sieves.iter().any(|r| r.is_subset(&s)) {
                return Err(Error::Precondition(format!(
                    "filter is not up-closed: misses {:?}",
                    s.names(cat)
                )));
            }
        }
        Ok(SieveFilter { base, sieves })
    }

    /// The up-closure of `gens` together with the maximal sieve.
    pub fn generated(cat: &FinCategory, base: Ob, gens: impl IntoIterator<Item = Sieve>) -> Self {
        let mut gens: Vec<Sieve> = gens.into_iter().collect();
        gens.push(Sieve::maximal(cat, base));
        let sieves = all_sieves(cat, base)
            .into_iter()
            .filter(|s| gens.iter().any(|g| g.is_subset(s)))
            .collect();
        SieveFilter { base, sieves }
    }

    /// `{max}`, the least filter.
    pub fn top_only(cat: &FinCategory, base: Ob) -> Self {
        Self::generated(cat, base, [])
    }

    /// Every sieve on the object.
    pub fn everything(cat: &FinCategory, base: Ob) -> Self {
        SieveFilter {
            base,
            sieves: all_sieves(cat, base).into_iter().collect(),
        }
    }

    pub fn base(&self) -> Ob {
        self.base
    }

    pub fn sieves(&self) -> &BTreeSet<Sieve> {
        &self.sieves
    }

    pub fn contains(&self, s: &Sieve) -> bool {
        self.sieves.contains(s)
    }

    pub fn len(&self) -> usize {
        self.sieves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sieves.is_empty()
    }

    pub fn is_subset(&self, other: &SieveFilter) -> bool {
        self.sieves.is_subset(&other.sieves)
    }

    /// Whether the filter is also closed under binary intersection.
    pub fn is_intersection_closed(&self) -> bool {
        self.sieves
            .iter()
            .all(|r| self.sieves.iter().all(|s| self.sieves.contains(&r.intersection(s))))
    }
}

/// `u: base(F) -> base(F')` is an arrow `(c,F) -> (c',F')` of `𝕊C`.
pub fn cofree_hom(cat: &FinCategory, u: Arr, from: &SieveFilter, to: &SieveFilter) -> Result<bool> {
    if cat.source(u) != from.base || cat.target(u) != to.base {
        return Err(Error::Mismatch("arrow does not run between the filters' objects".into()));
    }
    for r in &to.sieves {
        if !from.contains(&pullback_sieve(cat, u, r)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `↑u*[F]`, the filter generated by pullbacks of members of `F`.
pub fn pullback_filter(cat: &FinCategory, u: Arr, filter: &SieveFilter) -> Result<SieveFilter> {
    let pulled = filter
        .sieves
        .iter()
        .map(|r| pullback_sieve(cat, u, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(SieveFilter::generated(cat, cat.source(u), pulled))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Up-closed and containing the maximal sieve.
    UpSets,
    /// Additionally closed under intersection.
    Intersections,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CofreeConfig {
    pub max_filters: usize,
    pub mode: FilterMode,
}

impl Default for CofreeConfig {
    fn default() -> Self {
        CofreeConfig {
            max_filters: DEFAULT_MAX_FILTERS,
            mode: FilterMode::UpSets,
        }
    }
}

/// Every filter on `c`, in a fixed order, or a bound report.
pub fn enumerate_filters(cat: &FinCategory, c: Ob, config: CofreeConfig) -> Result<Vec<SieveFilter>> {
    let sieves = all_sieves(cat, c);
    if sieves.len() > MAX_SIEVES {
        return Err(Error::BoundExceeded {
            what: format!("sieves on {}", cat.object_name(c)),
            bound: MAX_SIEVES,
            found: sieves.len(),
        });
    }
    let mut order: Vec<usize> = (0..sieves.len()).collect();
    order.sort_by(|&x, &y| sieves[y].len().cmp(&sieves[x].len()).then(x.cmp(&y)));
    let mut out = Vec::new();
    let mut chosen = vec![false; sieves.len()];
    let mut overflow = false;
    upsets(&sieves, &order, 0, &mut chosen, &mut out, config.max_filters, &mut overflow);
    if overflow {
        return Err(Error::BoundExceeded {
            what: format!("filters on {}", cat.object_name(c)),
            bound: config.max_filters,
            found: config.max_filters + 1,
        });
    }
    let mut filters: Vec<SieveFilter> = out
        .into_iter()
        .map(|set| SieveFilter { base: c, sieves: set })
        .collect();
    if config.mode == FilterMode::Intersections {
        filters.retain(SieveFilter::is_intersection_closed);
    }
    filters.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
    Ok(filters)
}

// Sieves are visited from largest to smallest, so every proper superset of
// a sieve has been decided before it.
fn upsets(
    sieves: &[Sieve],
    order: &[usize],
    at: usize,
    chosen: &mut Vec<bool>,
    out: &mut Vec<BTreeSet<Sieve>>,
    bound: usize,
    overflow: &mut bool,
) {
    if *overflow {
        return;
    }
    if at == order.len() {
        if out.len() == bound {
            *overflow = true;
            return;
        }
        out.push(
            (0..sieves.len())
                .filter(|&i| chosen[i])
                .map(|i| sieves[i].clone())
                .collect(),
        );
        return;
    }
    let i = order[at];
    let supersets_in = (0..sieves.len())
        .filter(|&j| j != i && sieves[i].is_subset(&sieves[j]))
        .all(|j| chosen[j]);
    if supersets_in {
        chosen[i] = true;
        upsets(sieves, order, at + 1, chosen, out, bound, overflow);
        chosen[i] = false;
    }
    // the maximal sieve is always in
    if at > 0 {
        upsets(sieves, order, at + 1, chosen, out, bound, overflow);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CofreeObject {
    pub object: Ob,
    pub filter: SieveFilter,
}

/// `𝕊C` built out as a finite category.
#[derive(Debug, Clone)]
pub struct CofreeCategory {
    pub base: Arc<FinCategory>,
    pub category: Arc<FinCategory>,
    pub objects: Vec<CofreeObject>,
    /// The arrow of the base underlying each arrow.
    pub underlying: Vec<Arr>,
    pub projection: FunctorMap,
    index: HashMap<CofreeObject, Ob>,
    arrow_index: HashMap<(Ob, Ob, Arr), Arr>,
}

impl CofreeCategory {
    pub fn object_index(&self, x: &CofreeObject) -> Option<Ob> {
        self.index.get(x).copied()
    }

    pub fn find(&self, object: Ob, filter: &SieveFilter) -> Option<Ob> {
        self.object_index(&CofreeObject {
            object,
            filter: filter.clone(),
        })
    }

    /// The arrow `x -> y` over `u`, if `u` passes the hom test.
    pub fn arrow_over(&self, x: Ob, y: Ob, u: Arr) -> Option<Arr> {
        self.arrow_index.get(&(x, y, u)).copied()
    }

    pub fn filter(&self, x: Ob) -> &SieveFilter {
        &self.objects[x].filter
    }
}

/// The lazy cofree site over a base category: filters are enumerated per
/// object on first use and memoized.
#[derive(Debug)]
pub struct CofreeSite {
    base: Arc<FinCategory>,
    config: CofreeConfig,
    filters: Vec<OnceLock<Result<Arc<Vec<SieveFilter>>>>>,
    materialized: Mutex<Option<Arc<CofreeCategory>>>,
}

impl CofreeSite {
    pub fn new(base: Arc<FinCategory>, config: CofreeConfig) -> Self {
        let n = base.n_objects();
        CofreeSite {
            base,
            config,
            filters: (0..n).map(|_| OnceLock::new()).collect(),
            materialized: Mutex::new(None),
        }
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn filters_at(&self, c: Ob) -> Result<Arc<Vec<SieveFilter>>> {
        self.filters[c]
            .get_or_init(|| enumerate_filters(&self.base, c, self.config).map(Arc::new))
            .clone()
    }

    pub fn hom(&self, u: Arr, from: &SieveFilter, to: &SieveFilter) -> Result<bool> {
        cofree_hom(&self.base, u, from, to)
    }

    pub fn materialize(&self) -> Result<Arc<CofreeCategory>> {
        let mut slot = self.materialized.lock().expect("memo lock");
        if let Some(m) = slot.as_ref() {
            return Ok(m.clone());
        }
        let m = Arc::new(self.build()?);
        *slot = Some(m.clone());
        Ok(m)
    }

    fn build(&self) -> Result<CofreeCategory> {
        let base = &self.base;
        let mut objects = Vec::new();
        for c in base.objects() {
            for filter in self.filters_at(c)?.iter() {
                objects.push(CofreeObject {
                    object: c,
                    filter: filter.clone(),
                });
            }
        }
        let index: HashMap<CofreeObject, Ob> = objects.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let names: Vec<String> = objects
            .iter()
            .map(|x| {
                let k = self.filters_at(x.object).expect("enumerated above").iter().position(|f| *f == x.filter).unwrap();
                format!("({},{})", base.object_name(x.object), k)
            })
            .collect();
        let mut arrows: Vec<(String, Ob, Ob)> = Vec::new();
        let mut underlying = Vec::new();
        let mut arrow_index = HashMap::new();
        for (i, x) in objects.iter().enumerate() {
            arrows.push((format!("id_{}", names[i]), i, i));
            underlying.push(base.identity(x.object));
            arrow_index.insert((i, i, base.identity(x.object)), i);
        }
        for (i, x) in objects.iter().enumerate() {
            for (j, y) in objects.iter().enumerate() {
                for &u in base.hom(x.object, y.object) {
                    if i == j && base.is_identity(u) {
                        continue;
                    }
                    if cofree_hom(base, u, &x.filter, &y.filter)? {
                        arrow_index.insert((i, j, u), arrows.len());
                        arrows.push((format!("{}:{}->{}", base.arrow_name(u), names[i], names[j]), i, j));
                        underlying.push(u);
                    }
                }
            }
        }
        let n = arrows.len();
        let mut table = vec![None; n * n];
        for g in 0..n {
            for f in 0..n {
                let (_, fs, ft) = arrows[f];
                let (_, gs, gt) = arrows[g];
                if ft == gs {
                    let u = base.comp(underlying[g], underlying[f]);
                    table[g * n + f] = Some(
                        *arrow_index
                            .get(&(fs, gt, u))
                            .ok_or_else(|| Error::Build("cofree arrows are not closed under composition".into()))?,
                    );
                }
            }
        }
        let identities = (0..objects.len()).collect();
        let category = Arc::new(FinCategory::from_table(names, arrows, identities, table)?);
        let projection = FunctorMap::new(
            category.clone(),
            base.clone(),
            objects.iter().map(|x| x.object).collect(),
            underlying.clone(),
        )?;
        Ok(CofreeCategory {
            base: base.clone(),
            category,
            objects,
            underlying,
            projection,
            index,
            arrow_index,
        })
    }
}

/// `𝕊C` as an explicit category under the default bound.
pub fn enumerate_cofree(base: &Arc<FinCategory>) -> Result<Arc<CofreeCategory>> {
    CofreeSite::new(base.clone(), CofreeConfig::default()).materialize()
}

/// `lext_f[F]`: the up-closure of the images of members of `F`.
pub fn lext_filter(f: &FunctorMap, filter: &SieveFilter) -> SieveFilter {
    SieveFilter::generated(
        f.codomain(),
        f.object(filter.base),
        filter.sieves.iter().map(|s| image_sieve(f, s)),
    )
}

/// `{R | preimage_sieve(f, R) ∈ F}`, which agrees with [`lext_filter`].
pub fn lext_filter_by_restriction(f: &FunctorMap, filter: &SieveFilter) -> Result<SieveFilter> {
    let d = f.object(filter.base);
    let mut sieves = BTreeSet::new();
    for r in all_sieves(f.codomain(), d) {
        if filter.contains(&preimage_sieve(f, &r, filter.base)?) {
            sieves.insert(r);
        }
    }
    Ok(SieveFilter { base: d, sieves })
}

/// `𝕊f`, sending `(c,F)` to `(f c, lext_f[F])` and an arrow over `u` to the
/// arrow over `f(u)`.
pub fn apply_s(f: &FunctorMap, source: &CofreeCategory, target: &CofreeCategory) -> Result<FunctorMap> {
    let objects: Vec<Ob> = source
        .objects
        .iter()
        .map(|x| {
            target
                .find(f.object(x.object), &lext_filter(f, &x.filter))
                .ok_or_else(|| Error::Mismatch("image filter missing from the target".into()))
        })
        .collect::<Result<_>>()?;
    let sc = &source.category;
    let arrows: Vec<Arr> = sc
        .arrows()
        .map(|a| {
            target
                .arrow_over(objects[sc.source(a)], objects[sc.target(a)], f.arrow(source.underlying[a]))
                .ok_or_else(|| Error::NotAFunctor("image arrow fails the hom test".into()))
        })
        .collect::<Result<_>>()?;
    FunctorMap::new(sc.clone(), target.category.clone(), objects, arrows)
}

/// `π_D∘𝕊f = f∘π_C` on the nose.
pub fn counit_square_commutes(f: &FunctorMap, source: &CofreeCategory, target: &CofreeCategory) -> Result<bool> {
    let sf = apply_s(f, source, target)?;
    Ok(target.projection.after(&sf)? == f.after(&source.projection)?)
}

/// `R_{(S,F)}` on the object `x = (c,F)`: the arrows `v: (d,G) -> (c,F)`
/// that factor through a stabilization `u: (b, u*[F]) -> (c,F)`, `u ∈ S`.
/// Any such `v` lies over `S`, and `u = v` gives the converse, so this is
/// the set of arrows over `S`.
pub fn stabilizing_sieve(m: &CofreeCategory, x: Ob, s: &Sieve) -> Sieve {
    Sieve::from_arrows(
        &m.category,
        x,
        m.category
            .arrows_into(x)
            .iter()
            .copied()
            .filter(|&v| s.contains(m.underlying[v])),
    )
}

/// The membership test of `R_{(S,F)}` read off its defining factorization.
pub fn stabilizing_member(m: &CofreeCategory, x: Ob, s: &Sieve, v: Arr) -> Result<bool> {
    let base = &m.base;
    let cat = &m.category;
    if cat.target(v) != x {
        return Ok(false);
    }
    let from = m.filter(cat.source(v));
    let under = m.underlying[v];
    for u in s.arrows() {
        let stab = pullback_filter(base, u, m.filter(x))?;
        for &w in base.hom(from.base, base.source(u)) {
            if base.comp(u, w) == under && cofree_hom(base, w, from, &stab)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn sieves_on(cat: &FinCategory, x: Ob) -> Result<Vec<Sieve>> {
    let all = all_sieves(cat, x);
    if all.len() > MAX_SIEVES {
        return Err(Error::BoundExceeded {
            what: format!("sieves on {}", cat.object_name(x)),
            bound: MAX_SIEVES,
            found: all.len(),
        });
    }
    Ok(all)
}

/// `𝓕_{(c,F)}`, the filter of stabilizations on `x = (c,F)` in `𝕊C`.
pub fn delta(m: &CofreeCategory, x: Ob) -> Result<SieveFilter> {
    sieves_on(&m.category, x)?;
    let gens: Vec<Sieve> = m.filter(x).sieves.iter().map(|s| stabilizing_sieve(m, x, s)).collect();
    Ok(SieveFilter::generated(&m.category, x, gens))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaVariant {
    Standard,
    /// Keeps only the stabilizing sieves themselves, without up-closure.
    DropUpClosure,
}

fn delta_raw(m: &CofreeCategory, x: Ob, variant: DeltaVariant) -> Result<BTreeSet<Sieve>> {
    Ok(match variant {
        DeltaVariant::Standard => delta(m, x)?.sieves,
        DeltaVariant::DropUpClosure => m.filter(x).sieves.iter().map(|s| stabilizing_sieve(m, x, s)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComonadLaw {
    /// `π_{𝕊C}∘δ = 1`
    ProjectionAfterDelta,
    /// `𝕊π_C∘δ = 1`
    ImageOfProjectionAfterDelta,
    /// `δ_{𝕊C}∘δ = 𝕊δ∘δ`
    Coassociativity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawFailure {
    pub object: Ob,
    pub law: ComonadLaw,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComonadReport {
    pub objects_checked: usize,
    pub failures: Vec<LawFailure>,
}

impl ComonadReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the comonad laws pointwise on the sampled objects of `𝕊C` (all of
/// them when `sample` is `None`).
pub fn check_comonad_laws(
    m: &CofreeCategory,
    sample: Option<&[Ob]>,
    variant: DeltaVariant,
) -> Result<ComonadReport> {
    let all: Vec<Ob> = m.category.objects().collect();
    let sample = sample.unwrap_or(&all);
    let mut report = ComonadReport::default();
    let mut memo = HashMap::new();
    for &x in sample {
        if x >= m.objects.len() {
            return Err(Error::Mismatch(format!("object {x} is not in the cofree site")));
        }
        report.objects_checked += 1;
        let raw = delta_raw(m, x, variant)?;
        // the underlying object of δ(c,F) is (c,F) by construction
        let filter = match SieveFilter::new(&m.category, x, raw) {
            Ok(f) => f,
            Err(e) => {
                report.failures.push(LawFailure {
                    object: x,
                    law: ComonadLaw::ImageOfProjectionAfterDelta,
                    reason: format!("δ(c,F) is not an object of 𝕊𝕊C: {e}"),
                });
                continue;
            }
        };
        let image = lext_filter(&m.projection, &filter);
        if image != *m.filter(x) {
            report.failures.push(LawFailure {
                object: x,
                law: ComonadLaw::ImageOfProjectionAfterDelta,
                reason: "lext_π[δ(c,F)] differs from F".into(),
            });
        }
        if variant == DeltaVariant::Standard && !coassociative_at(m, x, &mut memo)? {
            report.failures.push(LawFailure {
                object: x,
                law: ComonadLaw::Coassociativity,
                reason: "δ_{𝕊C}δ and 𝕊δ δ generate different filters".into(),
            });
        }
    }
    Ok(report)
}

fn memo_delta<'a>(m: &CofreeCategory, x: Ob, memo: &'a mut HashMap<Ob, SieveFilter>) -> Result<&'a SieveFilter> {
    if !memo.contains_key(&x) {
        memo.insert(x, delta(m, x)?);
    }
    Ok(&memo[&x])
}

/// Compares the two filters on `Y = δ(x)` in `𝕊𝕊C`:
/// `A = ↑{R_{(𝓢,𝓕)}}` and `B = ↑{⟨δ(v) | v ∈ 𝓡⟩}` over `𝓢, 𝓡 ∈ 𝓕 = 𝓕_x`.
///
/// `⟨δ𝓡⟩ ⊆ R_𝓢` iff `𝓡 ⊆ 𝓢`, so `A ≤ B` always. For `R_𝓢 ⊆ ⟨δ𝓡⟩` every
/// `w ∈ 𝓢` must factor as `δ(v)∘x'` from each source `(X', 𝓖)` with `w`
/// valid; validity and factorization are monotone in `𝓖`, so the least
/// such `𝓖 = ↑w*[𝓕]` decides it.
fn coassociative_at(m: &CofreeCategory, x: Ob, memo: &mut HashMap<Ob, SieveFilter>) -> Result<bool> {
    let fx = memo_delta(m, x, memo)?.clone();
    let members: Vec<&Sieve> = fx.sieves.iter().collect();
    for r in &members {
        let mut found = false;
        for s in &members {
            if contained_in_delta_image(m, &fx, s, r, memo)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

fn contained_in_delta_image(
    m: &CofreeCategory,
    fx: &SieveFilter,
    s: &Sieve,
    r: &Sieve,
    memo: &mut HashMap<Ob, SieveFilter>,
) -> Result<bool> {
    let cat = m.category.clone();
    for w in s.arrows() {
        let least = pullback_filter(&cat, w, fx)?;
        let mut factors = false;
        'outer: for v in r.arrows() {
            for &xa in cat.hom(cat.source(w), cat.source(v)) {
                if cat.comp(v, xa) != w {
                    continue;
                }
                let target = memo_delta(m, cat.source(v), memo)?.clone();
                if cofree_hom(&cat, xa, &least, &target)? {
                    factors = true;
                    break 'outer;
                }
            }
        }
        if !factors {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A site structure read as a section `C -> 𝕊C` of the projection.
#[derive(Debug, Clone)]
pub struct CoalgebraStructure {
    pub filters: Vec<SieveFilter>,
    pub section: FunctorMap,
}

/// The section picking the given filters, when it is a functor.
pub fn section_from_filters(m: &CofreeCategory, filters: &[SieveFilter]) -> Result<FunctorMap> {
    let base = &m.base;
    if filters.len() != base.n_objects() || filters.iter().enumerate().any(|(c, f)| f.base != c) {
        return Err(Error::Shape("one filter per object is needed".into()));
    }
    let objects: Vec<Ob> = filters
        .iter()
        .map(|f| {
            m.find(f.base, f)
                .ok_or_else(|| Error::Mismatch("filter missing from the cofree site".into()))
        })
        .collect::<Result<_>>()?;
    let arrows: Vec<Arr> = base
        .arrows()
        .map(|u| {
            m.arrow_over(objects[base.source(u)], objects[base.target(u)], u)
                .ok_or_else(|| Error::NotAFunctor(format!("{} fails the hom test", base.arrow_name(u))))
        })
        .collect::<Result<_>>()?;
    FunctorMap::new(base.clone(), m.category.clone(), objects, arrows)
}

pub fn coverage_to_coalgebra(j: &Coverage, m: &CofreeCategory) -> Result<CoalgebraStructure> {
    let cat = j.category();
    let filters = cat
        .objects()
        .map(|c| SieveFilter::new(cat, c, j.covers(c).clone()))
        .collect::<Result<Vec<_>>>()?;
    let section = section_from_filters(m, &filters)?;
    Ok(CoalgebraStructure { filters, section })
}

pub fn coalgebra_to_coverage(gamma: &CoalgebraStructure, m: &CofreeCategory) -> Result<Coverage> {
    let id = FunctorMap::identity(m.base.clone());
    if m.projection.after(&gamma.section)? != id {
        return Err(Error::Precondition("not a section of the projection".into()));
    }
    let covers = m
        .base
        .objects()
        .map(|c| m.filter(gamma.section.object(c)).sieves.clone())
        .collect();
    Ok(Coverage::from_sieves(m.base.clone(), covers))
}

/// Whether the per-object filters form a functor into `𝕊C`, next to
/// whether they satisfy the stability axiom. The two always agree.
pub fn functoriality_vs_stability(m: &CofreeCategory, filters: &[SieveFilter]) -> (bool, bool) {
    let functor = section_from_filters(m, filters).is_ok();
    let family: Vec<BTreeSet<Sieve>> = filters.iter().map(|f| f.sieves.clone()).collect();
    let stable = check_family(&m.base, &family, Axiom::Stability).passed();
    (functor, stable)
}

/// Sections of the projection counted against stable filter families, by
/// two enumerations over every choice of one filter per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalgebraCensus {
    pub sections: usize,
    pub coverages: usize,
    /// `coverage_to_coalgebra` hits every section exactly once and
    /// `coalgebra_to_coverage` undoes it.
    pub bijection: bool,
}

pub fn coalgebra_census(m: &CofreeCategory) -> Result<CoalgebraCensus> {
    let base = &m.base;
    let per_object: Vec<Vec<&SieveFilter>> = base
        .objects()
        .map(|c| m.objects.iter().filter(|o| o.object == c).map(|o| &o.filter).collect())
        .collect();
    let mut sections = BTreeSet::new();
    let mut coverages = Vec::new();
    let mut choice = vec![0usize; per_object.len()];
    'outer: loop {
        if per_object.iter().any(|v| v.is_empty()) {
            break;
        }
        let filters: Vec<SieveFilter> = choice.iter().enumerate().map(|(c, &i)| per_object[c][i].clone()).collect();
        if let Ok(section) = section_from_filters(m, &filters) {
            sections.insert(section.object_map().to_vec());
        }
        let family = Coverage::from_sieves(base.clone(), filters.iter().map(|f| f.sieves.clone()).collect());
        if check_axiom(&family, Axiom::Stability).passed() {
            coverages.push(family);
        }
        for c in 0..choice.len() {
            choice[c] += 1;
            if choice[c] < per_object[c].len() {
                continue 'outer;
            }
            choice[c] = 0;
        }
        break;
    }
    let mut hit = BTreeSet::new();
    let mut bijection = true;
    for j in &coverages {
        let gamma = coverage_to_coalgebra(j, m)?;
        bijection &= coalgebra_to_coverage(&gamma, m)? == *j;
        bijection &= hit.insert(gamma.section.object_map().to_vec());
    }
    bijection &= hit == sections;
    Ok(CoalgebraCensus {
        sections: sections.len(),
        coverages: coverages.len(),
        bijection,
    })
}

/// `lext_f[J(c)] ≤ K(f c)` at every `c`.
pub fn is_lax_coalgebra_morphism(f: &FunctorMap, j: &Coverage, k: &Coverage) -> Result<bool> {
    for c in j.category().objects() {
        let jc = SieveFilter::new(j.category(), c, j.covers(c).clone())?;
        if !lext_filter(f, &jc).sieves.is_subset(k.covers(f.object(c))) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `K(f c) ≤ lext_f[J(c)]` at every `c`.
pub fn is_colax_coalgebra_morphism(f: &FunctorMap, j: &Coverage, k: &Coverage) -> Result<bool> {
    for c in j.category().objects() {
        let jc = SieveFilter::new(j.category(), c, j.covers(c).clone())?;
        if !k.covers(f.object(c)).is_subset(&lext_filter(f, &jc).sieves) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(lax, cover-preserving, colax, cover-lifting)` for one functor.
pub fn coalgebra_agreement(f: &FunctorMap, j: &Coverage, k: &Coverage) -> Result<(bool, bool, bool, bool)> {
    Ok((
        is_lax_coalgebra_morphism(f, j, k)?,
        cover_preserving_on(f, j, k)?.passed(),
        is_colax_coalgebra_morphism(f, j, k)?,
        cover_lifting_on(f, j, k)?.passed(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalLaxReport {
    /// `lext_J(S) ⊆ R_{(S,J(c))}` fails for these `(c, S)`.
    pub inclusion_failures: Vec<(Ob, Sieve)>,
    /// `𝓕_{(c,J(c))} ≤ lext_J[J(c)]` holds at every object.
    pub inequality: bool,
    /// Objects where `lext_J[J(c)] ≤ 𝓕_{(c,J(c))}` fails.
    pub equality_failures: Vec<Ob>,
}

impl NormalLaxReport {
    pub fn is_normal_lax(&self) -> bool {
        self.inclusion_failures.is_empty() && self.inequality
    }

    pub fn is_strict(&self) -> bool {
        self.is_normal_lax() && self.equality_failures.is_empty()
    }
}

pub fn normal_lax_check(j: &Site, m: &CofreeCategory) -> Result<NormalLaxReport> {
    let gamma = coverage_to_coalgebra(j.topology(), m)?;
    let mut report = NormalLaxReport {
        inequality: true,
        ..Default::default()
    };
    for c in j.category().objects() {
        let x = gamma.section.object(c);
        for s in j.covers(c) {
            if !image_sieve(&gamma.section, s).is_subset(&stabilizing_sieve(m, x, s)) {
                report.inclusion_failures.push((c, s.clone()));
            }
        }
        let stab = delta(m, x)?;
        let lext = lext_filter(&gamma.section, &gamma.filters[c]);
        if !stab.is_subset(&lext) {
            report.inequality = false;
        }
        if !lext.is_subset(&stab) {
            report.equality_failures.push(c);
        }
    }
    Ok(report)
}

/// All sieves on `base(F)` whose image under `p` is the image of a member.
pub fn p_saturate(filter: &SieveFilter, p: &FunctorMap) -> Result<SieveFilter> {
    let dc = p.domain();
    let images: BTreeSet<Sieve> = filter.sieves.iter().map(|r| image_sieve(p, r)).collect();
    let sieves = all_sieves(dc, filter.base)
        .into_iter()
        .filter(|s| images.contains(&image_sieve(p, s)))
        .collect();
    SieveFilter::new(dc, filter.base, sieves)
}

pub fn is_p_saturated(filter: &SieveFilter, p: &FunctorMap) -> Result<bool> {
    Ok(p_saturate(filter, p)? == *filter)
}

/// A coverage whose every `J(d)` is `p`-saturated.
pub fn is_p_coverage(j: &Coverage, p: &FunctorMap) -> Result<bool> {
    for d in j.category().objects() {
        if !is_p_saturated(&SieveFilter::new(j.category(), d, j.covers(d).clone())?, p)? {
            return Ok(false);
        }
    }
    Ok(check_family(j.category(), &(0..j.category().n_objects()).map(|d| j.covers(d).clone()).collect::<Vec<_>>(), Axiom::Stability).passed())
}

/// The comultiplication square of `𝕋` on `1_C`: at every `c`, the
/// `π`-saturations of `𝓕_{(c,J(c))}` and `lext_J[J(c)]` agree. Returns the
/// objects where they differ.
pub fn t_coalgebra_check(j: &Site, m: &CofreeCategory) -> Result<Vec<Ob>> {
    let gamma = coverage_to_coalgebra(j.topology(), m)?;
    let mut failures = Vec::new();
    for c in j.category().objects() {
        let x = gamma.section.object(c);
        let stab = p_saturate(&delta(m, x)?, &m.projection)?;
        let lext = p_saturate(&lext_filter(&gamma.section, &gamma.filters[c]), &m.projection)?;
        if stab != lext {
            failures.push(c);
        }
    }
    Ok(failures)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalCandidate {
    /// Only the maximal sieve covers.
    Trivial,
    /// The empty sieve covers too.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionKind {
    /// The empty sieve covers `object`, and its image under `!` is empty.
    EmptySieveImage { object: Ob },
    /// The empty sieve on the point covers, but nothing covering `object`
    /// maps into it.
    EmptySieveLift { object: Ob },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub candidate: TerminalCandidate,
    /// Position of the offending site in the searched list.
    pub site: usize,
    pub kind: ObstructionKind,
}

/// For each site structure on the point, the first listed site on which
/// `!` fails to be both cover-preserving and cover-lifting.
pub fn terminal_obstruction(point: &Arc<FinCategory>, sites: &[Site]) -> Result<Vec<Obstruction>> {
    if point.n_objects() != 1 || point.n_arrows() != 1 {
        return Err(Error::Precondition("the point category is needed".into()));
    }
    let mut out = Vec::new();
    for (candidate, target) in [
        (TerminalCandidate::Trivial, Site::trivial(point.clone())),
        (TerminalCandidate::Total, Site::total(point.clone())),
    ] {
        'sites: for (i, s) in sites.iter().enumerate() {
            let bang = FunctorMap::to_terminal(s.category().clone(), point.clone());
            if let Some(w) = cover_preserving_on(&bang, s.topology(), target.topology())?.witness() {
                if w.sieve.is_empty() {
                    out.push(Obstruction {
                        candidate,
                        site: i,
                        kind: ObstructionKind::EmptySieveImage { object: w.object },
                    });
                    break 'sites;
                }
            }
            if let Some(w) = cover_lifting_on(&bang, s.topology(), target.topology())?.witness() {
                if w.sieve.is_empty() {
                    out.push(Obstruction {
                        candidate,
                        site: i,
                        kind: ObstructionKind::EmptySieveLift { object: w.object },
                    });
                    break 'sites;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn arc(c: FinCategory) -> Arc<FinCategory> {
        Arc::new(c)
    }

    // Up-sets containing the maximal sieve, by brute force over subsets.
    fn count_upsets(cat: &FinCategory, c: Ob) -> usize {
        let sieves = all_sieves(cat, c);
        let max = Sieve::maximal(cat, c);
        (0u32..1 << sieves.len())
            .filter(|mask| {
                let has = |i: usize| mask & (1 << i) != 0;
                let top = sieves.iter().position(|s| *s == max).unwrap();
                has(top)
                    && (0..sieves.len())
                        .all(|i| !has(i) || (0..sieves.len()).all(|j| !sieves[i].is_subset(&sieves[j]) || has(j)))
            })
            .count()
    }

    fn filter_of(cat: &FinCategory, c: Ob, arrow_lists: &[&[Arr]]) -> SieveFilter {
        SieveFilter::generated(
            cat,
            c,
            arrow_lists.iter().map(|l| crate::site::generate_sieve(cat, c, l).unwrap()),
        )
    }

    #[test]
    fn hom_test_on_two() {
        let two = fixtures::two();
        let max_a = SieveFilter::top_only(&two, 0);
        let fb = filter_of(&two, 1, &[&[2]]);
        assert!(cofree_hom(&two, 0, &max_a, &max_a).unwrap());
        assert!(cofree_hom(&two, 2, &max_a, &fb).unwrap());
        assert!(!cofree_hom(&two, 2, &max_a, &SieveFilter::everything(&two, 1)).unwrap());
        assert!(cofree_hom(&two, 2, &max_a, &SieveFilter::top_only(&two, 0)).is_err());
    }

    #[test]
    fn cofree_sizes() {
        let one = arc(fixtures::one());
        let two = arc(fixtures::two());
        assert_eq!(enumerate_cofree(&one).unwrap().objects.len(), 2);
        let s2 = enumerate_cofree(&two).unwrap();
        assert_eq!(s2.objects.len(), count_upsets(&two, 0) + count_upsets(&two, 1));
        assert_eq!(s2.objects.len(), 5);
        assert_eq!(s2.objects.iter().filter(|x| x.object == 0).count(), 2);
        let pair = arc(fixtures::discrete_pair());
        let sp = enumerate_cofree(&pair).unwrap();
        assert_eq!(sp.objects.len(), 4);
        assert!(sp
            .category
            .arrows()
            .all(|a| sp.objects[sp.category.source(a)].object == sp.objects[sp.category.target(a)].object));
    }

    #[test]
    fn filter_bound_is_reported() {
        let two = fixtures::two();
        let tight = CofreeConfig {
            max_filters: 2,
            mode: FilterMode::UpSets,
        };
        assert!(matches!(enumerate_filters(&two, 1, tight), Err(Error::BoundExceeded { .. })));
        assert_eq!(enumerate_filters(&two, 0, tight).unwrap().len(), 2);
    }

    #[test]
    fn apply_s_of_bang() {
        let two = arc(fixtures::two());
        let one = arc(fixtures::one());
        let bang = FunctorMap::to_terminal(two.clone(), one.clone());
        let image = lext_filter(&bang, &filter_of(&two, 1, &[&[2]]));
        assert_eq!(image, SieveFilter::top_only(&one, 0));
        assert_eq!(lext_filter_by_restriction(&bang, &filter_of(&two, 1, &[&[2]])).unwrap(), image);
        let (s2, s1) = (enumerate_cofree(&two).unwrap(), enumerate_cofree(&one).unwrap());
        assert!(counit_square_commutes(&bang, &s2, &s1).unwrap());
        let id = FunctorMap::identity(two.clone());
        let sid = apply_s(&id, &s2, &s2).unwrap();
        assert_eq!(sid, FunctorMap::identity(s2.category.clone()));
    }

    #[test]
    fn stabilizing_sieve_matches_its_definition() {
        let two = arc(fixtures::two());
        let m = enumerate_cofree(&two).unwrap();
        for x in m.category.objects() {
            for s in all_sieves(&two, m.objects[x].object) {
                let ext = stabilizing_sieve(&m, x, &s);
                for v in m.category.arrows() {
                    assert_eq!(ext.contains(v), stabilizing_member(&m, x, &s, v).unwrap());
                }
                if s.is_empty() {
                    assert!(ext.is_empty());
                }
                if s.is_maximal(&two) {
                    assert!(ext.is_maximal(&m.category));
                }
            }
        }
    }

    #[test]
    fn delta_of_the_least_filter() {
        let two = arc(fixtures::two());
        let m = enumerate_cofree(&two).unwrap();
        let x = m.find(1, &SieveFilter::top_only(&two, 1)).unwrap();
        assert_eq!(delta(&m, x).unwrap(), SieveFilter::top_only(&m.category, x));
    }

    #[test]
    fn comonad_laws_on_one_and_two() {
        for c in [fixtures::one(), fixtures::two()] {
            let m = enumerate_cofree(&arc(c)).unwrap();
            let report = check_comonad_laws(&m, None, DeltaVariant::Standard).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.objects_checked, m.objects.len());
        }
    }

    #[test]
    fn corrupted_delta_breaks_a_counit_law() {
        let m = enumerate_cofree(&arc(fixtures::two())).unwrap();
        let report = check_comonad_laws(&m, None, DeltaVariant::DropUpClosure).unwrap();
        assert!(!report.passed());
        assert!(report
            .failures
            .iter()
            .all(|f| f.law == ComonadLaw::ImageOfProjectionAfterDelta));
    }

    #[test]
    fn trivial_topology_is_the_least_section() {
        let s = fixtures::two_triv();
        let m = enumerate_cofree(s.category()).unwrap();
        let gamma = coverage_to_coalgebra(s.topology(), &m).unwrap();
        for c in 0..2 {
            assert_eq!(gamma.filters[c], SieveFilter::top_only(s.category(), c));
        }
        assert_eq!(coalgebra_to_coverage(&gamma, &m).unwrap(), *s.topology());
        let f = fixtures::two_f();
        let gamma = coverage_to_coalgebra(f.topology(), &m).unwrap();
        assert_eq!(coalgebra_to_coverage(&gamma, &m).unwrap(), *f.topology());
    }

    #[test]
    fn coalgebras_on_two_are_coverages() {
        let two = arc(fixtures::two());
        let m = enumerate_cofree(&two).unwrap();
        let fa = enumerate_filters(&two, 0, CofreeConfig::default()).unwrap();
        let fb = enumerate_filters(&two, 1, CofreeConfig::default()).unwrap();
        let mut sections = 0;
        let mut stable_count = 0;
        for x in &fa {
            for y in &fb {
                let filters = [x.clone(), y.clone()];
                let (functor, stable) = functoriality_vs_stability(&m, &filters);
                assert_eq!(functor, stable);
                sections += functor as usize;
                // stability read directly: f*R ∈ J(a) for R ∈ J(b)
                let direct = y.sieves().iter().all(|r| x.contains(&pullback_sieve(&two, 2, r).unwrap()));
                stable_count += direct as usize;
            }
        }
        assert_eq!(sections, stable_count);
        assert_eq!(sections, 5);
    }

    #[test]
    fn census_on_one_and_two() {
        let one = enumerate_cofree(&arc(fixtures::one())).unwrap();
        let c = coalgebra_census(&one).unwrap();
        assert_eq!((c.sections, c.coverages, c.bijection), (2, 2, true));
        let two = enumerate_cofree(&arc(fixtures::two())).unwrap();
        let c = coalgebra_census(&two).unwrap();
        assert_eq!((c.sections, c.coverages, c.bijection), (5, 5, true));
    }

    #[test]
    fn lax_and_colax_match_preserving_and_lifting() {
        let two = arc(fixtures::two());
        let sites = crate::site::all_topologies(&two);
        let id = FunctorMap::identity(two.clone());
        for j in &sites {
            for k in &sites {
                let (lax, pres, colax, lift) = coalgebra_agreement(&id, j.topology(), k.topology()).unwrap();
                assert_eq!(lax, pres);
                assert_eq!(colax, lift);
            }
            assert!(is_lax_coalgebra_morphism(&id, j.topology(), j.topology()).unwrap());
            assert!(is_colax_coalgebra_morphism(&id, j.topology(), j.topology()).unwrap());
        }
    }

    #[test]
    fn normal_lax_on_point_and_two_f() {
        let one = arc(fixtures::one());
        let triv = Site::trivial(one.clone());
        let r = normal_lax_check(&triv, &enumerate_cofree(&one).unwrap()).unwrap();
        assert!(r.is_normal_lax() && r.is_strict());
        let s = fixtures::two_f();
        let r = normal_lax_check(&s, &enumerate_cofree(s.category()).unwrap()).unwrap();
        assert!(r.is_normal_lax());
    }

    #[test]
    fn saturation_along_identity_and_a_collapse() {
        let two = arc(fixtures::two());
        let id = FunctorMap::identity(two.clone());
        for c in 0..2 {
            for f in enumerate_filters(&two, c, CofreeConfig::default()).unwrap() {
                assert!(is_p_saturated(&f, &id).unwrap());
            }
        }
        let par = arc(fixtures::par());
        let p = FunctorMap::to_terminal(par.clone(), arc(fixtures::one()));
        let s = crate::site::generate_sieve(&par, 1, &[2]).unwrap();
        let f = SieveFilter::generated(&par, 1, [s]);
        let sat = p_saturate(&f, &p).unwrap();
        assert!(f.is_subset(&sat) && sat.len() > f.len());
        assert!(sat.contains(&crate::site::generate_sieve(&par, 1, &[3]).unwrap()));
    }

    #[test]
    fn two_f_is_a_coalgebra_for_the_indexed_comonad() {
        let s = fixtures::two_f();
        let m = enumerate_cofree(s.category()).unwrap();
        assert!(t_coalgebra_check(&s, &m).unwrap().is_empty());
        assert!(is_p_coverage(s.topology(), &FunctorMap::identity(s.category().clone())).unwrap());
    }

    #[test]
    fn no_terminal_site_on_the_point() {
        let one = arc(fixtures::one());
        let sites = [fixtures::two_all(), fixtures::two_triv()];
        let obs = terminal_obstruction(&one, &sites).unwrap();
        assert_eq!(
            obs,
            vec![
                Obstruction {
                    candidate: TerminalCandidate::Trivial,
                    site: 0,
                    kind: ObstructionKind::EmptySieveImage { object: 0 },
                },
                Obstruction {
                    candidate: TerminalCandidate::Total,
                    site: 1,
                    kind: ObstructionKind::EmptySieveLift { object: 0 },
                },
            ]
        );
    }
}
