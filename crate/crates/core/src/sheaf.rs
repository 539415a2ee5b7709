//! Sheaves on finite sites and sheafification by the plus construction.
//!
//! The covers of an object are closed under finite intersection, so in the
//! finite case the cover poset has a least element, the intersection of
//! all covers. The colimit defining `X⁺(c)` is therefore just the set of
//! matching families on that least cover.

use std::collections::HashMap;

use crate::doublecat::DoubleCell;
use crate::fincat::{same_category, Arr, FunctorMap, Ob};
use crate::presheaf::{
    find_iso, for_each_natural_map, lextend, mate_flat, restrict, IsoFailure, Presheaf, PresheafMap,
};
use crate::site::{Sieve, Site};
use crate::sitemaps::{is_site_comorphism, is_site_morphism};
use crate::{Error, Outcome, Result};

/// A compatible choice of `x_u ∈ X(source u)` for every `u` in a sieve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchingFamily {
    pub sieve: Sieve,
    /// `(u, x_u)` in ascending arrow order.
    pub values: Vec<(Arr, usize)>,
}

impl MatchingFamily {
    pub fn value(&self, u: Arr) -> Option<usize> {
        self.values
            .binary_search_by_key(&u, |&(a, _)| a)
            .ok()
            .map(|i| self.values[i].1)
    }
}

/// Every matching family for `x` on `s`, in lexicographic order.
pub fn matching_families(x: &Presheaf, s: &Sieve) -> Vec<MatchingFamily> {
    let cat = x.base().clone();
    let shape = Presheaf::from_sieve(cat.clone(), s);
    let members: Vec<Vec<Arr>> = cat
        .objects()
        .map(|d| cat.hom(d, s.base()).iter().copied().filter(|&a| s.contains(a)).collect())
        .collect();
    let mut out = Vec::new();
    for_each_natural_map(&shape, x, &mut |comps| {
        let mut values: Vec<(Arr, usize)> = members
            .iter()
            .enumerate()
            .flat_map(|(d, arrows)| arrows.iter().enumerate().map(move |(i, &u)| (u, d, i)))
            .map(|(u, d, i)| (u, comps[d][i]))
            .collect();
        values.sort_unstable();
        out.push(MatchingFamily {
            sieve: s.clone(),
            values,
        });
        true
    });
    out.sort();
    out
}

/// Elements `e ∈ X(c)` with `X(u)(e) = x_u` for every `u` in the sieve.
pub fn amalgamations(x: &Presheaf, family: &MatchingFamily) -> Vec<usize> {
    let c = family.sieve.base();
    (0..x.size(c))
        .filter(|&e| family.values.iter().all(|&(u, v)| x.act(u, e) == v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SheafFailure {
    NoAmalgamation { family: MatchingFamily },
    ManyAmalgamations { family: MatchingFamily, elements: (usize, usize) },
}

/// Every matching family on every cover has exactly one amalgamation.
pub fn is_sheaf(x: &Presheaf, site: &Site) -> Result<Outcome<SheafFailure>> {
    check_site(x, site)?;
    for c in site.category().objects() {
        for s in site.covers(c) {
            for family in matching_families(x, s) {
                let found = amalgamations(x, &family);
                match found.as_slice() {
                    [_] => {}
                    [] => return Ok(Outcome::Fail(SheafFailure::NoAmalgamation { family })),
                    [e0, e1, ..] => {
                        let elements = (*e0, *e1);
                        return Ok(Outcome::Fail(SheafFailure::ManyAmalgamations { family, elements }));
                    }
                }
            }
        }
    }
    Ok(Outcome::Pass)
}

fn check_site(x: &Presheaf, site: &Site) -> Result<()> {
    if same_category(x.base(), site.category()) {
        Ok(())
    } else {
        Err(Error::Mismatch("presheaf and site live on different categories".into()))
    }
}

/// `X⁺` with its elements named by matching families on the least covers.
#[derive(Debug, Clone)]
pub struct PlusConstruction {
    pub presheaf: Presheaf,
    pub unit: PresheafMap,
    families: Vec<Vec<MatchingFamily>>,
    index: Vec<HashMap<Vec<(Arr, usize)>, usize>>,
}

impl PlusConstruction {
    pub fn family(&self, c: Ob, k: usize) -> &MatchingFamily {
        &self.families[c][k]
    }

    fn element(&self, c: Ob, values: &[(Arr, usize)]) -> usize {
        self.index[c][values]
    }
}

pub fn plus_construction(x: &Presheaf, site: &Site) -> Result<PlusConstruction> {
    check_site(x, site)?;
    let cat = site.category().clone();
    let least: Vec<Sieve> = cat.objects().map(|c| site.least_cover(c)).collect();
    let families: Vec<Vec<MatchingFamily>> = least.iter().map(|s| matching_families(x, s)).collect();
    let index: Vec<HashMap<Vec<(Arr, usize)>, usize>> = families
        .iter()
        .map(|fams| fams.iter().enumerate().map(|(i, f)| (f.values.clone(), i)).collect())
        .collect();
    // u: d -> c pulls (x_v)_{v ∈ m_c} back to (x_{u∘w})_{w ∈ m_d}; m_d ⊆ u*m_c
    let actions = cat
        .arrows()
        .map(|u| {
            let d = cat.source(u);
            families[cat.target(u)]
                .iter()
                .map(|fam| {
                    let pulled: Vec<(Arr, usize)> = least[d]
                        .arrows()
                        .map(|w| (w, fam.value(cat.comp(u, w)).expect("least covers are stable")))
                        .collect();
                    index[d][&pulled]
                })
                .collect()
        })
        .collect();
    let sizes = families.iter().map(Vec::len).collect();
    let presheaf = Presheaf::new(cat.clone(), sizes, actions)?;
    let components = cat
        .objects()
        .map(|c| {
            (0..x.size(c))
                .map(|e| {
                    let values: Vec<(Arr, usize)> = least[c].arrows().map(|v| (v, x.act(v, e))).collect();
                    index[c][&values]
                })
                .collect()
        })
        .collect();
    let unit = PresheafMap::new(x.clone(), presheaf.clone(), components)?;
    Ok(PlusConstruction {
        presheaf,
        unit,
        families,
        index,
    })
}

/// `X⁺` and the canonical map `X -> X⁺`.
pub fn plus(x: &Presheaf, site: &Site) -> Result<(Presheaf, PresheafMap)> {
    let p = plus_construction(x, site)?;
    Ok((p.presheaf, p.unit))
}

/// `m⁺: X⁺ -> Y⁺`, applying `m` to every member of a family.
pub fn plus_map(m: &PresheafMap, site: &Site) -> Result<PresheafMap> {
    let src = plus_construction(m.source(), site)?;
    let tgt = plus_construction(m.target(), site)?;
    let components = site
        .category()
        .objects()
        .map(|c| {
            src.families[c]
                .iter()
                .map(|fam| {
                    let values: Vec<(Arr, usize)> = fam
                        .values
                        .iter()
                        .map(|&(u, e)| (u, m.apply(site.category().source(u), e)))
                        .collect();
                    tgt.element(c, &values)
                })
                .collect()
        })
        .collect();
    PresheafMap::new(src.presheaf, tgt.presheaf, components)
}

#[derive(Debug, Clone)]
pub struct SheafificationResult {
    pub input: Presheaf,
    pub output: Presheaf,
    pub unit: PresheafMap,
    pub site: Site,
}

/// Plus applied twice; the unit is the composite of the two plus units.
pub fn sheafify(x: &Presheaf, site: &Site) -> Result<SheafificationResult> {
    let (once, first) = plus(x, site)?;
    let (twice, second) = plus(&once, site)?;
    Ok(SheafificationResult {
        input: x.clone(),
        output: twice,
        unit: first.then(&second)?,
        site: site.clone(),
    })
}

pub fn sheafify_map(m: &PresheafMap, site: &Site) -> Result<PresheafMap> {
    plus_map(&plus_map(m, site)?, site)
}

/// `Sh(f)^* X = a_K lext_f X` for a morphism of sites `f: (C,J) -> (D,K)`
/// and a `J`-sheaf `X`.
pub fn inverse_image_morphism(f: &FunctorMap, j: &Site, k: &Site, x: &Presheaf) -> Result<Presheaf> {
    if !is_site_morphism(f, j, k)? {
        return Err(Error::Precondition("not a morphism of sites".into()));
    }
    require_sheaf(x, j)?;
    Ok(sheafify(&lextend(f, x)?.presheaf, k)?.output)
}

/// `C_G^* X = a_K res_G X` for a comorphism `G: (D,K) -> (C,J)` and a
/// `J`-sheaf `X`.
pub fn inverse_image_comorphism(g: &FunctorMap, k: &Site, j: &Site, x: &Presheaf) -> Result<Presheaf> {
    if !is_site_comorphism(g, k, j)? {
        return Err(Error::Precondition("not a comorphism of sites".into()));
    }
    require_sheaf(x, j)?;
    Ok(sheafify(&restrict(g, x)?, k)?.output)
}

fn require_sheaf(x: &Presheaf, site: &Site) -> Result<()> {
    if is_sheaf(x, site)?.passed() {
        Ok(())
    } else {
        Err(Error::Precondition("input is not a sheaf".into()))
    }
}

/// The comparison of a lax cell at `y_c`, sheafified for the top-right
/// site, with its invertibility verdict.
pub fn sheafified_comparison(cell: &DoubleCell, c: Ob) -> Result<(PresheafMap, Outcome<IsoFailure>)> {
    let sq = cell.square()?;
    let yc = Presheaf::representable(sq.left.codomain().clone(), c);
    let raw = mate_flat(&sq, &yc)?;
    let map = sheafify_map(&raw, &cell.top_right)?;
    let verdict = map.is_iso();
    Ok((map, verdict))
}

/// `Sh(f)^*` and `C_G^*` agree on every `a_J y_c`, up to isomorphism. The
/// witness is the first `c` where they differ.
pub fn geometric_equality(f: &FunctorMap, g: &FunctorMap, j: &Site, k: &Site) -> Result<Outcome<Ob>> {
    let cat = j.category();
    for c in cat.objects() {
        let sheaf = sheafify(&Presheaf::representable(cat.clone(), c), j)?.output;
        let left = inverse_image_morphism(f, j, k, &sheaf)?;
        let right = inverse_image_comorphism(g, k, j, &sheaf)?;
        if find_iso(&left, &right).is_none() {
            return Ok(Outcome::Fail(c));
        }
    }
    Ok(Outcome::Pass)
}
