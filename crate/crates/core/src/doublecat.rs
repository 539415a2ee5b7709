//! The double category of sites: morphisms of sites horizontally,
//! comorphisms vertically, and natural transformations as cells.
//!
//! A lax cell
//!
//! ```text
//!   top_left --top--> top_right
//!      |                  |
//!    left      φ        right
//!      v                  v
//! bottom_left --bottom--> bottom_right
//! ```
//!
//! carries `φ: right∘top ⇒ bottom∘left`; an oplax cell carries the reverse.

use std::collections::BTreeSet;

use crate::exactness::LaxSquare;
use crate::fincat::{cocomma, comma, same_category, Arr, Cocomma, Comma, FunctorMap, NatTransMap, Ob};
use crate::site::{image_sieve, pullback_sieve, saturate, Coverage, Sieve, Site};
use crate::sitemaps::{is_cover_dense, is_cover_lifting, is_cover_preserving, is_covering_flat, FlatMode, SiteFunctor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Lax,
    Oplax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCell {
    pub top_left: Site,
    pub top_right: Site,
    pub bottom_left: Site,
    pub bottom_right: Site,
    pub top: FunctorMap,
    pub left: FunctorMap,
    pub right: FunctorMap,
    pub bottom: FunctorMap,
    pub filler: NatTransMap,
    pub orientation: Orientation,
}

impl DoubleCell {
    /// The underlying square; only lax cells have one.
    pub fn square(&self) -> Result<LaxSquare> {
        if self.orientation != Orientation::Lax {
            return Err(Error::Oplax);
        }
        LaxSquare::new(
            self.top.clone(),
            self.left.clone(),
            self.right.clone(),
            self.bottom.clone(),
            self.filler.clone(),
        )
    }

    /// `id_f`: `f` on top and bottom, identities on the sides.
    pub fn vertical_identity(f: &SiteFunctor, orientation: Orientation) -> Self {
        DoubleCell {
            top_left: f.source.clone(),
            top_right: f.target.clone(),
            bottom_left: f.source.clone(),
            bottom_right: f.target.clone(),
            top: f.functor.clone(),
            left: FunctorMap::identity(f.source.category().clone()),
            right: FunctorMap::identity(f.target.category().clone()),
            bottom: f.functor.clone(),
            filler: NatTransMap::identity(&f.functor),
            orientation,
        }
    }

    /// `1_G`: `G` on both sides, identities on top and bottom.
    pub fn horizontal_identity(g: &SiteFunctor, orientation: Orientation) -> Self {
        DoubleCell {
            top_left: g.source.clone(),
            top_right: g.source.clone(),
            bottom_left: g.target.clone(),
            bottom_right: g.target.clone(),
            top: FunctorMap::identity(g.source.category().clone()),
            left: g.functor.clone(),
            right: g.functor.clone(),
            bottom: FunctorMap::identity(g.target.category().clone()),
            filler: NatTransMap::identity(&g.functor),
            orientation,
        }
    }
}

/// One failed condition of a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellProblem {
    Corner(String),
    Boundary(String),
    NotMorphism { side: &'static str, detail: String },
    NotComorphism { side: &'static str, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellReport {
    pub problems: Vec<CellProblem>,
}

impl CellReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

fn filler_ends(cell: &DoubleCell) -> Result<(FunctorMap, FunctorMap)> {
    let across_top = cell.right.after(&cell.top)?;
    let across_bottom = cell.bottom.after(&cell.left)?;
    Ok(match cell.orientation {
        Orientation::Lax => (across_top, across_bottom),
        Orientation::Oplax => (across_bottom, across_top),
    })
}

/// Checks corners, the filler boundary, that `top` and `bottom` are
/// morphisms of sites and that `left` and `right` are comorphisms.
pub fn validate_cell(cell: &DoubleCell) -> CellReport {
    let mut problems = Vec::new();
    let corners = [
        ("top", &cell.top, &cell.top_left, &cell.top_right),
        ("bottom", &cell.bottom, &cell.bottom_left, &cell.bottom_right),
        ("left", &cell.left, &cell.top_left, &cell.bottom_left),
        ("right", &cell.right, &cell.top_right, &cell.bottom_right),
    ];
    for (side, f, s, t) in corners {
        if !same_category(f.domain(), s.category()) || !same_category(f.codomain(), t.category()) {
            problems.push(CellProblem::Corner(format!("{side} does not run between its corners")));
        }
    }
    if !problems.is_empty() {
        return CellReport { problems };
    }
    match filler_ends(cell) {
        Ok((s, t)) if *cell.filler.source() == s && *cell.filler.target() == t => {}
        Ok(_) => problems.push(CellProblem::Boundary("filler has the wrong source or target".into())),
        Err(e) => problems.push(CellProblem::Boundary(e.to_string())),
    }
    for (side, f, s, t) in [corners[0], corners[1]] {
        let flat = is_covering_flat(f, t, FlatMode::Shapes).expect("corners checked");
        let pres = is_cover_preserving(f, s, t).expect("corners checked");
        if let Some(w) = flat.witness() {
            problems.push(CellProblem::NotMorphism {
                side,
                detail: format!("not covering-flat: {w:?}"),
            });
        } else if let Some(w) = pres.witness() {
            problems.push(CellProblem::NotMorphism {
                side,
                detail: format!("not cover-preserving: {w:?}"),
            });
        }
    }
    for (side, f, s, t) in [corners[2], corners[3]] {
        if let Some(w) = is_cover_lifting(f, s, t).expect("corners checked").witness() {
            problems.push(CellProblem::NotComorphism {
                side,
                detail: format!("not cover-lifting: {w:?}"),
            });
        }
    }
    CellReport { problems }
}

/// `left` beside `right`, sharing `left.right = right.left`.
pub fn hpaste(left: &DoubleCell, right: &DoubleCell) -> Result<DoubleCell> {
    if left.orientation != right.orientation {
        return Err(Error::Shape("cells of different orientation".into()));
    }
    if left.right != right.left || left.top_right != right.top_left || left.bottom_right != right.bottom_left {
        return Err(Error::Shape("shared vertical boundary does not match".into()));
    }
    let top = right.top.after(&left.top)?;
    let bottom = right.bottom.after(&left.bottom)?;
    let dc = right.bottom.codomain();
    let components: Vec<Arr> = left
        .top
        .domain()
        .objects()
        .map(|a| {
            let outer = right.bottom.arrow(left.filler.component(a));
            let inner = right.filler.component(left.top.object(a));
            match left.orientation {
                Orientation::Lax => dc.comp(outer, inner),
                Orientation::Oplax => dc.comp(inner, outer),
            }
        })
        .collect();
    let mut cell = DoubleCell {
        top_left: left.top_left.clone(),
        top_right: right.top_right.clone(),
        bottom_left: left.bottom_left.clone(),
        bottom_right: right.bottom_right.clone(),
        filler: NatTransMap::identity(&top),
        top,
        left: left.left.clone(),
        right: right.right.clone(),
        bottom,
        orientation: left.orientation,
    };
    let (s, t) = filler_ends(&cell)?;
    cell.filler = NatTransMap::new(s, t, components)?;
    Ok(cell)
}

/// `upper` above `lower`, sharing `upper.bottom = lower.top`.
pub fn vpaste(upper: &DoubleCell, lower: &DoubleCell) -> Result<DoubleCell> {
    if upper.orientation != lower.orientation {
        return Err(Error::Shape("cells of different orientation".into()));
    }
    if upper.bottom != lower.top || upper.bottom_left != lower.top_left || upper.bottom_right != lower.top_right {
        return Err(Error::Shape("shared horizontal boundary does not match".into()));
    }
    let left = lower.left.after(&upper.left)?;
    let right = lower.right.after(&upper.right)?;
    let dc = lower.right.codomain();
    let components: Vec<Arr> = upper
        .top
        .domain()
        .objects()
        .map(|a| {
            let pushed = lower.right.arrow(upper.filler.component(a));
            let below = lower.filler.component(upper.left.object(a));
            match upper.orientation {
                Orientation::Lax => dc.comp(below, pushed),
                Orientation::Oplax => dc.comp(pushed, below),
            }
        })
        .collect();
    let mut cell = DoubleCell {
        top_left: upper.top_left.clone(),
        top_right: upper.top_right.clone(),
        bottom_left: lower.bottom_left.clone(),
        bottom_right: lower.bottom_right.clone(),
        filler: NatTransMap::identity(&left),
        top: upper.top.clone(),
        left,
        right,
        bottom: lower.bottom.clone(),
        orientation: upper.orientation,
    };
    let (s, t) = filler_ends(&cell)?;
    cell.filler = NatTransMap::new(s, t, components)?;
    Ok(cell)
}

/// Horizontal `f: A -> B` and vertical `G: B -> A` with
/// `ε: G∘f ⇒ 1_A` (top `f`, right `G`, identities elsewhere) and
/// `η: 1_B ⇒ f∘G` (left `G`, bottom `f`, identities elsewhere):
/// `η` above `ε` pastes to `1_G` and `ε` beside `η` to `id_f`.
pub fn is_conjoint_pair(f: &SiteFunctor, g: &SiteFunctor, eps: &DoubleCell, eta: &DoubleCell) -> Result<bool> {
    let ida = FunctorMap::identity(f.source.category().clone());
    let idb = FunctorMap::identity(f.target.category().clone());
    let eps_shape = eps.top == f.functor && eps.left == ida && eps.right == g.functor && eps.bottom == ida;
    let eta_shape = eta.top == idb && eta.left == g.functor && eta.right == idb && eta.bottom == f.functor;
    if !eps_shape || !eta_shape {
        return Err(Error::Shape("cells do not have the conjoint shapes".into()));
    }
    let o = eps.orientation;
    let stacked = vpaste(eta, eps)?;
    let side = hpaste(eps, eta)?;
    Ok(stacked == DoubleCell::horizontal_identity(g, o) && side == DoubleCell::vertical_identity(f, o))
}

/// Horizontal `f: A -> B` and vertical `G: A -> B` with `φ: f ⇒ G` (top
/// `f`, left `G`) and `ψ: G ⇒ f` (right `G`, bottom `f`): `ψ` above `φ`
/// pastes to `1_G` and `ψ` beside `φ` to `id_f`.
pub fn is_companion_pair(f: &SiteFunctor, g: &SiteFunctor, phi: &DoubleCell, psi: &DoubleCell) -> Result<bool> {
    let ida = FunctorMap::identity(f.source.category().clone());
    let idb = FunctorMap::identity(f.target.category().clone());
    let phi_shape = phi.top == f.functor && phi.left == g.functor && phi.right == idb && phi.bottom == idb;
    let psi_shape = psi.top == ida && psi.left == ida && psi.right == g.functor && psi.bottom == f.functor;
    if !phi_shape || !psi_shape {
        return Err(Error::Shape("cells do not have the companion shapes".into()));
    }
    let o = phi.orientation;
    let stacked = vpaste(psi, phi)?;
    let side = hpaste(psi, phi)?;
    Ok(stacked == DoubleCell::horizontal_identity(g, o) && side == DoubleCell::vertical_identity(f, o))
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

/// The comma site of a comorphism `G: (B,L) -> (D,K)` and a morphism
/// `f: (C,J) -> (D,K)`: generated on `(b, c, u)` by the sieves
/// `G↓S = {(β, γ) | β ∈ res_G(u* lext_f S), γ ∈ S}` for `S ∈ J(c)`.
pub fn comma_site(g: &SiteFunctor, f: &SiteFunctor) -> Result<(Comma, Site, DoubleCell)> {
    require(g.is_comorphism(), "G is not a comorphism of sites")?;
    require(f.is_morphism(), "f is not a morphism of sites")?;
    if g.target != f.target {
        return Err(Error::Mismatch("G and f do not share a codomain site".into()));
    }
    let cm = comma(&g.functor, &f.functor)?;
    let cat = cm.category.clone();
    let dc = f.target.category();
    let mut gens = vec![BTreeSet::new(); cat.n_objects()];
    for (o, &(_, c, u)) in cm.objects.iter().enumerate() {
        for s in f.source.covers(c) {
            let pulled = pullback_sieve(dc, u, &image_sieve(&f.functor, s))?;
            let sieve = Sieve::from_arrows(
                &cat,
                o,
                cat.arrows_into(o).iter().copied().filter(|&x| {
                    let (beta, gamma) = cm.arrows[x];
                    s.contains(gamma) && pulled.contains(g.functor.arrow(beta))
                }),
            );
            gens[o].insert(sieve);
        }
    }
    let site = saturate(&Coverage::from_sieves(cat.clone(), gens))?;
    let cell = DoubleCell {
        top_left: site.clone(),
        top_right: g.source.clone(),
        bottom_left: f.source.clone(),
        bottom_right: f.target.clone(),
        top: cm.pi0.clone(),
        left: cm.pi1.clone(),
        right: g.functor.clone(),
        bottom: f.functor.clone(),
        filler: cm.lambda.clone(),
        orientation: Orientation::Lax,
    };
    Ok((cm, site, cell))
}

/// The cocomma site of a morphism `f: (C,J) -> (B,L)` and a comorphism
/// `G: (C,J) -> (D,K)`. On `(0,b)` it is generated by `lext_ι0 S` for
/// `S ∈ L(b)` and by `(λ_c∘(0,a))* lext_ι1 R` for `a: b -> f(c)` and
/// `R ∈ K(G c)`; on `(1,d)` by `lext_ι1 R` for `R ∈ K(d)`.
pub fn cocomma_site(f: &SiteFunctor, g: &SiteFunctor) -> Result<(Cocomma, Site, DoubleCell)> {
    require(f.is_morphism(), "f is not a morphism of sites")?;
    require(g.is_comorphism(), "G is not a comorphism of sites")?;
    if f.source != g.source {
        return Err(Error::Mismatch("f and G do not share a domain site".into()));
    }
    let cc = cocomma(&f.functor, &g.functor)?;
    let cat = cc.category.clone();
    let (ccat, bc, dcat) = (f.source.category(), f.target.category(), g.target.category());
    let mut gens = vec![BTreeSet::new(); cat.n_objects()];
    for b in bc.objects() {
        for s in f.target.covers(b) {
            gens[cc.left_object(b)].insert(image_sieve(&cc.iota0, s));
        }
        for c in ccat.objects() {
            for &a in bc.hom(b, f.functor.object(c)) {
                let link = cc
                    .connecting(a, c, dcat.identity(g.functor.object(c)))
                    .expect("every formal composite has a class");
                for r in g.target.covers(g.functor.object(c)) {
                    gens[cc.left_object(b)].insert(pullback_sieve(&cat, link, &image_sieve(&cc.iota1, r))?);
                }
            }
        }
    }
    for d in dcat.objects() {
        for r in g.target.covers(d) {
            gens[cc.right_object(d)].insert(image_sieve(&cc.iota1, r));
        }
    }
    let site = saturate(&Coverage::from_sieves(cat.clone(), gens))?;
    let cell = DoubleCell {
        top_left: f.source.clone(),
        top_right: f.target.clone(),
        bottom_left: g.target.clone(),
        bottom_right: site.clone(),
        top: f.functor.clone(),
        left: g.functor.clone(),
        right: cc.iota0.clone(),
        bottom: cc.iota1.clone(),
        filler: cc.lambda.clone(),
        orientation: Orientation::Lax,
    };
    Ok((cc, site, cell))
}

/// Checks run on the Giraud site. The topology is an adopted definition:
/// a sieve on `(d, c, u)` covers when its image under `π_D` generates a
/// `K`-cover of `d`.
#[derive(Debug, Clone)]
pub struct GiraudReport {
    pub comma: Comma,
    pub site: Site,
    pub pi_d_dense_morphism: bool,
    pub pi_d_comorphism: bool,
    pub pi_c_comorphism: bool,
    /// Whether the comma topology of `(1_D, f)` has the same covers, when
    /// that topology can be built.
    pub matches_comma_topology: Option<bool>,
    pub note: &'static str,
}

pub const GIRAUD_NOTE: &str = "adopted definition: R covers (d,c,u) iff image_sieve(pi_D, R) covers d";

pub fn giraud_topology(f: &SiteFunctor) -> Result<GiraudReport> {
    require(f.is_morphism(), "f is not a morphism of sites")?;
    let k = &f.target;
    let id = FunctorMap::identity(k.category().clone());
    let cm = comma(&id, &f.functor)?;
    let cat = cm.category.clone();
    let covers: Vec<BTreeSet<Sieve>> = cat
        .objects()
        .map(|o| {
            crate::site::all_sieves(&cat, o)
                .into_iter()
                .filter(|r| k.is_cover(&image_sieve(&cm.pi0, r)))
                .collect()
        })
        .collect();
    let site = saturate(&Coverage::from_sieves(cat.clone(), covers))?;
    let pi_d_dense_morphism = is_covering_flat(&cm.pi0, k, FlatMode::Shapes)?.passed()
        && is_cover_preserving(&cm.pi0, &site, k)?.passed()
        && is_cover_dense(&cm.pi0, k)?.passed();
    let pi_d_comorphism = is_cover_lifting(&cm.pi0, &site, k)?.passed();
    let pi_c_comorphism = is_cover_lifting(&cm.pi1, &site, &f.source)?.passed();
    let identity = SiteFunctor::identity(k);
    let matches_comma_topology = comma_site(&identity, f)
        .ok()
        .map(|(_, other, _)| cat.objects().all(|o| other.covers(o) == site.covers(o)));
    Ok(GiraudReport {
        comma: cm,
        site,
        pi_d_dense_morphism,
        pi_d_comorphism,
        pi_c_comorphism,
        matches_comma_topology,
        note: GIRAUD_NOTE,
    })
}

/// The outcome of factoring a cell through the tabulator `λ_f`.
#[derive(Debug, Clone)]
pub struct TabulatorReport {
    /// `⟨φ⟩: B -> D↓f`, `b ↦ (H b, G b, φ_b)`.
    pub factor: SiteFunctor,
    pub giraud: GiraudReport,
    pub factor_is_comorphism: bool,
    /// The first object where the pasting differs from the input, if any.
    pub pasting_mismatch: Option<Ob>,
}

fn tabulator_functor(g: &FunctorMap, h: &FunctorMap, phi: &NatTransMap, cm: &Comma) -> Result<FunctorMap> {
    let bc = g.domain();
    let objects: Vec<Ob> = bc
        .objects()
        .map(|b| cm.object_of(h.object(b), g.object(b), phi.component(b)))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Shape("filler does not land in the comma".into()))?;
    let arrows: Vec<Arr> = bc
        .arrows()
        .map(|x| {
            cm.arrow_of(
                objects[bc.source(x)],
                objects[bc.target(x)],
                h.arrow(x),
                g.arrow(x),
            )
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Shape("filler is not natural".into()))?;
    FunctorMap::new(bc.clone(), cm.category.clone(), objects, arrows)
}

/// The tabulator cell `λ_f`: top identity of `D↓f`, left `π_C`, right
/// `π_D`, bottom `f`.
pub fn tabulator_cell(f: &SiteFunctor, giraud: &GiraudReport) -> DoubleCell {
    let cm = &giraud.comma;
    DoubleCell {
        top_left: giraud.site.clone(),
        top_right: giraud.site.clone(),
        bottom_left: f.source.clone(),
        bottom_right: f.target.clone(),
        top: FunctorMap::identity(cm.category.clone()),
        left: cm.pi1.clone(),
        right: cm.pi0.clone(),
        bottom: f.functor.clone(),
        filler: cm.lambda.clone(),
        orientation: Orientation::Lax,
    }
}

/// Factors a lax cell with identity top, left `G: B -> C`, right
/// `H: B -> D` and bottom `f` as `⟨φ⟩` followed by `λ_f`.
pub fn tabulator_factorize(cell: &DoubleCell) -> Result<TabulatorReport> {
    if cell.orientation != Orientation::Lax
        || cell.top_left != cell.top_right
        || cell.top != FunctorMap::identity(cell.top_left.category().clone())
    {
        return Err(Error::Shape("tabulator input needs an identity top".into()));
    }
    let right = SiteFunctor::new(cell.right.clone(), cell.top_right.clone(), cell.bottom_right.clone())?;
    require(right.is_comorphism(), "H is not a comorphism of sites")?;
    let f = SiteFunctor::new(cell.bottom.clone(), cell.bottom_left.clone(), cell.bottom_right.clone())?;
    let giraud = giraud_topology(&f)?;
    let functor = tabulator_functor(&cell.left, &cell.right, &cell.filler, &giraud.comma)?;
    let factor = SiteFunctor::new(functor, cell.top_left.clone(), giraud.site.clone())?;
    let factor_is_comorphism = factor.is_comorphism();
    let through = vpaste(
        &DoubleCell::horizontal_identity(&factor, Orientation::Lax),
        &tabulator_cell(&f, &giraud),
    )?;
    let pasting_mismatch = cell
        .top_left
        .category()
        .objects()
        .find(|&b| through.filler.component(b) != cell.filler.component(b));
    Ok(TabulatorReport {
        factor,
        giraud,
        factor_is_comorphism,
        pasting_mismatch,
    })
}

/// The comparison `⟨γ,κ⟩: ⟨ψ⟩∘h ⇒ ⟨φ⟩` with components `(κ_a, γ_a)`.
///
/// Inputs: `φ: K ⇒ f∘G` over `A`, `ψ: K' ⇒ f∘G'` over `B`, `h: A -> B`,
/// `γ: G'∘h ⇒ G` and `κ: K'∘h ⇒ K`, subject to
/// `f(γ_a)∘ψ_{h a} = φ_a∘κ_a`.
#[derive(Debug, Clone)]
pub struct Tetrahedron {
    pub comparison: NatTransMap,
    /// The comparison cell pasted over `λ_f` has filler `φ_a∘κ_a`.
    pub pasting_holds: bool,
}

pub fn tetrahedron_factorize(
    f: &SiteFunctor,
    phi_cell: &DoubleCell,
    psi_cell: &DoubleCell,
    h: &FunctorMap,
    gamma: &NatTransMap,
    kappa: &NatTransMap,
) -> Result<Tetrahedron> {
    let giraud = giraud_topology(f)?;
    let cm = &giraud.comma;
    let dc = f.functor.codomain();
    let (g, k, phi) = (&phi_cell.left, &phi_cell.right, &phi_cell.filler);
    let (g2, k2, psi) = (&psi_cell.left, &psi_cell.right, &psi_cell.filler);
    let ac = g.domain();
    for a in ac.objects() {
        let lhs = dc.comp(f.functor.arrow(gamma.component(a)), psi.component(h.object(a)));
        let rhs = dc.comp(phi.component(a), kappa.component(a));
        if lhs != rhs {
            return Err(Error::Precondition(format!(
                "cells are not equal at {}",
                ac.object_name(a)
            )));
        }
    }
    let at_a = tabulator_functor(g, k, phi, cm)?;
    let at_b = tabulator_functor(g2, k2, psi, cm)?;
    let through_h = at_b.after(h)?;
    let components: Vec<Arr> = ac
        .objects()
        .map(|a| {
            cm.arrow_of(
                through_h.object(a),
                at_a.object(a),
                kappa.component(a),
                gamma.component(a),
            )
            .ok_or_else(|| Error::Shape("comparison component is not a comma arrow".into()))
        })
        .collect::<Result<_>>()?;
    let comparison = NatTransMap::new(through_h, at_a, components)?;
    let pasting_holds = ac.objects().all(|a| {
        let via = dc.comp(
            cm.lambda.component(comparison.target().object(a)),
            cm.pi0.arrow(comparison.component(a)),
        );
        via == dc.comp(phi.component(a), kappa.component(a))
    });
    Ok(Tetrahedron {
        comparison,
        pasting_holds,
    })
}
