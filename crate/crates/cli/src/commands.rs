//! Dispatch from command names to the checkers.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value};

use sitecalc::comonad::{
    check_comonad_laws, coalgebra_agreement, coalgebra_census, coalgebra_to_coverage, coverage_to_coalgebra,
    normal_lax_check, t_coalgebra_check, CofreeCategory, CofreeConfig, CofreeSite, ComonadLaw, DeltaVariant,
    FilterMode, DEFAULT_MAX_FILTERS,
};
use sitecalc::doublecat::{
    cocomma_site, comma_site, giraud_topology, tabulator_factorize, validate_cell, CellProblem, GIRAUD_NOTE,
};
use sitecalc::exactness::{
    comparison_functor, is_exact_coend, is_exact_final, is_locally_exact, is_relatively_cofinal, CofinalityFailure,
    CofinalityProblem, ExactnessDefect, LaxSquare,
};
use sitecalc::fincat::{validate_category, FinCategory, FunctorMap, Violation};
use sitecalc::presheaf::{find_iso, Presheaf};
use sitecalc::sheaf::{geometric_equality, is_sheaf, sheafified_comparison, sheafify, SheafFailure};
use sitecalc::site::{check_axiom, saturate, Axiom, Coverage, Sieve, Site};
use sitecalc::sitemaps::{is_cover_dense, is_cover_lifting, is_cover_preserving, is_covering_flat, FlatMode, SiteFunctor};
use sitecalc::Outcome;

use crate::dsl::{Decl, Document};
use crate::report::{self, Report};
use crate::CliError;

pub const COMMANDS: [&str; 21] = [
    "validate",
    "saturate",
    "check-morphism",
    "check-comorphism",
    "check-flat",
    "check-dense",
    "check-exact",
    "check-locally-exact",
    "check-cofinal",
    "comma-site",
    "cocomma-site",
    "giraud",
    "tabulate",
    "sheafify",
    "compare-geometric",
    "cofree",
    "comonad-laws",
    "coalgebra",
    "correspondence",
    "normal-lax",
    "t-coalgebra",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Filters enumerated per object before the cofree site gives up.
    pub bound_filters: usize,
    pub flat_mode: FlatMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            bound_filters: DEFAULT_MAX_FILTERS,
            flat_mode: FlatMode::Shapes,
        }
    }
}

/// Reads `reduced` or `exhaustive:N`.
pub fn parse_flat_mode(text: &str) -> Result<FlatMode, CliError> {
    match text {
        "reduced" => Ok(FlatMode::Shapes),
        _ => text
            .strip_prefix("exhaustive:")
            .and_then(|n| n.parse().ok())
            .map(FlatMode::Exhaustive)
            .ok_or_else(|| CliError::Args(format!("flat mode `{text}`: expected `reduced` or `exhaustive:N`"))),
    }
}

/// Reads `k=v` pairs separated by commas.
pub fn parse_args<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        for pair in item.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Args(format!("`{pair}` is not of the form k=v")))?;
            out.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(out)
}

struct Args<'a>(&'a BTreeMap<String, String>);

impl Args<'_> {
    fn get(&self, key: &str) -> Result<&str, CliError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Args(format!("missing argument `{key}`")))
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// A functor between sites, written `F:J->K`.
struct SiteArrow {
    functor: FunctorMap,
    source: Site,
    target: Site,
}

impl SiteArrow {
    fn site_functor(&self) -> Result<SiteFunctor, CliError> {
        Ok(SiteFunctor::new(self.functor.clone(), self.source.clone(), self.target.clone())?)
    }
}

fn site_arrow(doc: &Document, spec: &str) -> Result<SiteArrow, CliError> {
    let bad = || CliError::Args(format!("`{spec}`: expected FUNCTOR:SITE->SITE"));
    let (f, sites) = spec.split_once(':').ok_or_else(bad)?;
    let (j, k) = sites.split_once("->").ok_or_else(bad)?;
    let functor = doc.functor(f.trim())?;
    let source = doc.site(j.trim())?;
    let target = doc.site(k.trim())?;
    if **functor.domain() != **source.category() || **functor.codomain() != **target.category() {
        return Err(CliError::Args(format!("`{spec}`: sites do not sit on the functor's categories")));
    }
    Ok(SiteArrow {
        functor,
        source,
        target,
    })
}

/// Runs one command against a parsed document.
pub fn run(
    command: &str,
    doc: &Document,
    args: &BTreeMap<String, String>,
    opts: &RunOptions,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut r = Report::new(command, args);
    let a = Args(args);
    match command {
        "validate" => validate(doc, &a, &mut r)?,
        "saturate" => saturate_cmd(doc, &a, &mut r)?,
        "check-morphism" => check_morphism(doc, &a, &mut r, opts)?,
        "check-comorphism" => check_comorphism(doc, &a, &mut r)?,
        "check-flat" => check_flat(doc, &a, &mut r, opts)?,
        "check-dense" => check_dense(doc, &a, &mut r)?,
        "check-exact" => check_exact(doc, &a, &mut r)?,
        "check-locally-exact" => check_locally_exact(doc, &a, &mut r)?,
        "check-cofinal" => check_cofinal(doc, &a, &mut r)?,
        "comma-site" => comma_cmd(doc, &a, &mut r, opts)?,
        "cocomma-site" => cocomma_cmd(doc, &a, &mut r)?,
        "giraud" => giraud_cmd(doc, &a, &mut r)?,
        "tabulate" => tabulate_cmd(doc, &a, &mut r)?,
        "sheafify" => sheafify_cmd(doc, &a, &mut r)?,
        "compare-geometric" => compare_geometric(doc, &a, &mut r)?,
        "cofree" => cofree_cmd(doc, &a, &mut r, opts)?,
        "comonad-laws" => comonad_laws(doc, &a, &mut r, opts)?,
        "coalgebra" => coalgebra_cmd(doc, &a, &mut r, opts)?,
        "correspondence" => correspondence(doc, &a, &mut r)?,
        "normal-lax" => normal_lax(doc, &a, &mut r, opts)?,
        "t-coalgebra" => t_coalgebra(doc, &a, &mut r, opts)?,
        other => return Err(CliError::UnknownCommand(other.to_string())),
    }
    r.timing_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

fn set_verdict(r: &mut Report, ok: bool) {
    r.verdict = Some(ok);
}

fn violation(cat: &FinCategory, v: &Violation) -> Value {
    let n = |a: usize| cat.arrow_name(a).to_string();
    match v {
        Violation::LeftIdentity { arrow } => json!({"law": "left_identity", "arrow": n(*arrow)}),
        Violation::RightIdentity { arrow } => json!({"law": "right_identity", "arrow": n(*arrow)}),
        Violation::MissingComposite { g, f } => json!({"law": "missing_composite", "g": n(*g), "f": n(*f)}),
        Violation::SpuriousComposite { g, f } => json!({"law": "spurious_composite", "g": n(*g), "f": n(*f)}),
        Violation::WrongEndpoints { g, f } => json!({"law": "wrong_endpoints", "g": n(*g), "f": n(*f)}),
        Violation::Associativity { h, g, f } => {
            let gf = cat.comp(*g, *f);
            let hg = cat.comp(*h, *g);
            json!({
                "law": "associativity",
                "h": n(*h),
                "g": n(*g),
                "f": n(*f),
                "h(gf)": cat.compose(*h, gf).map(n),
                "(hg)f": cat.compose(hg, *f).map(n),
            })
        }
    }
}

fn error_problem(e: CliError) -> Vec<Value> {
    vec![json!({"error": e.to_string()})]
}

fn validate(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let only = a.opt("name");
    if let Some(name) = only {
        if !doc.decls.iter().any(|d| d.name().text == name) {
            return Err(CliError::Unresolved {
                kind: "declaration",
                name: name.to_string(),
            });
        }
    }
    let mut checked = Vec::new();
    for decl in &doc.decls {
        let name = decl.name().text.as_str();
        if only.is_some_and(|n| n != name) {
            continue;
        }
        let problems: Vec<Value> = match decl {
            Decl::Category(_) => {
                let cat = doc.category(name)?;
                validate_category(&cat).violations.iter().map(|v| violation(&cat, v)).collect()
            }
            Decl::Site(_) => match doc.coverage(name) {
                Err(e) => error_problem(e),
                Ok(cov) => match saturate(&cov) {
                    Ok(_) => Vec::new(),
                    Err(sitecalc::Error::CoverageCondition { .. }) => vec![coverage_condition_witness(&cov)],
                    Err(e) => vec![json!({"error": e.to_string()})],
                },
            },
            Decl::Functor(_) => doc.functor(name).err().map(error_problem).unwrap_or_default(),
            Decl::Nat(_) => doc.nat(name).err().map(error_problem).unwrap_or_default(),
            Decl::Square(_) => doc.square(name).err().map(error_problem).unwrap_or_default(),
            Decl::Cell(_) => match doc.cell(name) {
                Err(e) => error_problem(e),
                Ok(cell) => validate_cell(&cell)
                    .problems
                    .iter()
                    .map(|p| match p {
                        CellProblem::Corner(s) => json!({"problem": "corner", "detail": s}),
                        CellProblem::Boundary(s) => json!({"problem": "boundary", "detail": s}),
                        CellProblem::NotMorphism { side, detail } => {
                            json!({"problem": "not_morphism", "side": side, "detail": detail})
                        }
                        CellProblem::NotComorphism { side, detail } => {
                            json!({"problem": "not_comorphism", "side": side, "detail": detail})
                        }
                    })
                    .collect(),
            },
        };
        checked.push(json!({"kind": decl.kind().keyword(), "name": name, "ok": problems.is_empty()}));
        for mut p in problems {
            p["declaration"] = json!(name);
            p["kind"] = json!(decl.kind().keyword());
            r.witnesses.push(p);
        }
    }
    r.detail("declarations", checked);
    set_verdict(r, r.witnesses.is_empty());
    Ok(())
}

/// The failing instance of the coverage condition, read on the covers with
/// the maximal sieves added, as saturation reads them.
fn coverage_condition_witness(cov: &Coverage) -> Value {
    let cat = cov.category().clone();
    let covers = cat
        .objects()
        .map(|c| {
            let mut s = cov.covers(c).clone();
            s.insert(Sieve::maximal(&cat, c));
            s
        })
        .collect();
    match check_axiom(&Coverage::from_sieves(cat.clone(), covers), Axiom::CoverageCondition) {
        Outcome::Fail(w) => report::axiom_witness(&cat, &w),
        Outcome::Pass => json!({"axiom": "coverage_condition"}),
    }
}

fn covers_json(site: &Site) -> Value {
    let cat = site.category();
    let mut m = serde_json::Map::new();
    for c in cat.objects() {
        let covers: Vec<Value> = site.covers(c).iter().map(|s| report::sieve(cat, s)).collect();
        m.insert(cat.object_name(c).to_string(), Value::Array(covers));
    }
    Value::Object(m)
}

fn saturate_cmd(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let cov = doc.coverage(a.get("site")?)?;
    match saturate(&cov) {
        Ok(site) => {
            r.detail("covers", covers_json(&site));
            let axioms: BTreeMap<&str, bool> = Axiom::ALL
                .iter()
                .map(|&ax| (ax.name(), check_axiom(site.topology(), ax).passed()))
                .collect();
            r.detail("axioms", axioms);
            set_verdict(r, true);
        }
        Err(sitecalc::Error::CoverageCondition { .. }) => {
            r.witnesses.push(coverage_condition_witness(&cov));
            set_verdict(r, false);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn preserving_witness(sa: &SiteArrow) -> Result<Option<Value>, CliError> {
    Ok(match is_cover_preserving(&sa.functor, &sa.source, &sa.target)? {
        Outcome::Pass => None,
        Outcome::Fail(w) => {
            let src = sa.functor.domain();
            Some(json!({
                "check": "cover_preserving",
                "object": src.object_name(w.object),
                "sieve": report::sieve(src, &w.sieve),
            }))
        }
    })
}

fn lifting_witness(sa: &SiteArrow) -> Result<Option<Value>, CliError> {
    Ok(match is_cover_lifting(&sa.functor, &sa.source, &sa.target)? {
        Outcome::Pass => None,
        Outcome::Fail(w) => {
            let (src, tgt) = (sa.functor.domain(), sa.functor.codomain());
            Some(json!({
                "check": "cover_lifting",
                "object": src.object_name(w.object),
                "sieve": report::sieve(tgt, &w.sieve),
            }))
        }
    })
}

fn flat_witness(sa: &SiteArrow, mode: FlatMode) -> Result<Option<Value>, CliError> {
    Ok(match is_covering_flat(&sa.functor, &sa.target, mode)? {
        Outcome::Pass => None,
        Outcome::Fail(w) => {
            let (src, tgt) = (sa.functor.domain(), sa.functor.codomain());
            Some(json!({
                "check": "covering_flat",
                "diagram": {
                    "objects": w.diagram.objects.iter().map(|&o| src.object_name(o)).collect::<Vec<_>>(),
                    "edges": w.diagram.edges.iter().map(|&(i, j, u)| json!([i, j, src.arrow_name(u)])).collect::<Vec<_>>(),
                },
                "vertex": tgt.object_name(w.vertex),
                "cone": w.cone.iter().map(|&u| tgt.arrow_name(u)).collect::<Vec<_>>(),
            }))
        }
    })
}

fn flat_mode_name(mode: FlatMode) -> String {
    match mode {
        FlatMode::Shapes => "reduced".into(),
        FlatMode::Exhaustive(n) => format!("exhaustive:{n}"),
    }
}

fn check_morphism(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let sa = site_arrow(doc, a.get("functor")?)?;
    let pres = preserving_witness(&sa)?;
    let flat = flat_witness(&sa, opts.flat_mode)?;
    r.detail("cover_preserving", pres.is_none());
    r.detail("covering_flat", flat.is_none());
    r.detail("flat_mode", flat_mode_name(opts.flat_mode));
    set_verdict(r, pres.is_none() && flat.is_none());
    r.witnesses.extend(pres.into_iter().chain(flat));
    Ok(())
}

fn check_comorphism(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let sa = site_arrow(doc, a.get("functor")?)?;
    let lift = lifting_witness(&sa)?;
    set_verdict(r, lift.is_none());
    r.witnesses.extend(lift);
    Ok(())
}

fn check_flat(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let sa = site_arrow(doc, a.get("functor")?)?;
    let flat = flat_witness(&sa, opts.flat_mode)?;
    r.detail("flat_mode", flat_mode_name(opts.flat_mode));
    set_verdict(r, flat.is_none());
    r.witnesses.extend(flat);
    Ok(())
}

fn check_dense(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let sa = site_arrow(doc, a.get("functor")?)?;
    match is_cover_dense(&sa.functor, &sa.target)? {
        Outcome::Pass => set_verdict(r, true),
        Outcome::Fail(d) => {
            set_verdict(r, false);
            r.witnesses
                .push(json!({"check": "cover_dense", "object": sa.functor.codomain().object_name(d)}));
        }
    }
    Ok(())
}

fn coend_witness(sq: &LaxSquare) -> Option<Value> {
    let Outcome::Fail(w) = is_exact_coend(sq) else { return None };
    let (tl, tr, bl, br) = (sq.top.domain(), sq.top.codomain(), sq.left.codomain(), sq.bottom.codomain());
    let pair = |p: &(usize, usize, usize)| {
        json!({"object": tl.object_name(p.0), "top_arrow": tr.arrow_name(p.1), "left_arrow": bl.arrow_name(p.2)})
    };
    let defect = match &w.defect {
        ExactnessDefect::Collapsed { first, second, image } => json!({
            "kind": "collapsed",
            "first": pair(first),
            "second": pair(second),
            "image": br.arrow_name(*image),
        }),
        ExactnessDefect::Missed { arrow } => json!({"kind": "missed", "arrow": br.arrow_name(*arrow)}),
    };
    Some(json!({
        "check": "exact_coend",
        "top_right": tr.object_name(w.top_right),
        "bottom_left": bl.object_name(w.bottom_left),
        "defect": defect,
    }))
}

fn check_exact(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let sq = doc.square(a.get("square")?)?;
    let coend = coend_witness(&sq);
    let fin = is_exact_final(&sq);
    r.detail("coend", coend.is_none());
    r.detail("final", fin.passed());
    r.detail("oracles_agree", coend.is_none() == fin.passed());
    if let Outcome::Fail(w) = &fin {
        r.witnesses.push(json!({
            "check": "exact_final",
            "bottom_left": sq.left.codomain().object_name(w.bottom_left),
        }));
    }
    set_verdict(r, coend.is_none());
    r.witnesses.extend(coend);
    Ok(())
}

fn cofinality_witness(
    site: &FinCategory,
    source: &FinCategory,
    target: &FinCategory,
    f: &CofinalityFailure,
) -> Value {
    match f {
        CofinalityFailure::Surjectivity {
            object,
            diagram_object,
            arrow,
        } => json!({
            "kind": "surjectivity",
            "object": site.object_name(*object),
            "diagram_object": target.object_name(*diagram_object),
            "arrow": site.arrow_name(*arrow),
        }),
        CofinalityFailure::Injectivity { object, first, second } => json!({
            "kind": "injectivity",
            "object": site.object_name(*object),
            "first": [source.object_name(first.0), site.arrow_name(first.1)],
            "second": [source.object_name(second.0), site.arrow_name(second.1)],
        }),
    }
}

fn check_locally_exact(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let cell = doc.cell(a.get("cell")?)?;
    let outcome = is_locally_exact(&cell)?;
    let sq = cell.square()?;
    let bl = sq.left.codomain().clone();
    let mut oracle = serde_json::Map::new();
    let mut all_iso = true;
    for c in bl.objects() {
        let (_, iso) = sheafified_comparison(&cell, c)?;
        all_iso &= iso.passed();
        oracle.insert(bl.object_name(c).to_string(), json!(iso.passed()));
    }
    r.detail("sheafified_comparison_iso", Value::Object(oracle));
    r.detail("oracle_agrees", outcome.passed() == all_iso);
    if let Outcome::Fail(w) = &outcome {
        let (over_c, over_hc, _) = comparison_functor(&sq, w.bottom_left);
        let mut v = cofinality_witness(
            cell.top_right.category(),
            &over_c.category,
            &over_hc.category,
            &w.failure,
        );
        v["check"] = json!("locally_exact");
        v["bottom_left"] = json!(bl.object_name(w.bottom_left));
        v["description"] = json!(w.description);
        r.witnesses.push(v);
    }
    set_verdict(r, outcome.passed());
    Ok(())
}

fn check_cofinal(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let site = doc.site(a.get("site")?)?;
    let along = doc.functor(a.get("along")?)?;
    let source = doc.functor(a.get("source")?)?;
    let target = doc.functor(a.get("target")?)?;
    let comparison = doc.nat(a.get("comparison")?)?;
    let (x, y) = (along.domain().clone(), along.codomain().clone());
    let problem = CofinalityProblem::new(site, along, source, target, comparison)?;
    match is_relatively_cofinal(&problem) {
        Outcome::Pass => set_verdict(r, true),
        Outcome::Fail(f) => {
            let mut v = cofinality_witness(problem.site.category(), &x, &y, &f);
            v["check"] = json!("relatively_cofinal");
            r.witnesses.push(v);
            set_verdict(r, false);
        }
    }
    Ok(())
}

fn comma_cmd(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let g = site_arrow(doc, a.get("g")?)?.site_functor()?;
    let f = site_arrow(doc, a.get("f")?)?.site_functor()?;
    let (cm, site, cell) = comma_site(&g, &f)?;
    r.detail("covers", covers_json(&site));
    let pi0 = SiteFunctor::new(cm.pi0.clone(), site.clone(), g.source.clone())?;
    let pi1 = SiteFunctor::new(cm.pi1.clone(), site.clone(), f.source.clone())?;
    let pi0_flat = is_covering_flat(&pi0.functor, &pi0.target, opts.flat_mode)?.passed();
    let checks = [
        ("pi0_morphism", pi0.is_morphism()),
        ("pi0_covering_flat", pi0_flat),
        ("pi1_comorphism", pi1.is_comorphism()),
        ("cell_valid", validate_cell(&cell).is_valid()),
        ("exact", is_exact_coend(&cell.square()?).passed()),
        ("locally_exact", is_locally_exact(&cell)?.passed()),
    ];
    for (k, v) in checks {
        r.detail(k, v);
        if !v {
            r.witnesses.push(json!({"check": k}));
        }
    }
    set_verdict(r, checks.iter().all(|c| c.1));
    Ok(())
}

fn cocomma_cmd(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let f = site_arrow(doc, a.get("f")?)?.site_functor()?;
    let g = site_arrow(doc, a.get("g")?)?.site_functor()?;
    let (_, site, cell) = cocomma_site(&f, &g)?;
    r.detail("covers", covers_json(&site));
    let checks = [
        ("cell_valid", validate_cell(&cell).is_valid()),
        ("exact", is_exact_coend(&cell.square()?).passed()),
        ("locally_exact", is_locally_exact(&cell)?.passed()),
    ];
    for (k, v) in checks {
        r.detail(k, v);
        if !v {
            r.witnesses.push(json!({"check": k}));
        }
    }
    r.notes
        .push("cocomma covers pull lext along the connecting arrows back to the left objects".into());
    set_verdict(r, checks.iter().all(|c| c.1));
    Ok(())
}

fn giraud_cmd(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let f = site_arrow(doc, a.get("functor")?)?.site_functor()?;
    let g = giraud_topology(&f)?;
    r.detail("covers", covers_json(&g.site));
    r.detail("pi_d_dense_morphism", g.pi_d_dense_morphism);
    r.detail("pi_d_comorphism", g.pi_d_comorphism);
    r.detail("pi_c_comorphism", g.pi_c_comorphism);
    r.detail("matches_comma_topology", g.matches_comma_topology);
    r.notes.push(GIRAUD_NOTE.to_string());
    set_verdict(r, g.pi_d_dense_morphism && g.pi_d_comorphism && g.pi_c_comorphism);
    Ok(())
}

fn tabulate_cmd(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let cell = doc.cell(a.get("cell")?)?;
    let t = tabulator_factorize(&cell)?;
    let b = t.factor.functor.domain();
    let comma_cat = t.factor.functor.codomain();
    let map: BTreeMap<&str, &str> = b
        .objects()
        .map(|x| (b.object_name(x), comma_cat.object_name(t.factor.functor.object(x))))
        .collect();
    r.detail("factor", map);
    r.detail("factor_is_comorphism", t.factor_is_comorphism);
    if let Some(x) = t.pasting_mismatch {
        r.witnesses.push(json!({"check": "pasting", "object": b.object_name(x)}));
    }
    if !t.factor_is_comorphism {
        r.witnesses.push(json!({"check": "factor_is_comorphism"}));
    }
    r.notes.push(GIRAUD_NOTE.to_string());
    set_verdict(r, t.pasting_mismatch.is_none() && t.factor_is_comorphism);
    Ok(())
}

fn sizes(x: &Presheaf) -> BTreeMap<String, usize> {
    let cat = x.base();
    cat.objects().map(|c| (cat.object_name(c).to_string(), x.size(c))).collect()
}

fn sheafify_cmd(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let site = doc.site(a.get("site")?)?;
    let cat = site.category().clone();
    let mut inputs: Vec<(String, Presheaf)> = Vec::new();
    match a.opt("presheaf").unwrap_or("representable") {
        "terminal" => inputs.push(("1".into(), Presheaf::terminal(cat.clone()))),
        "representable" => {
            let objects: Vec<usize> = match a.opt("object") {
                Some(name) => vec![cat
                    .object_by_name(name)
                    .ok_or_else(|| CliError::Args(format!("unknown object `{name}`")))?],
                None => cat.objects().collect(),
            };
            for c in objects {
                inputs.push((format!("y_{}", cat.object_name(c)), Presheaf::representable(cat.clone(), c)));
            }
        }
        other => return Err(CliError::Args(format!("presheaf `{other}`: expected representable or terminal"))),
    }
    let mut results = Vec::new();
    let mut ok = true;
    for (name, x) in inputs {
        let out = sheafify(&x, &site)?;
        let sheaf = is_sheaf(&out.output, &site)?;
        let again = sheafify(&out.output, &site)?;
        let idempotent = find_iso(&again.output, &out.output).is_some();
        let terminal = find_iso(&out.output, &Presheaf::terminal(cat.clone())).is_some();
        ok &= sheaf.passed() && idempotent;
        if let Outcome::Fail(w) = &sheaf {
            let family = match w {
                SheafFailure::NoAmalgamation { family } | SheafFailure::ManyAmalgamations { family, .. } => family,
            };
            r.witnesses.push(json!({
                "check": "is_sheaf",
                "presheaf": name,
                "object": cat.object_name(family.sieve.base()),
                "sieve": report::sieve(&cat, &family.sieve),
            }));
        }
        results.push(json!({
            "presheaf": name,
            "input_sizes": sizes(&x),
            "output_sizes": sizes(&out.output),
            "is_sheaf": sheaf.passed(),
            "idempotent": idempotent,
            "is_terminal": terminal,
        }));
    }
    r.detail("results", results);
    set_verdict(r, ok);
    Ok(())
}

fn compare_geometric(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let f = doc.functor(a.get("f")?)?;
    let g = doc.functor(a.get("g")?)?;
    let j = doc.site(a.get("source")?)?;
    let k = doc.site(a.get("target")?)?;
    match geometric_equality(&f, &g, &j, &k)? {
        Outcome::Pass => set_verdict(r, true),
        Outcome::Fail(c) => {
            r.witnesses
                .push(json!({"check": "geometric_equality", "object": j.category().object_name(c)}));
            set_verdict(r, false);
        }
    }
    Ok(())
}

fn cofree_of(cat: &std::sync::Arc<FinCategory>, a: &Args, opts: &RunOptions) -> Result<std::sync::Arc<CofreeCategory>, CliError> {
    let mode = match a.opt("mode").unwrap_or("upsets") {
        "upsets" => FilterMode::UpSets,
        "intersections" => FilterMode::Intersections,
        other => return Err(CliError::Args(format!("mode `{other}`: expected upsets or intersections"))),
    };
    let config = CofreeConfig {
        max_filters: opts.bound_filters,
        mode,
    };
    Ok(CofreeSite::new(cat.clone(), config).materialize()?)
}

fn cofree_object(m: &CofreeCategory, x: usize) -> Value {
    let o = &m.objects[x];
    json!({"object": m.base.object_name(o.object), "filter": report::filter(&m.base, &o.filter)})
}

fn cofree_cmd(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let cat = doc.category(a.get("category")?)?;
    let m = cofree_of(&cat, a, opts)?;
    r.detail("object_count", m.objects.len());
    r.detail("arrow_count", m.category.n_arrows());
    let objects: Vec<Value> = (0..m.objects.len()).map(|x| cofree_object(&m, x)).collect();
    r.detail("objects", objects);
    Ok(())
}

fn comonad_laws(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let cat = doc.category(a.get("category")?)?;
    let variant = match a.opt("variant").unwrap_or("standard") {
        "standard" => DeltaVariant::Standard,
        "drop-up-closure" => DeltaVariant::DropUpClosure,
        other => return Err(CliError::Args(format!("variant `{other}`: expected standard or drop-up-closure"))),
    };
    let m = cofree_of(&cat, a, opts)?;
    let report = check_comonad_laws(&m, None, variant)?;
    r.detail("objects_checked", report.objects_checked);
    for f in &report.failures {
        let law = match f.law {
            ComonadLaw::ProjectionAfterDelta => "projection_after_delta",
            ComonadLaw::ImageOfProjectionAfterDelta => "image_of_projection_after_delta",
            ComonadLaw::Coassociativity => "coassociativity",
        };
        r.witnesses
            .push(json!({"law": law, "object": cofree_object(&m, f.object), "reason": f.reason}));
    }
    set_verdict(r, report.passed());
    Ok(())
}

fn coalgebra_cmd(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    if let Some(name) = a.opt("site") {
        let site = doc.site(name)?;
        let m = cofree_of(site.category(), a, opts)?;
        let gamma = coverage_to_coalgebra(site.topology(), &m)?;
        let back = coalgebra_to_coverage(&gamma, &m)?;
        let cat = site.category();
        let section: Vec<Value> = cat.objects().map(|c| cofree_object(&m, gamma.section.object(c))).collect();
        r.detail("section", section);
        let round_trip = back == *site.topology();
        r.detail("round_trip", round_trip);
        set_verdict(r, round_trip);
    } else {
        let cat = doc.category(a.get("category")?)?;
        let m = cofree_of(&cat, a, opts)?;
        let census = coalgebra_census(&m)?;
        r.detail("sections", census.sections);
        r.detail("coverages", census.coverages);
        r.detail("bijection", census.bijection);
        set_verdict(r, census.bijection && census.sections == census.coverages);
    }
    Ok(())
}

fn correspondence(doc: &Document, a: &Args, r: &mut Report) -> Result<(), CliError> {
    let sa = site_arrow(doc, a.get("functor")?)?;
    let (lax, pres, colax, lift) = coalgebra_agreement(&sa.functor, sa.source.topology(), sa.target.topology())?;
    r.detail("lax_coalgebra_morphism", lax);
    r.detail("cover_preserving", pres);
    r.detail("colax_coalgebra_morphism", colax);
    r.detail("cover_lifting", lift);
    if lax != pres {
        r.witnesses.push(json!({"check": "lax_vs_preserving", "lax": lax, "cover_preserving": pres}));
    }
    if colax != lift {
        r.witnesses.push(json!({"check": "colax_vs_lifting", "colax": colax, "cover_lifting": lift}));
    }
    set_verdict(r, lax == pres && colax == lift);
    Ok(())
}

fn normal_lax(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let site = doc.site(a.get("site")?)?;
    let m = cofree_of(site.category(), a, opts)?;
    let rep = normal_lax_check(&site, &m)?;
    let cat = site.category();
    r.detail("inequality", rep.inequality);
    r.detail("strict", rep.is_strict());
    let eq_fail: Vec<&str> = rep.equality_failures.iter().map(|&c| cat.object_name(c)).collect();
    r.detail("equality_failures", eq_fail);
    for (c, s) in &rep.inclusion_failures {
        r.witnesses.push(json!({
            "check": "inclusion",
            "object": cat.object_name(*c),
            "sieve": report::sieve(cat, s),
        }));
    }
    r.notes.push("strict equality is reported, not required".into());
    set_verdict(r, rep.is_normal_lax());
    Ok(())
}

fn t_coalgebra(doc: &Document, a: &Args, r: &mut Report, opts: &RunOptions) -> Result<(), CliError> {
    let site = doc.site(a.get("site")?)?;
    let m = cofree_of(site.category(), a, opts)?;
    let failures = t_coalgebra_check(&site, &m)?;
    let cat = site.category();
    for c in &failures {
        r.witnesses.push(json!({"check": "t_comultiplication", "object": cat.object_name(*c)}));
    }
    r.notes.push("checked on the identity fibration".into());
    set_verdict(r, failures.is_empty());
    Ok(())
}
