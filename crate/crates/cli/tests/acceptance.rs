//! The sixteen acceptance criteria, one line each. Pass criterion numbers as
//! arguments to run a subset.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sitecalc::comonad::{
    check_comonad_laws, coalgebra_agreement, coalgebra_census, enumerate_cofree, normal_lax_check,
    t_coalgebra_check, terminal_obstruction, DeltaVariant, ObstructionKind, TerminalCandidate,
};
use sitecalc::corpus::{
    categories, enumerate_categories, functors, generate, presheaves, small_categories, squares, CorpusBounds,
};
use sitecalc::doublecat::{comma_site, validate_cell, DoubleCell, Orientation};
use sitecalc::exactness::{is_exact_coend, is_exact_final, is_locally_exact, LaxSquare};
use sitecalc::fincat::{cocomma, comma, is_fully_faithful, FinCategory, FunctorMap, Ob};
use sitecalc::fixtures;
use sitecalc::presheaf::{
    find_iso, lext_counit, lextend, lextend_map, restrict, restrict_map, rext_unit, rextend, rextend_map, Presheaf,
    PresheafMap,
};
use sitecalc::sheaf::{geometric_equality, is_sheaf, sheafified_comparison, sheafify};
use sitecalc::site::{all_sieves, all_topologies, pullback_sieve, Sieve, Site};
use sitecalc::sitemaps::{is_cover_lifting, is_cover_preserving, SiteFunctor};

use sitecalc_cli::{parse, parse_args, print, run, Document, RunOptions};

type Check = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn core<T>(r: sitecalc::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Every category with at most two objects and four arrows, then the
/// three-object fixtures.
fn corpus_categories() -> Vec<Arc<FinCategory>> {
    let mut out: Vec<Arc<FinCategory>> = enumerate_categories(2, 4).into_iter().map(Arc::new).collect();
    for (_, c) in categories() {
        if c.n_objects() > 2 {
            out.push(c);
        }
    }
    out
}

fn is_identity_map(m: &PresheafMap) -> bool {
    *m == PresheafMap::identity(m.source())
}

/// Largest number of candidate families `rext_f` would range over when
/// applied to `res_f z`.
fn end_width(f: &FunctorMap, z: &Presheaf) -> usize {
    let dc = f.codomain();
    dc.objects()
        .map(|d| {
            f.domain()
                .objects()
                .flat_map(|c| dc.hom(f.object(c), d).iter().map(move |_| z.size(f.object(c))))
                .fold(1usize, |acc, n| acc.saturating_mul(n))
        })
        .max()
        .unwrap_or(1)
}

const END_BUDGET: usize = 1 << 14;

/// The four triangle identities of `lext ⊣ res ⊣ rext` at `x` on the
/// domain and `y` on the codomain. The last flag records whether the
/// fourth one was evaluated element by element because `rext res rext X`
/// is too large to build.
fn triangles(f: &FunctorMap, x: &Presheaf, y: &Presheaf) -> sitecalc::Result<([bool; 4], bool)> {
    // ε_{lext X} ∘ lext(η_X) = 1
    let lx = lextend(f, x)?;
    let first = lextend_map(f, &lx.unit(x))?.then(&lext_counit(f, &lx.presheaf)?)?;
    // res(ε_Y) ∘ η_{res Y} = 1
    let ry = restrict(f, y)?;
    let second = lextend(f, &ry)?.unit(&ry).then(&restrict_map(f, &lext_counit(f, y)?)?)?;
    // ε_{res Y} ∘ res(η_Y) = 1
    let third = restrict_map(f, &rext_unit(f, y)?)?.then(&rextend(f, &ry)?.counit(&ry))?;
    // rext(ε_X) ∘ η_{rext X} = 1
    let rx = rextend(f, x)?;
    let epsilon = rx.counit(x);
    let (fourth, elementwise) = if end_width(f, &rx.presheaf) <= END_BUDGET {
        let m = rext_unit(f, &rx.presheaf)?.then(&rextend_map(f, &epsilon)?)?;
        (is_identity_map(&m), false)
    } else {
        // η sends a family φ at d to (rext X(v) φ)_v, and rext(ε) applies
        // ε slotwise
        let ok = f.codomain().objects().all(|d| {
            (0..rx.presheaf.size(d)).all(|k| {
                let image: Vec<usize> = rx
                    .slots(d)
                    .iter()
                    .map(|&(c, v)| epsilon.apply(c, rx.presheaf.act(v, k)))
                    .collect();
                image == rx.family(d, k)
            })
        });
        (ok, true)
    };
    Ok(([first, second, third].map(|m| is_identity_map(&m)).into_iter().chain([fourth]).collect::<Vec<_>>().try_into().expect("four flags"), elementwise))
}

fn criterion_1() -> Check {
    let cats = corpus_categories();
    let pools: Vec<Vec<Presheaf>> = cats
        .iter()
        .map(|c| presheaves(c, if c.n_objects() > 2 { 2 } else { 3 }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut instances, mut functor_count, mut elementwise) = (0, 0, 0);
    for (i, c) in cats.iter().enumerate() {
        for (j, d) in cats.iter().enumerate() {
            for f in functors(c, d) {
                functor_count += 1;
                let x = pools[i].choose(&mut rng).expect("the empty presheaf is always there");
                let y = pools[j].choose(&mut rng).expect("the empty presheaf is always there");
                let (ok, by_elements) = core(triangles(&f, x, y))?;
                elementwise += by_elements as usize;
                ensure(ok.iter().all(|&b| b), || {
                    format!("triangles {ok:?} for a functor from category {i} to {j}, X sizes {:?}, Y sizes {:?}", x.sizes(), y.sizes())
                })?;
                instances += 1;
            }
        }
    }
    ensure(instances >= 200, || format!("only {instances} instances"))?;
    Ok(format!(
        "{instances} sampled (functor, X, Y) instances over {} categories and {functor_count} functors; \
         {elementwise} fourth triangles evaluated element by element",
        cats.len()
    ))
}

fn criterion_2() -> Check {
    let cats: Vec<Arc<FinCategory>> = categories().into_iter().map(|p| p.1).collect();
    let (mut total, mut exact) = (0, 0);
    for tl in &cats {
        for tr in &cats {
            for bl in &cats {
                for br in &cats {
                    for sq in squares(tl, tr, bl, br) {
                        let coend = is_exact_coend(&sq).passed();
                        let fin = is_exact_final(&sq).passed();
                        ensure(coend == fin, || format!("disagreement (coend {coend}, final {fin}) on {sq:?}"))?;
                        total += 1;
                        exact += coend as usize;
                    }
                }
            }
        }
    }
    Ok(format!("{total} squares over the six fixture categories, {exact} exact, 0 discrepancies"))
}

fn criterion_3() -> Check {
    let cats: Vec<Arc<FinCategory>> = categories().into_iter().map(|p| p.1).collect();
    let (mut commas, mut cocommas) = (0, 0);
    for x in &cats {
        for y in &cats {
            for z in &cats {
                // comma of g: x -> z and f: y -> z
                for g in functors(x, z) {
                    for f in functors(y, z) {
                        let cm = core(comma(&g, &f))?;
                        let sq = core(LaxSquare::from_comma(&cm, &g, &f))?;
                        ensure(is_exact_coend(&sq).passed() && is_exact_final(&sq).passed(), || {
                            format!("comma square not exact: {sq:?}")
                        })?;
                        commas += 1;
                    }
                }
                // cocomma of f: z -> x and g: z -> y
                for f in functors(z, x) {
                    for g in functors(z, y) {
                        let cc = core(cocomma(&f, &g))?;
                        let sq = core(LaxSquare::from_cocomma(&cc, &f, &g))?;
                        ensure(is_exact_coend(&sq).passed() && is_exact_final(&sq).passed(), || {
                            format!("cocomma square not exact: {sq:?}")
                        })?;
                        cocommas += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{commas} comma and {cocommas} cocomma squares over the six fixture categories"))
}

/// `lext_f res_f y_d ≅ y_d` through the counit, at every `d`.
fn absolutely_dense(f: &FunctorMap) -> sitecalc::Result<bool> {
    for d in f.codomain().objects() {
        let yd = Presheaf::representable(f.codomain().clone(), d);
        if !lext_counit(f, &yd)?.is_iso().passed() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn criterion_4() -> Check {
    let cats = corpus_categories();
    let (mut total, mut ff, mut dense) = (0, 0, 0);
    for c in &cats {
        for d in &cats {
            for f in functors(c, d) {
                let full = is_fully_faithful(&f);
                let id_exact = is_exact_coend(&LaxSquare::identity_of(&f)).passed();
                ensure(full == id_exact, || format!("fully faithful {full}, identity square exact {id_exact}: {f:?}"))?;
                let dn = core(absolutely_dense(&f))?;
                let dual_exact = is_exact_coend(&LaxSquare::dual_identity_of(&f)).passed();
                ensure(dn == dual_exact, || format!("dense {dn}, dual square exact {dual_exact}: {f:?}"))?;
                total += 1;
                ff += full as usize;
                dense += dn as usize;
            }
        }
    }
    Ok(format!("{total} functors, {ff} fully faithful, {dense} absolutely dense"))
}

fn criterion_5() -> Check {
    let base = [fixtures::one(), fixtures::two(), fixtures::par()].map(Arc::new);
    let site_lists: Vec<Vec<Site>> = base.iter().map(all_topologies).collect();
    let (mut cells, mut local) = (0, 0);
    for tl in 0..3 {
        for tr in 0..3 {
            for bl in 0..3 {
                for br in 0..3 {
                    let sqs = squares(&base[tl], &base[tr], &base[bl], &base[br]);
                    if sqs.is_empty() {
                        continue;
                    }
                    for s_tl in &site_lists[tl] {
                        for s_tr in &site_lists[tr] {
                            for s_bl in &site_lists[bl] {
                                for s_br in &site_lists[br] {
                                    for sq in &sqs {
                                        let cell = DoubleCell {
                                            top_left: s_tl.clone(),
                                            top_right: s_tr.clone(),
                                            bottom_left: s_bl.clone(),
                                            bottom_right: s_br.clone(),
                                            top: sq.top.clone(),
                                            left: sq.left.clone(),
                                            right: sq.right.clone(),
                                            bottom: sq.bottom.clone(),
                                            filler: sq.filler.clone(),
                                            orientation: Orientation::Lax,
                                        };
                                        if !validate_cell(&cell).is_valid() {
                                            continue;
                                        }
                                        let verdict = core(is_locally_exact(&cell))?.passed();
                                        let mut oracle = true;
                                        for c in base[bl].objects() {
                                            oracle &= core(sheafified_comparison(&cell, c))?.1.passed();
                                        }
                                        ensure(verdict == oracle, || {
                                            format!("locally exact {verdict}, sheafified comparison iso {oracle}: {cell:?}")
                                        })?;
                                        cells += 1;
                                        local += verdict as usize;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cells} valid lax cells over One, Two, Par, {local} locally exact, 0 discrepancies"))
}

/// Every functor between the small corpus categories, on every pair of
/// topologies.
fn site_functors() -> Vec<SiteFunctor> {
    let cats: Vec<Arc<FinCategory>> = small_categories().into_iter().map(|p| p.1).collect();
    let mut out = Vec::new();
    for c in &cats {
        for d in &cats {
            let fs = functors(c, d);
            for j in all_topologies(c) {
                for k in all_topologies(d) {
                    for f in &fs {
                        out.push(SiteFunctor::new(f.clone(), j.clone(), k.clone()).expect("matching sites"));
                    }
                }
            }
        }
    }
    out
}

fn criterion_6() -> Check {
    let all = site_functors();
    let comorphisms: Vec<&SiteFunctor> = all.iter().filter(|s| s.is_comorphism()).collect();
    let morphisms: Vec<&SiteFunctor> = all.iter().filter(|s| s.is_morphism()).collect();
    let mut pairs = 0;
    for g in &comorphisms {
        for f in &morphisms {
            if f.target != g.target {
                continue;
            }
            let (cm, site, cell) = core(comma_site(g, f))?;
            let pi0 = core(SiteFunctor::new(cm.pi0.clone(), site.clone(), g.source.clone()))?;
            let pi1 = core(SiteFunctor::new(cm.pi1.clone(), site.clone(), f.source.clone()))?;
            ensure(pi0.is_morphism() && pi0.covering_flat(), || format!("π0 is not a morphism for {g:?} / {f:?}"))?;
            ensure(pi1.is_comorphism(), || format!("π1 is not a comorphism for {g:?} / {f:?}"))?;
            ensure(core(is_locally_exact(&cell))?.passed(), || format!("cell not locally exact for {g:?} / {f:?}"))?;
            pairs += 1;
        }
    }
    Ok(format!(
        "{pairs} (comorphism, morphism) pairs from {} comorphisms and {} morphisms on One, Two, Par and the discrete pair",
        comorphisms.len(),
        morphisms.len()
    ))
}

fn criterion_7() -> Check {
    let (mut instances, mut products) = (0, 0);
    for (_, c) in categories() {
        let pool = presheaves(&c, if c.n_objects() > 2 { 1 } else { 3 });
        for site in all_topologies(&c) {
            let terminal = Presheaf::terminal(c.clone());
            let at = core(sheafify(&terminal, &site))?.output;
            ensure(find_iso(&at, &terminal).is_some(), || "terminal not preserved".into())?;
            let mut sheaves = Vec::new();
            for x in &pool {
                let ax = core(sheafify(x, &site))?;
                ensure(core(is_sheaf(&ax.output, &site))?.passed(), || format!("output not a sheaf: {x:?}"))?;
                let again = core(sheafify(&ax.output, &site))?;
                ensure(again.unit.is_iso().passed(), || format!("not idempotent on {x:?}"))?;
                if core(is_sheaf(x, &site))?.passed() {
                    sheaves.push(x.clone());
                }
                instances += 1;
            }
            for x in sheaves.iter().filter(|x| x.sizes().iter().all(|&n| n <= 2)) {
                for y in &sheaves {
                    let prod = core(x.product(y))?;
                    let a_prod = core(sheafify(&prod, &site))?.output;
                    let prod_a = core(core(sheafify(x, &site))?.output.product(&core(sheafify(y, &site))?.output))?;
                    ensure(find_iso(&a_prod, &prod_a).is_some(), || "binary product not preserved".into())?;
                    products += 1;
                }
            }
        }
    }
    let two_f = fixtures::two_f();
    let two = two_f.category().clone();
    let t = Presheaf::terminal(two.clone());
    for c in two.objects() {
        let out = core(sheafify(&Presheaf::representable(two.clone(), c), &two_f))?.output;
        ensure(find_iso(&out, &t).is_some(), || format!("sheafified y_{c} on Two_f is not terminal"))?;
    }
    Ok(format!(
        "{instances} (site, presheaf) instances, {products} products of a sheaf with fibers at most 2 and any sheaf; \
         on Two_f both representables sheafify to the terminal"
    ))
}

fn criterion_8() -> Check {
    let mut parts = Vec::new();
    for (name, c) in [("One", fixtures::one()), ("Two", fixtures::two())] {
        let m = core(enumerate_cofree(&Arc::new(c)))?;
        let report = core(check_comonad_laws(&m, None, DeltaVariant::Standard))?;
        ensure(report.passed(), || format!("{name}: {:?}", report.failures))?;
        ensure(report.objects_checked == m.objects.len(), || format!("{name}: not every object checked"))?;
        parts.push(format!("{name} {} objects", report.objects_checked));
    }
    Ok(format!("counit and coassociativity laws on {}", parts.join(", ")))
}

fn criterion_9() -> Check {
    let one = core(enumerate_cofree(&Arc::new(fixtures::one())))?.objects.len();
    let two = core(enumerate_cofree(&Arc::new(fixtures::two())))?.objects.len();
    ensure(one == 2 && two == 5, || format!("object counts {one} and {two}"))?;
    Ok(format!("cofree site on One has {one} objects, on Two {two}"))
}

/// Up-closed sets of sieves on `c` containing the maximal one.
fn filters_on(cat: &FinCategory, c: Ob) -> Vec<BTreeSet<Sieve>> {
    let sieves = all_sieves(cat, c);
    let max = Sieve::maximal(cat, c);
    (0u32..1 << sieves.len())
        .map(|bits| {
            sieves
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|p| p.1.clone())
                .collect::<BTreeSet<Sieve>>()
        })
        .filter(|set| set.contains(&max))
        .filter(|set| {
            set.iter()
                .all(|s| sieves.iter().filter(|t| s.is_subset(t)).all(|t| set.contains(t)))
        })
        .collect()
}

/// Families of filters, one per object, stable under pullback.
fn count_coverages(cat: &FinCategory) -> usize {
    let per_object: Vec<Vec<BTreeSet<Sieve>>> = cat.objects().map(|c| filters_on(cat, c)).collect();
    let mut families: Vec<Vec<&BTreeSet<Sieve>>> = vec![Vec::new()];
    for options in &per_object {
        families = families
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o);
                    p
                })
            })
            .collect();
    }
    families
        .iter()
        .filter(|fam| {
            cat.arrows().all(|u| {
                fam[cat.target(u)]
                    .iter()
                    .all(|s| fam[cat.source(u)].contains(&pullback_sieve(cat, u, s).expect("u ends at the base")))
            })
        })
        .count()
}

fn criterion_10() -> Check {
    let mut parts = Vec::new();
    for (name, c) in [("One", fixtures::one()), ("Two", fixtures::two())] {
        let c = Arc::new(c);
        let m = core(enumerate_cofree(&c))?;
        let census = core(coalgebra_census(&m))?;
        // sections of the projection, found among all functors into the
        // cofree category
        let sections = functors(&c, &m.category)
            .into_iter()
            .filter(|s| m.projection.after(s).map(|p| p == FunctorMap::identity(c.clone())).unwrap_or(false))
            .count();
        let coverages = count_coverages(&c);
        ensure(census.bijection, || format!("{name}: translation is not a bijection"))?;
        ensure(census.sections == sections && census.coverages == coverages && sections == coverages, || {
            format!(
                "{name}: census ({}, {}), independent ({sections}, {coverages})",
                census.sections, census.coverages
            )
        })?;
        parts.push(format!("{name} {coverages}"));
    }
    Ok(format!("coverages = coalgebra sections, bijective: {}", parts.join(", ")))
}

fn criterion_11() -> Check {
    let two = Arc::new(fixtures::two());
    let sites = all_topologies(&two);
    let mut cases = 0;
    for f in functors(&two, &two) {
        for j in &sites {
            for k in &sites {
                let (lax, pres, colax, lift) = core(coalgebra_agreement(&f, j.topology(), k.topology()))?;
                let pres_direct = core(is_cover_preserving(&f, j, k))?.passed();
                let lift_direct = core(is_cover_lifting(&f, j, k))?.passed();
                ensure(lax == pres && pres == pres_direct, || format!("lax {lax}, preserving {pres}/{pres_direct}"))?;
                ensure(colax == lift && lift == lift_direct, || {
                    format!("colax {colax}, lifting {lift}/{lift_direct}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (functor, J, K) cases on Two, 0 disagreements"))
}

fn criterion_12() -> Check {
    let point = Arc::new(fixtures::one());
    let mut names = Vec::new();
    let mut sites = Vec::new();
    for (name, c) in small_categories() {
        for (k, site) in all_topologies(&c).into_iter().enumerate() {
            names.push(format!("{name} topology {k}"));
            sites.push(site);
        }
    }
    let found = core(terminal_obstruction(&point, &sites))?;
    ensure(found.len() == 2, || format!("obstructions found: {found:?}"))?;
    let mut lines = Vec::new();
    for o in &found {
        let site = &sites[o.site];
        let bang = FunctorMap::to_terminal(site.category().clone(), point.clone());
        let target = match o.candidate {
            TerminalCandidate::Trivial => Site::trivial(point.clone()),
            TerminalCandidate::Total => Site::total(point.clone()),
        };
        match (o.candidate, o.kind) {
            (TerminalCandidate::Trivial, ObstructionKind::EmptySieveImage { object }) => {
                ensure(site.is_cover(&Sieve::empty(site.category(), object)), || "empty sieve does not cover".into())?;
                ensure(!core(is_cover_preserving(&bang, site, &target))?.passed(), || "! preserves covers".into())?;
                lines.push(format!("trivial point: {} is not cover-preserving (empty sieve image)", names[o.site]));
            }
            (TerminalCandidate::Total, ObstructionKind::EmptySieveLift { object }) => {
                ensure(!site.is_cover(&Sieve::empty(site.category(), object)), || "empty sieve covers".into())?;
                ensure(!core(is_cover_lifting(&bang, site, &target))?.passed(), || "! lifts covers".into())?;
                lines.push(format!("total point: {} is not cover-lifting (no empty cover)", names[o.site]));
            }
            other => return Err(format!("unexpected obstruction {other:?}")),
        }
    }
    Ok(lines.join("; "))
}

fn criterion_13() -> Check {
    let two = Arc::new(fixtures::two());
    let b = two.object_by_name("b").expect("Two has b");
    let (point, inclusion) = two.full_subcategory(&[b]);
    let collapse = FunctorMap::to_terminal(two.clone(), point.clone());
    let outcome = core(geometric_equality(
        &inclusion,
        &collapse,
        &Site::trivial(point.clone()),
        &Site::trivial(two.clone()),
    ))?;
    ensure(outcome.passed(), || format!("inverse images differ at {:?}", outcome.witness()))?;
    Ok("inverse images agree on every representable for {b} ⇄ Two".into())
}

fn heavy_corpus() -> Result<Vec<sitecalc::corpus::CorpusEntry>, String> {
    core(generate(CorpusBounds {
        max_objects: 2,
        max_arrows: 4,
        max_topologies: 64,
    }))
}

/// Runs `check` on every corpus site. Categories whose cofree
/// constructions exceed the configured bounds are listed, not checked.
fn over_corpus_sites(
    mut check: impl FnMut(&str, &Site, &sitecalc::comonad::CofreeCategory) -> Result<(), String>,
) -> Result<(usize, Vec<String>), String> {
    let (mut sites, mut out_of_bounds) = (0, Vec::new());
    for entry in heavy_corpus()? {
        let m = core(enumerate_cofree(&entry.category))?;
        let mut entry_sites = 0;
        for site in &entry.sites {
            match check(&entry.name, site, &m) {
                Err(e) if e.starts_with("bound exceeded") => {
                    out_of_bounds.push(entry.name.clone());
                    entry_sites = 0;
                    break;
                }
                Err(e) => return Err(e),
                Ok(()) => entry_sites += 1,
            }
        }
        sites += entry_sites;
    }
    Ok((sites, out_of_bounds))
}

fn criterion_14() -> Check {
    let mut strict = 0;
    let (sites, skipped) = over_corpus_sites(|name, site, m| {
        let r = core(normal_lax_check(site, m))?;
        ensure(r.is_normal_lax(), || format!("{name}: {r:?}"))?;
        strict += r.is_strict() as usize;
        Ok(())
    })?;
    Ok(format!(
        "{sites} corpus sites normal lax; strict equality on {strict} of them; beyond the sieve bound: {skipped:?}"
    ))
}

fn criterion_15() -> Check {
    let (sites, skipped) = over_corpus_sites(|name, site, m| {
        let failures = core(t_coalgebra_check(site, m))?;
        ensure(failures.is_empty(), || format!("{name}: objects {failures:?}"))
    })?;
    Ok(format!("{sites} corpus sites pass on the identity fibration; beyond the sieve bound: {skipped:?}"))
}

fn fixture_texts() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .expect("fixtures directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "sc"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("readable fixture"))
        })
        .collect();
    out.sort();
    out
}

/// Runs every command on the fixtures. A run that errors is recorded as
/// its message so the comparison still covers it.
fn all_reports() -> Result<Vec<String>, String> {
    let runs: &[(&str, &str, &str)] = &[
        ("two.sc", "validate", ""),
        ("nonassoc.sc", "validate", ""),
        ("two.sc", "saturate", "site=Two_f"),
        ("two.sc", "check-morphism", "functor=I:Two_triv->Two_f"),
        ("two.sc", "check-comorphism", "functor=I:Two_triv->Two_f"),
        ("two.sc", "check-flat", "functor=I:Two_triv->Two_f"),
        ("two.sc", "check-dense", "functor=Ka:Two_triv->Two_f"),
        ("comma.sc", "check-exact", "square=Comma"),
        ("two.sc", "check-locally-exact", "cell=IdF"),
        ("conjoint.sc", "check-locally-exact", "cell=Unit"),
        ("two.sc", "check-cofinal", "site=Two_f,along=I,source=I,target=Kb,comparison=up"),
        ("comma.sc", "comma-site", "g=G:B_triv->Two_f,f=F:C_triv->Two_f"),
        ("two.sc", "cocomma-site", "f=I:Two_f->Two_f,g=I:Two_f->Two_f"),
        ("two.sc", "giraud", "functor=I:Two_triv->Two_f"),
        ("conjoint.sc", "tabulate", "cell=Unit"),
        ("two.sc", "sheafify", "site=Two_f"),
        ("conjoint.sc", "compare-geometric", "f=i,g=bang,source=B_triv,target=Two_triv"),
        ("point.sc", "cofree", "category=One"),
        ("two.sc", "comonad-laws", "category=Two"),
        ("two.sc", "coalgebra", "category=Two"),
        ("two.sc", "correspondence", "functor=I:Two_triv->Two_f"),
        ("two.sc", "normal-lax", "site=Two_f"),
        ("two.sc", "t-coalgebra", "site=Two_f"),
    ];
    let texts: BTreeMap<String, String> = fixture_texts().into_iter().collect();
    let opts = RunOptions::default();
    let mut out = Vec::new();
    for (file, command, args) in runs {
        let doc = parse(&texts[*file]).map_err(|e| format!("{file}: {e}"))?;
        let args = parse_args([*args]).map_err(|e| e.to_string())?;
        out.push(match run(command, &doc, &args, &opts) {
            Ok(r) => r.untimed().to_json(),
            Err(e) => format!("error: {e}"),
        });
    }
    Ok(out)
}

fn criterion_16() -> Check {
    let mut docs: Vec<(String, Document)> = Vec::new();
    for (name, text) in fixture_texts() {
        docs.push((name.clone(), parse(&text).map_err(|e| format!("{name}: {e}"))?));
    }
    let corpus = sitecalc_cli::corpus::corpus_documents(CorpusBounds {
        max_objects: 2,
        max_arrows: 3,
        max_topologies: 64,
    })
    .map_err(|e| e.to_string())?;
    for (i, d) in corpus.into_iter().enumerate() {
        docs.push((format!("corpus document {i}"), d));
    }
    for (name, doc) in &docs {
        let canonical = print(doc);
        let reparsed = parse(&canonical).map_err(|e| format!("{name}: {e}"))?;
        ensure(reparsed == *doc, || format!("{name}: parse(print(d)) differs"))?;
        ensure(print(&reparsed) == canonical, || format!("{name}: print(parse(t)) differs"))?;
    }
    let first = all_reports()?;
    let second = all_reports()?;
    ensure(first == second, || "reports differ between runs".into())?;
    ensure(!first.iter().any(|r| r.starts_with("error")), || {
        format!("a fixture run errored: {:?}", first.iter().find(|r| r.starts_with("error")))
    })?;
    Ok(format!("{} documents round-trip; {} reports byte-identical across two runs", docs.len(), first.len()))
}

const CRITERIA: [(u32, &str, fn() -> Check); 16] = [
    (1, "adjoint-triple triangle identities", criterion_1),
    (2, "coend and finality exactness agree", criterion_2),
    (3, "comma and cocomma squares are exact", criterion_3),
    (4, "fully faithful and absolutely dense via identity squares", criterion_4),
    (5, "local exactness matches the sheafified comparison", criterion_5),
    (6, "comma-site projections and local exactness", criterion_6),
    (7, "sheafification properties", criterion_7),
    (8, "comonad laws on the cofree sites of One and Two", criterion_8),
    (9, "cofree object counts", criterion_9),
    (10, "coverage and coalgebra bijection", criterion_10),
    (11, "coalgebra morphisms match cover preservation and lifting", criterion_11),
    (12, "terminal-object obstruction", criterion_12),
    (13, "geometric equality for {b} and Two", criterion_13),
    (14, "normal lax coalgebra inequality", criterion_14),
    (15, "coalgebra on the identity fibration", criterion_15),
    (16, "document round trip and report determinism", criterion_16),
];

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, title, check) in CRITERIA {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {title}: {detail} ({secs:.1}s)"),
            Err(why) => {
                println!("criterion {n:>2} FAIL {title}: {why} ({secs:.1}s)");
                failed.push(n);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
