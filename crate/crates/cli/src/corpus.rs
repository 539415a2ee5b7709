//! The enumerated corpus written out as documents.

use std::fmt::Write;

use sitecalc::corpus::{functors, generate, CorpusBounds};
use sitecalc::fincat::{FinCategory, FunctorMap};
use sitecalc::site::Site;

use crate::dsl::{parse, Document};
use crate::CliError;

fn arrow_name(cat: &FinCategory, a: usize) -> String {
    if cat.is_identity(a) {
        format!("id_{}", cat.object_name(cat.source(a)))
    } else {
        cat.arrow_name(a).to_string()
    }
}

/// A category block for `cat`. Identities must come first, as they do for
/// every category built from a block.
pub fn category_source(name: &str, cat: &FinCategory) -> String {
    let mut out = format!("category {name} {{\n");
    let objects: Vec<&str> = cat.objects().map(|o| cat.object_name(o)).collect();
    if !objects.is_empty() {
        writeln!(out, "  objects {};", objects.join(", ")).unwrap();
    }
    for a in cat.arrows().filter(|&a| !cat.is_identity(a)) {
        writeln!(
            out,
            "  arrow {} : {} -> {};",
            cat.arrow_name(a),
            cat.object_name(cat.source(a)),
            cat.object_name(cat.target(a))
        )
        .unwrap();
    }
    for g in cat.arrows().filter(|&a| !cat.is_identity(a)) {
        for f in cat.arrows().filter(|&a| !cat.is_identity(a)) {
            if let Some(h) = cat.table_entry(g, f) {
                writeln!(out, "  compose {} {} = {};", arrow_name(cat, g), arrow_name(cat, f), arrow_name(cat, h)).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// A site block listing every cover of `site`.
pub fn site_source(name: &str, category: &str, site: &Site) -> String {
    let cat = site.category();
    let mut out = format!("site {name} on {category} {{\n");
    for c in cat.objects() {
        for s in site.covers(c) {
            let gens: Vec<String> = s.arrows().map(|a| arrow_name(cat, a)).collect();
            if gens.is_empty() {
                writeln!(out, "  cover {} by {{ }};", cat.object_name(c)).unwrap();
            } else {
                writeln!(out, "  cover {} by {{ {} }};", cat.object_name(c), gens.join(", ")).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn functor_source(name: &str, source: &str, target: &str, f: &FunctorMap) -> String {
    let (c, d) = (f.domain(), f.codomain());
    let mut out = format!("functor {name} : {source} -> {target} {{\n");
    for x in c.objects() {
        writeln!(out, "  object {} -> {};", c.object_name(x), d.object_name(f.object(x))).unwrap();
    }
    for u in c.arrows().filter(|&u| !c.is_identity(u)) {
        writeln!(out, "  arrow {} -> {};", c.arrow_name(u), arrow_name(d, f.arrow(u))).unwrap();
    }
    out.push_str("}\n");
    out
}

/// One canonical document per corpus category, holding the category
/// (`C<i>`) and each of its topologies (`C<i>_J<k>`), in enumeration order.
pub fn corpus_documents(bounds: CorpusBounds) -> Result<Vec<Document>, CliError> {
    generate(bounds)?
        .into_iter()
        .map(|entry| {
            let mut text = category_source(&entry.name, &entry.category);
            for (k, site) in entry.sites.iter().enumerate() {
                text.push('\n');
                text.push_str(&site_source(&format!("{}_J{k}", entry.name), &entry.name, site));
            }
            Ok(parse(&crate::print(&parse(&text)?))?)
        })
        .collect()
}

/// Both categories with every functor from the first to the second
/// (`F<k>`).
pub fn functor_document(
    (source_name, source): (&str, &FinCategory),
    (target_name, target): (&str, &FinCategory),
) -> Result<Document, CliError> {
    let mut text = category_source(source_name, source);
    if source_name != target_name {
        text.push('\n');
        text.push_str(&category_source(target_name, target));
    }
    let (c, d) = (std::sync::Arc::new(source.clone()), std::sync::Arc::new(target.clone()));
    for (k, f) in functors(&c, &d).iter().enumerate() {
        text.push('\n');
        text.push_str(&functor_source(&format!("F{k}"), source_name, target_name, f));
    }
    Ok(parse(&text)?)
}
