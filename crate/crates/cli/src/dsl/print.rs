use std::collections::BTreeMap;
use std::fmt::Write;

use sitecalc::doublecat::Orientation;

use super::{Decl, Document};

/// Prints the canonical form: composites deduplicated (the last one wins)
/// and sorted by arrow position, implicit identity composites dropped,
/// cover generators sorted and deduplicated, functor and transformation
/// entries in declaration order of the source category, and every field
/// of squares and cells spelled out.
pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    for (i, decl) in doc.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match decl {
            Decl::Category(d) => {
                let cat = doc.category(&d.name.text).expect("resolved");
                writeln!(out, "category {} {{", d.name.text).unwrap();
                if !d.objects.is_empty() {
                    let names: Vec<&str> = d.objects.iter().map(|o| o.text.as_str()).collect();
                    writeln!(out, "  objects {};", names.join(", ")).unwrap();
                }
                for a in &d.arrows {
                    writeln!(out, "  arrow {} : {} -> {};", a.name.text, a.source.text, a.target.text).unwrap();
                }
                let id = |name: &str| cat.arrow_by_name(name).expect("resolved");
                let mut composites = BTreeMap::new();
                for c in &d.composites {
                    composites.insert((id(&c.g.text), id(&c.f.text)), id(&c.h.text));
                }
                for ((g, f), h) in composites {
                    let implicit = (cat.is_identity(g) && cat.target(f) == cat.source(g) && h == f)
                        || (cat.is_identity(f) && cat.source(g) == cat.target(f) && h == g);
                    if !implicit {
                        writeln!(
                            out,
                            "  compose {} {} = {};",
                            cat.arrow_name(g),
                            cat.arrow_name(f),
                            cat.arrow_name(h)
                        )
                        .unwrap();
                    }
                }
                out.push_str("}\n");
            }
            Decl::Site(d) => {
                let cat = doc.category(&d.category.text).expect("resolved");
                writeln!(out, "site {} on {} {{", d.name.text, d.category.text).unwrap();
                let mut covers = std::collections::BTreeSet::new();
                for c in &d.covers {
                    let object = cat.object_by_name(&c.object.text).expect("resolved");
                    let mut gens: Vec<usize> = c
                        .generators
                        .iter()
                        .map(|g| cat.arrow_by_name(&g.text).expect("resolved"))
                        .collect();
                    gens.sort_unstable();
                    gens.dedup();
                    covers.insert((object, gens));
                }
                for (object, gens) in covers {
                    let names: Vec<&str> = gens.iter().map(|&g| cat.arrow_name(g)).collect();
                    if names.is_empty() {
                        writeln!(out, "  cover {} by {{ }};", cat.object_name(object)).unwrap();
                    } else {
                        writeln!(out, "  cover {} by {{ {} }};", cat.object_name(object), names.join(", ")).unwrap();
                    }
                }
                out.push_str("}\n");
            }
            Decl::Functor(d) => {
                let src = doc.category(&d.source.text).expect("resolved");
                writeln!(out, "functor {} : {} -> {} {{", d.name.text, d.source.text, d.target.text).unwrap();
                let objects: BTreeMap<usize, &str> = d
                    .objects
                    .iter()
                    .map(|(x, y)| (src.object_by_name(&x.text).expect("resolved"), y.text.as_str()))
                    .collect();
                for (x, y) in objects {
                    writeln!(out, "  object {} -> {};", src.object_name(x), y).unwrap();
                }
                let arrows: BTreeMap<usize, &str> = d
                    .arrows
                    .iter()
                    .map(|(u, v)| (src.arrow_by_name(&u.text).expect("resolved"), v.text.as_str()))
                    .collect();
                for (u, v) in arrows {
                    writeln!(out, "  arrow {} -> {};", src.arrow_name(u), v).unwrap();
                }
                out.push_str("}\n");
            }
            Decl::Nat(d) => {
                let Decl::Functor(f) = doc.decl(super::Kind::Functor, &d.source.text).expect("resolved") else {
                    unreachable!()
                };
                let dom = doc.category(&f.source.text).expect("resolved");
                writeln!(out, "nat {} : {} => {} {{", d.name.text, d.source.text, d.target.text).unwrap();
                let comps: BTreeMap<usize, &str> = d
                    .components
                    .iter()
                    .map(|(x, u)| (dom.object_by_name(&x.text).expect("resolved"), u.text.as_str()))
                    .collect();
                for (x, u) in comps {
                    writeln!(out, "  component {} = {};", dom.object_name(x), u).unwrap();
                }
                out.push_str("}\n");
            }
            Decl::Square(d) => {
                writeln!(out, "square {} {{", d.name.text).unwrap();
                for (k, v) in [
                    ("top", &d.top),
                    ("left", &d.left),
                    ("right", &d.right),
                    ("bottom", &d.bottom),
                    ("filler", &d.filler),
                ] {
                    writeln!(out, "  {k} {};", v.text).unwrap();
                }
                out.push_str("}\n");
            }
            Decl::Cell(d) => {
                writeln!(out, "cell {} {{", d.name.text).unwrap();
                let sites: Vec<&str> = d.sites.iter().map(|s| s.text.as_str()).collect();
                writeln!(out, "  sites {};", sites.join(", ")).unwrap();
                for (k, v) in [
                    ("top", &d.top),
                    ("left", &d.left),
                    ("right", &d.right),
                    ("bottom", &d.bottom),
                    ("filler", &d.filler),
                ] {
                    writeln!(out, "  {k} {};", v.text).unwrap();
                }
                let o = match d.orientation {
                    Orientation::Lax => "lax",
                    Orientation::Oplax => "oplax",
                };
                writeln!(out, "  orientation {o};").unwrap();
                out.push_str("}\n");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    const TRI: &str = "category Tri {\n  objects a, b, c;\n  arrow f : a -> b;\n  arrow g : b -> c;\n  arrow h : a -> c;\n  compose g f = h;\n}\n";

    #[test]
    fn canonical_text_is_fixed() {
        let doc = parse(TRI).unwrap();
        assert_eq!(print(&doc), TRI);
        assert_eq!(parse(&print(&doc)).unwrap(), doc);
    }

    #[test]
    fn canonicalization() {
        let messy = "category Tri { objects a, b; objects c arrow f : a -> b arrow g : b -> c\n\
                     arrow h : a -> c compose g f = f compose g f = h compose id_c g = g }\n\
                     site S on Tri { cover c by { h, g, g } cover c by {g,h} }";
        let doc = parse(messy).unwrap();
        let text = print(&doc);
        assert!(text.starts_with(TRI));
        assert!(text.contains("  cover c by { g, h };\n}"));
        assert_eq!(text.matches("cover").count(), 1);
        assert_eq!(print(&parse(&text).unwrap()), text);
    }
}
