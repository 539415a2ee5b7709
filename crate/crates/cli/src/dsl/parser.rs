use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use sitecalc::doublecat::Orientation;
use sitecalc::fincat::{CategoryBuilder, FinCategory};

use super::lexer::{lex, Tok};
use super::{
    ArrowDecl, CategoryDecl, CellDecl, Composite, CoverDecl, Decl, Document, DslError, FunctorDecl, Ident, Kind,
    NatDecl, Pos, SiteDecl, SquareDecl,
};

/// Parses a document and resolves every name in it. Category laws,
/// functoriality, naturality and the shape of squares and cells are not
/// checked here.
pub fn parse(text: &str) -> Result<Document, DslError> {
    let toks = lex(text)?;
    let end = toks.last().map(|t| t.1).unwrap_or(Pos { line: 1, col: 1 });
    let mut p = Parser { toks, at: 0, end };
    let mut decls = Vec::new();
    while !p.done() {
        decls.push(p.decl()?);
    }
    resolve(decls)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn done(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        match self.peek() {
            Some(t) => DslError::new(self.pos(), format!("expected {wanted}, found {}", t.describe())),
            None => DslError::new(self.pos(), format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DslError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek() == Some(&tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Ident, DslError> {
        match self.toks.get(self.at) {
            Some((Tok::Ident(s), pos)) => {
                let id = Ident {
                    text: s.clone(),
                    pos: *pos,
                };
                self.at += 1;
                Ok(id)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == word => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{word}`"))),
        }
    }

    fn end_item(&mut self) {
        self.eat(Tok::Semi);
    }

    /// Comma separated names up to (not including) `stop`.
    fn ident_list(&mut self, stop: &Tok) -> Result<Vec<Ident>, DslError> {
        let mut out = Vec::new();
        if self.peek() == Some(stop) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if !self.eat(Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn decl(&mut self) -> Result<Decl, DslError> {
        let head = self.ident()?;
        match head.text.as_str() {
            "category" => self.category().map(Decl::Category),
            "site" => self.site().map(Decl::Site),
            "functor" => self.functor().map(Decl::Functor),
            "nat" => self.nat().map(Decl::Nat),
            "square" => self.square().map(Decl::Square),
            "cell" => self.cell().map(Decl::Cell),
            other => Err(DslError::new(head.pos, format!("unknown block `{other}`"))),
        }
    }

    fn category(&mut self) -> Result<CategoryDecl, DslError> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut d = CategoryDecl {
            name,
            objects: Vec::new(),
            arrows: Vec::new(),
            composites: Vec::new(),
        };
        while !self.eat(Tok::RBrace) {
            let item = self.ident()?;
            match item.text.as_str() {
                "objects" => d.objects.extend(self.ident_list(&Tok::Semi)?),
                "arrow" => {
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let source = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let target = self.ident()?;
                    d.arrows.push(ArrowDecl { name, source, target });
                }
                "compose" => {
                    let g = self.ident()?;
                    let f = self.ident()?;
                    self.expect(Tok::Equals)?;
                    let h = self.ident()?;
                    d.composites.push(Composite { g, f, h });
                }
                other => {
                    return Err(DslError::new(
                        item.pos,
                        format!("expected `objects`, `arrow` or `compose`, found `{other}`"),
                    ))
                }
            }
            self.end_item();
        }
        Ok(d)
    }

    fn site(&mut self) -> Result<SiteDecl, DslError> {
        let name = self.ident()?;
        self.keyword("on")?;
        let category = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut covers = Vec::new();
        while !self.eat(Tok::RBrace) {
            self.keyword("cover")?;
            let object = self.ident()?;
            self.keyword("by")?;
            self.expect(Tok::LBrace)?;
            let generators = self.ident_list(&Tok::RBrace)?;
            self.expect(Tok::RBrace)?;
            covers.push(CoverDecl { object, generators });
            self.end_item();
        }
        Ok(SiteDecl { name, category, covers })
    }

    fn functor(&mut self) -> Result<FunctorDecl, DslError> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let source = self.ident()?;
        self.expect(Tok::Arrow)?;
        let target = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut d = FunctorDecl {
            name,
            source,
            target,
            objects: Vec::new(),
            arrows: Vec::new(),
        };
        while !self.eat(Tok::RBrace) {
            let item = self.ident()?;
            let from = self.ident()?;
            self.expect(Tok::Arrow)?;
            let to = self.ident()?;
            match item.text.as_str() {
                "object" => d.objects.push((from, to)),
                "arrow" => d.arrows.push((from, to)),
                other => {
                    return Err(DslError::new(
                        item.pos,
                        format!("expected `object` or `arrow`, found `{other}`"),
                    ))
                }
            }
            self.end_item();
        }
        Ok(d)
    }

    fn nat(&mut self) -> Result<NatDecl, DslError> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let source = self.ident()?;
        self.expect(Tok::DoubleArrow)?;
        let target = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut components = Vec::new();
        while !self.eat(Tok::RBrace) {
            self.keyword("component")?;
            let x = self.ident()?;
            self.expect(Tok::Equals)?;
            let u = self.ident()?;
            components.push((x, u));
            self.end_item();
        }
        Ok(NatDecl {
            name,
            source,
            target,
            components,
        })
    }

    /// Reads `field NAME;` items into a map, rejecting repeats.
    fn fields(&mut self, allowed: &[&str]) -> Result<(BTreeMap<String, Ident>, Vec<(Ident, Vec<Ident>)>), DslError> {
        let mut single = BTreeMap::new();
        let mut lists = Vec::new();
        while !self.eat(Tok::RBrace) {
            let key = self.ident()?;
            if !allowed.contains(&key.text.as_str()) {
                return Err(DslError::new(
                    key.pos,
                    format!("unexpected field `{}`; expected one of {}", key.text, allowed.join(", ")),
                ));
            }
            if key.text == "sites" {
                let list = self.ident_list(&Tok::Semi)?;
                lists.push((key, list));
            } else {
                let value = self.ident()?;
                if single.insert(key.text.clone(), value).is_some() {
                    return Err(DslError::new(key.pos, format!("field `{}` given twice", key.text)));
                }
            }
            self.end_item();
        }
        Ok((single, lists))
    }

    fn square(&mut self) -> Result<SquareDecl, DslError> {
        let name = self.ident()?;
        let open = self.pos();
        self.expect(Tok::LBrace)?;
        let (mut f, _) = self.fields(&["top", "left", "right", "bottom", "filler"])?;
        let mut take = |k: &str| f.remove(k).ok_or_else(|| DslError::new(open, format!("square is missing `{k}`")));
        Ok(SquareDecl {
            top: take("top")?,
            left: take("left")?,
            right: take("right")?,
            bottom: take("bottom")?,
            filler: take("filler")?,
            name,
        })
    }

    fn cell(&mut self) -> Result<CellDecl, DslError> {
        let name = self.ident()?;
        let open = self.pos();
        self.expect(Tok::LBrace)?;
        let (mut f, lists) = self.fields(&["sites", "top", "left", "right", "bottom", "filler", "orientation"])?;
        let sites = match lists.as_slice() {
            [(_, list)] if list.len() == 4 => [list[0].clone(), list[1].clone(), list[2].clone(), list[3].clone()],
            [(key, _)] => return Err(DslError::new(key.pos, "`sites` needs four site names")),
            [] => return Err(DslError::new(open, "cell is missing `sites`")),
            [_, (key, _), ..] => return Err(DslError::new(key.pos, "field `sites` given twice")),
        };
        let orientation = match f.remove("orientation") {
            None => Orientation::Lax,
            Some(o) if o.text == "lax" => Orientation::Lax,
            Some(o) if o.text == "oplax" => Orientation::Oplax,
            Some(o) => return Err(DslError::new(o.pos, "orientation is `lax` or `oplax`")),
        };
        let mut take = |k: &str| f.remove(k).ok_or_else(|| DslError::new(open, format!("cell is missing `{k}`")));
        Ok(CellDecl {
            top: take("top")?,
            left: take("left")?,
            right: take("right")?,
            bottom: take("bottom")?,
            filler: take("filler")?,
            name,
            sites,
            orientation,
        })
    }
}

fn unknown(id: &Ident, what: &str) -> DslError {
    DslError::new(id.pos, format!("unknown {what} `{}`", id.text))
}

struct Resolver {
    names: BTreeMap<(Kind, String), usize>,
    categories: BTreeMap<String, Arc<FinCategory>>,
    /// Functor name to its (source, target) category names.
    functors: BTreeMap<String, (String, String)>,
}

impl Resolver {
    fn category(&self, id: &Ident) -> Result<&Arc<FinCategory>, DslError> {
        self.categories.get(&id.text).ok_or_else(|| unknown(id, "category"))
    }

    fn functor(&self, id: &Ident) -> Result<&(String, String), DslError> {
        self.functors.get(&id.text).ok_or_else(|| unknown(id, "functor"))
    }

    fn require(&self, kind: Kind, id: &Ident) -> Result<(), DslError> {
        if self.names.contains_key(&(kind, id.text.clone())) {
            Ok(())
        } else {
            Err(unknown(id, kind.keyword()))
        }
    }
}

fn object_of(cat: &FinCategory, cat_name: &str, id: &Ident) -> Result<usize, DslError> {
    cat.object_by_name(&id.text)
        .ok_or_else(|| DslError::new(id.pos, format!("unknown object `{}` in category `{cat_name}`", id.text)))
}

fn arrow_of(cat: &FinCategory, cat_name: &str, id: &Ident) -> Result<usize, DslError> {
    cat.arrow_by_name(&id.text)
        .ok_or_else(|| DslError::new(id.pos, format!("unknown arrow `{}` in category `{cat_name}`", id.text)))
}

fn build_category(d: &CategoryDecl) -> Result<FinCategory, DslError> {
    let mut objects = BTreeSet::new();
    for o in &d.objects {
        if !objects.insert(o.text.as_str()) {
            return Err(DslError::new(o.pos, format!("object `{}` declared twice", o.text)));
        }
    }
    let mut arrows: BTreeSet<String> = d.objects.iter().map(|o| format!("id_{}", o.text)).collect();
    for a in &d.arrows {
        if !arrows.insert(a.name.text.clone()) {
            return Err(DslError::new(a.name.pos, format!("arrow `{}` declared twice", a.name.text)));
        }
        for end in [&a.source, &a.target] {
            if !objects.contains(end.text.as_str()) {
                return Err(DslError::new(end.pos, format!("unknown object `{}`", end.text)));
            }
        }
    }
    let mut b = CategoryBuilder::new();
    for o in &d.objects {
        b = b.object(&o.text);
    }
    for a in &d.arrows {
        b = b.arrow(&a.name.text, &a.source.text, &a.target.text);
    }
    for c in &d.composites {
        for x in [&c.g, &c.f, &c.h] {
            if !arrows.contains(&x.text) {
                return Err(DslError::new(x.pos, format!("unknown arrow `{}`", x.text)));
            }
        }
        b = b.compose(&c.g.text, &c.f.text, &c.h.text);
    }
    b.build().map_err(|e| DslError::new(d.name.pos, e.to_string()))
}

/// Checks every complete map: `seen` must hit each expected name once.
fn exactly_once<'a>(
    entries: impl Iterator<Item = &'a Ident>,
    expected: &[String],
    block: &Ident,
    what: &str,
) -> Result<(), DslError> {
    let mut seen = BTreeSet::new();
    for id in entries {
        if !seen.insert(id.text.clone()) {
            return Err(DslError::new(id.pos, format!("{what} `{}` mapped twice", id.text)));
        }
    }
    if let Some(missing) = expected.iter().find(|e| !seen.contains(*e)) {
        return Err(DslError::new(block.pos, format!("`{}` does not map {what} `{missing}`", block.text)));
    }
    Ok(())
}

fn resolve(decls: Vec<Decl>) -> Result<Document, DslError> {
    let mut r = Resolver {
        names: BTreeMap::new(),
        categories: BTreeMap::new(),
        functors: BTreeMap::new(),
    };
    for (i, decl) in decls.iter().enumerate() {
        match decl {
            Decl::Category(d) => {
                let cat = build_category(d)?;
                r.categories.insert(d.name.text.clone(), Arc::new(cat));
            }
            Decl::Site(d) => {
                let cat = r.category(&d.category)?;
                for cover in &d.covers {
                    let c = object_of(cat, &d.category.text, &cover.object)?;
                    for g in &cover.generators {
                        let u = arrow_of(cat, &d.category.text, g)?;
                        if cat.target(u) != c {
                            return Err(DslError::new(
                                g.pos,
                                format!("arrow `{}` does not end at `{}`", g.text, cover.object.text),
                            ));
                        }
                    }
                }
            }
            Decl::Functor(d) => {
                let src = r.category(&d.source)?;
                let tgt = r.category(&d.target)?;
                for (x, y) in &d.objects {
                    object_of(src, &d.source.text, x)?;
                    object_of(tgt, &d.target.text, y)?;
                }
                for (u, v) in &d.arrows {
                    let a = arrow_of(src, &d.source.text, u)?;
                    if src.is_identity(a) {
                        return Err(DslError::new(u.pos, "identity arrows are mapped implicitly"));
                    }
                    arrow_of(tgt, &d.target.text, v)?;
                }
                let obs: Vec<String> = src.object_names().to_vec();
                exactly_once(d.objects.iter().map(|p| &p.0), &obs, &d.name, "object")?;
                let arrs: Vec<String> = src
                    .arrows()
                    .filter(|&a| !src.is_identity(a))
                    .map(|a| src.arrow_name(a).to_string())
                    .collect();
                exactly_once(d.arrows.iter().map(|p| &p.0), &arrs, &d.name, "arrow")?;
                r.functors
                    .insert(d.name.text.clone(), (d.source.text.clone(), d.target.text.clone()));
            }
            Decl::Nat(d) => {
                let (s_dom, s_cod) = r.functor(&d.source)?.clone();
                let (t_dom, t_cod) = r.functor(&d.target)?.clone();
                if s_dom != t_dom || s_cod != t_cod {
                    return Err(DslError::new(
                        d.target.pos,
                        format!("`{}` and `{}` have different endpoints", d.source.text, d.target.text),
                    ));
                }
                let dom = &r.categories[&s_dom];
                let cod = &r.categories[&s_cod];
                for (x, u) in &d.components {
                    object_of(dom, &s_dom, x)?;
                    arrow_of(cod, &s_cod, u)?;
                }
                exactly_once(d.components.iter().map(|p| &p.0), dom.object_names(), &d.name, "object")?;
            }
            Decl::Square(d) => {
                for f in [&d.top, &d.left, &d.right, &d.bottom] {
                    r.require(Kind::Functor, f)?;
                }
                r.require(Kind::Nat, &d.filler)?;
            }
            Decl::Cell(d) => {
                for s in &d.sites {
                    r.require(Kind::Site, s)?;
                }
                for f in [&d.top, &d.left, &d.right, &d.bottom] {
                    r.require(Kind::Functor, f)?;
                }
                r.require(Kind::Nat, &d.filler)?;
            }
        }
        let key = (decl.kind(), decl.name().text.clone());
        if r.names.insert(key, i).is_some() {
            return Err(DslError::new(
                decl.name().pos,
                format!("{} `{}` declared twice", decl.kind().keyword(), decl.name().text),
            ));
        }
    }
    Ok(Document {
        decls,
        names: r.names,
        categories: r.categories,
    })
}
