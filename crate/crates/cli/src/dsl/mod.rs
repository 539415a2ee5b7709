//! The text format for categories, sites, functors, transformations,
//! squares and cells. See `GRAMMAR.md` at the crate root for the grammar.

mod lexer;
mod parser;
mod print;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sitecalc::doublecat::{DoubleCell, Orientation};
use sitecalc::exactness::LaxSquare;
use sitecalc::fincat::{FinCategory, FunctorMap, NatTransMap};
use sitecalc::site::{saturate, Coverage, Site};

pub use parser::parse;
pub use print::print;

use crate::CliError;

/// A 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct DslError {
    pub pos: Pos,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> Self {
        DslError {
            pos,
            message: message.into(),
        }
    }
}

/// A name with the place it was written. Equality ignores the position.
#[derive(Debug, Clone, Eq)]
pub struct Ident {
    pub text: String,
    pub pos: Pos,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Ident {
    pub fn new(text: impl Into<String>) -> Self {
        Ident {
            text: text.into(),
            pos: Pos::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowDecl {
    pub name: Ident,
    pub source: Ident,
    pub target: Ident,
}

/// `compose g f = h`, read `g∘f = h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composite {
    pub g: Ident,
    pub f: Ident,
    pub h: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryDecl {
    pub name: Ident,
    pub objects: Vec<Ident>,
    pub arrows: Vec<ArrowDecl>,
    pub composites: Vec<Composite>,
}

/// `cover c by { f, g }`: the sieve generated by the listed arrows covers `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverDecl {
    pub object: Ident,
    pub generators: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteDecl {
    pub name: Ident,
    pub category: Ident,
    pub covers: Vec<CoverDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorDecl {
    pub name: Ident,
    pub source: Ident,
    pub target: Ident,
    pub objects: Vec<(Ident, Ident)>,
    /// Non-identity arrows only; identities go to identities.
    pub arrows: Vec<(Ident, Ident)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatDecl {
    pub name: Ident,
    pub source: Ident,
    pub target: Ident,
    pub components: Vec<(Ident, Ident)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareDecl {
    pub name: Ident,
    pub top: Ident,
    pub left: Ident,
    pub right: Ident,
    pub bottom: Ident,
    pub filler: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellDecl {
    pub name: Ident,
    /// Top-left, top-right, bottom-left, bottom-right.
    pub sites: [Ident; 4],
    pub top: Ident,
    pub left: Ident,
    pub right: Ident,
    pub bottom: Ident,
    pub filler: Ident,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Category(CategoryDecl),
    Site(SiteDecl),
    Functor(FunctorDecl),
    Nat(NatDecl),
    Square(SquareDecl),
    Cell(CellDecl),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Category,
    Site,
    Functor,
    Nat,
    Square,
    Cell,
}

impl Kind {
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Category => "category",
            Kind::Site => "site",
            Kind::Functor => "functor",
            Kind::Nat => "nat",
            Kind::Square => "square",
            Kind::Cell => "cell",
        }
    }
}

impl Decl {
    pub fn name(&self) -> &Ident {
        match self {
            Decl::Category(d) => &d.name,
            Decl::Site(d) => &d.name,
            Decl::Functor(d) => &d.name,
            Decl::Nat(d) => &d.name,
            Decl::Square(d) => &d.name,
            Decl::Cell(d) => &d.name,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Decl::Category(_) => Kind::Category,
            Decl::Site(_) => Kind::Site,
            Decl::Functor(_) => Kind::Functor,
            Decl::Nat(_) => Kind::Nat,
            Decl::Square(_) => Kind::Square,
            Decl::Cell(_) => Kind::Cell,
        }
    }
}

/// A parsed document: declarations in order, every reference resolved
/// against an earlier declaration.
#[derive(Debug, Clone)]
pub struct Document {
    pub decls: Vec<Decl>,
    names: BTreeMap<(Kind, String), usize>,
    categories: BTreeMap<String, Arc<FinCategory>>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.decls == other.decls
    }
}

impl Eq for Document {}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn names(&self, kind: Kind) -> Vec<&str> {
        self.decls
            .iter()
            .filter(|d| d.kind() == kind)
            .map(|d| d.name().text.as_str())
            .collect()
    }

    pub fn decl(&self, kind: Kind, name: &str) -> Result<&Decl, CliError> {
        self.names
            .get(&(kind, name.to_string()))
            .map(|&i| &self.decls[i])
            .ok_or_else(|| CliError::Unresolved {
                kind: kind.keyword(),
                name: name.to_string(),
            })
    }

    /// The category as written, laws unchecked.
    pub fn category(&self, name: &str) -> Result<Arc<FinCategory>, CliError> {
        self.decl(Kind::Category, name)?;
        Ok(self.categories[name].clone())
    }

    /// The generating coverage of a site block.
    pub fn coverage(&self, name: &str) -> Result<Coverage, CliError> {
        let Decl::Site(d) = self.decl(Kind::Site, name)? else { unreachable!() };
        let cat = self.category(&d.category.text)?;
        let mut gens: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
        for cover in &d.covers {
            let c = cat.object_by_name(&cover.object.text).expect("resolved");
            let list = cover
                .generators
                .iter()
                .map(|g| cat.arrow_by_name(&g.text).expect("resolved"))
                .collect();
            gens.push((c, vec![list]));
        }
        Ok(Coverage::from_generators(&cat, gens)?)
    }

    /// The saturated site of a site block.
    pub fn site(&self, name: &str) -> Result<Site, CliError> {
        Ok(saturate(&self.coverage(name)?)?)
    }

    pub fn functor(&self, name: &str) -> Result<FunctorMap, CliError> {
        let Decl::Functor(d) = self.decl(Kind::Functor, name)? else { unreachable!() };
        let src = self.category(&d.source.text)?;
        let tgt = self.category(&d.target.text)?;
        let mut objects = vec![0; src.n_objects()];
        for (x, y) in &d.objects {
            objects[src.object_by_name(&x.text).expect("resolved")] = tgt.object_by_name(&y.text).expect("resolved");
        }
        let mut arrows: Vec<usize> = src.arrows().map(|a| if src.is_identity(a) {
            tgt.identity(objects[src.source(a)])
        } else {
            0
        }).collect();
        for (u, v) in &d.arrows {
            arrows[src.arrow_by_name(&u.text).expect("resolved")] = tgt.arrow_by_name(&v.text).expect("resolved");
        }
        Ok(FunctorMap::new(src, tgt, objects, arrows)?)
    }

    pub fn nat(&self, name: &str) -> Result<NatTransMap, CliError> {
        let Decl::Nat(d) = self.decl(Kind::Nat, name)? else { unreachable!() };
        let source = self.functor(&d.source.text)?;
        let target = self.functor(&d.target.text)?;
        let (dom, cod) = (source.domain().clone(), source.codomain().clone());
        let mut components = vec![0; dom.n_objects()];
        for (x, u) in &d.components {
            components[dom.object_by_name(&x.text).expect("resolved")] = cod.arrow_by_name(&u.text).expect("resolved");
        }
        Ok(NatTransMap::new(source, target, components)?)
    }

    pub fn square(&self, name: &str) -> Result<LaxSquare, CliError> {
        let Decl::Square(d) = self.decl(Kind::Square, name)? else { unreachable!() };
        Ok(LaxSquare::new(
            self.functor(&d.top.text)?,
            self.functor(&d.left.text)?,
            self.functor(&d.right.text)?,
            self.functor(&d.bottom.text)?,
            self.nat(&d.filler.text)?,
        )?)
    }

    /// The cell with its corner sites saturated. Shape problems are left to
    /// `validate_cell`.
    pub fn cell(&self, name: &str) -> Result<DoubleCell, CliError> {
        let Decl::Cell(d) = self.decl(Kind::Cell, name)? else { unreachable!() };
        let [tl, tr, bl, br] = &d.sites;
        Ok(DoubleCell {
            top_left: self.site(&tl.text)?,
            top_right: self.site(&tr.text)?,
            bottom_left: self.site(&bl.text)?,
            bottom_right: self.site(&br.text)?,
            top: self.functor(&d.top.text)?,
            left: self.functor(&d.left.text)?,
            right: self.functor(&d.right.text)?,
            bottom: self.functor(&d.bottom.text)?,
            filler: self.nat(&d.filler.text)?,
            orientation: d.orientation,
        })
    }

    /// The category a site block lives on.
    pub fn site_category(&self, name: &str) -> Result<String, CliError> {
        let Decl::Site(d) = self.decl(Kind::Site, name)? else { unreachable!() };
        Ok(d.category.text.clone())
    }
}
