//! Site-theoretic calculus on finite categories.
//!
//! Everything here works on categories small enough to hold as an explicit
//! composition table. On top of that sit presheaves and their Kan extensions,
//! sieves and Grothendieck topologies, the three functor-level conditions on
//! sites, exact and locally exact squares, sheafification by the plus
//! construction, the double category of sites with comma, cocomma and
//! tabulator constructions, and the cofree-site comonad with its coalgebras.
//!
//! ```
//! use std::sync::Arc;
//! use sitecalc::fixtures;
//! use sitecalc::site::{saturate, Coverage};
//!
//! let two = Arc::new(fixtures::two());
//! let f = two.arrow_by_name("f").unwrap();
//! let b = two.object_by_name("b").unwrap();
//! let gens = Coverage::from_generators(&two, vec![(b, vec![vec![f]])]).unwrap();
//! let site = saturate(&gens).unwrap();
//! assert_eq!(site.covers(b).len(), 2);
//! ```

pub mod comonad;
pub mod corpus;
pub mod doublecat;
mod error;
pub mod exactness;
pub mod fincat;
pub mod fixtures;
pub mod presheaf;
pub mod sheaf;
pub mod site;
pub mod sitemaps;

pub use error::{Error, Result};

/// Result of a decision procedure: either it holds, or here is why not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<W> {
    Pass,
    Fail(W),
}

impl<W> Outcome<W> {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Outcome::Pass => None,
            Outcome::Fail(w) => Some(w),
        }
    }

    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> Outcome<V> {
        match self {
            Outcome::Pass => Outcome::Pass,
            Outcome::Fail(w) => Outcome::Fail(f(w)),
        }
    }
}

impl<W> From<Option<W>> for Outcome<W> {
    fn from(w: Option<W>) -> Self {
        match w {
            None => Outcome::Pass,
            Some(w) => Outcome::Fail(w),
        }
    }
}
