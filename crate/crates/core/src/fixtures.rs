//! The standard small categories and sites used throughout the tests.

use std::sync::Arc;

use crate::fincat::{CategoryBuilder, FinCategory};
use crate::site::{saturate, Coverage, Site};

/// The terminal category.
pub fn one() -> FinCategory {
    FinCategory::terminal()
}

/// The walking arrow `f: a -> b`.
pub fn two() -> FinCategory {
    CategoryBuilder::new()
        .object("a")
        .object("b")
        .arrow("f", "a", "b")
        .build()
        .expect("Two")
}

/// A parallel pair `f, g: a -> b`.
pub fn par() -> FinCategory {
    CategoryBuilder::new()
        .object("a")
        .object("b")
        .arrow("f", "a", "b")
        .arrow("g", "a", "b")
        .build()
        .expect("Par")
}

/// The span `b <- a -> c`.
pub fn span() -> FinCategory {
    CategoryBuilder::new()
        .object("a")
        .object("b")
        .object("c")
        .arrow("f", "a", "b")
        .arrow("g", "a", "c")
        .build()
        .expect("Span")
}

/// The commuting triangle `g∘f = h`.
pub fn tri() -> FinCategory {
    CategoryBuilder::new()
        .object("a")
        .object("b")
        .object("c")
        .arrow("f", "a", "b")
        .arrow("g", "b", "c")
        .arrow("h", "a", "c")
        .compose("g", "f", "h")
        .build()
        .expect("Tri")
}

pub fn discrete_pair() -> FinCategory {
    FinCategory::discrete(&["a", "b"])
}

/// `Two` where only maximal sieves cover.
pub fn two_triv() -> Site {
    Site::trivial(Arc::new(two()))
}

/// `Two` where `⟨f⟩` covers `b`.
pub fn two_f() -> Site {
    let c = Arc::new(two());
    let f = c.arrow_by_name("f").unwrap();
    let b = c.object_by_name("b").unwrap();
    let gens = Coverage::from_generators(&c, vec![(b, vec![vec![f]])]).expect("generators");
    saturate(&gens).expect("Two_f")
}

/// `Two` where every sieve covers, the empty ones included.
pub fn two_all() -> Site {
    Site::total(Arc::new(two()))
}
