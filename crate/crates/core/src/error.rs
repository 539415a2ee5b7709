use thiserror::Error;

/// Errors raised by constructors and by checks whose preconditions fail.
///
/// Failed checks are not errors: they come back as [`crate::Outcome::Fail`]
/// with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid category data: {0}")]
    Build(String),
    #[error("not a functor: {0}")]
    NotAFunctor(String),
    #[error("not a natural transformation: {0}")]
    NotNatural(String),
    #[error("not a presheaf: {0}")]
    NotAPresheaf(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("coverage condition fails at object {object} along arrow {arrow}")]
    CoverageCondition { object: usize, arrow: usize },
    #[error("topology is not saturated: {0}")]
    Unsaturated(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("bound exceeded: {what} needs {found}, bound is {bound}")]
    BoundExceeded {
        what: String,
        bound: usize,
        found: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("oplax cells are not accepted here")]
    Oplax,
}

pub type Result<T> = std::result::Result<T, Error>;
