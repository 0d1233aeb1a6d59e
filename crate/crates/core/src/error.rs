use thiserror::Error;

/// Errors raised by the geometry, density, quadrature, measure and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("no facet normal has a positive inner product with the query direction")]
    NoBoundingFacet,

    #[error("support function is unbounded (no feasible vertices)")]
    Unbounded,

    #[error("degenerate vertex: {0}")]
    DegenerateVertex(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("tail integral is not integrable: {0}")]
    TailNotIntegrable(String),

    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("support numbers must be strictly positive (index {index}, value {value})")]
    NonPositiveSupport { index: usize, value: f64 },

    #[error("could not bracket the scaling factor within {0} doublings")]
    BisectionBracketFailure(usize),

    #[error(
        "measure is concentrated in a closed hemisphere (min positive-part integral {worst:e} at {witness:?})"
    )]
    MeasureConcentrated { worst: f64, witness: Vec<f64> },

    #[error("density is not integrable on the complement of a body: {0}")]
    NonIntegrableDensity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
