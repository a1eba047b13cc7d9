//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by geometry construction, energy evaluation and the solvers.
#[derive(Debug, Error)]
pub enum PcvtError {
    /// Two generators coincide under the torus metric (or an input set was
    /// empty / not finite). Carries the offending generator indices when known.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Two specific generators coincide under the torus metric.
    #[error("generators {i} and {j} coincide under the torus metric")]
    CoincidentGenerators { i: usize, j: usize },

    /// The planar triangulation of the replicated images failed, or a cell
    /// could not be extracted from it.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A polygon operation received fewer than 3 vertices or a zero-area
    /// polygon.
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    /// The requested operation is not defined for this input (e.g. Hessian
    /// with a single generator).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The strong-Wolfe line search could not make progress even after the
    /// steepest-descent fallback.
    #[error("line search failure at iteration {iteration}")]
    LineSearchFailure { iteration: usize },

    /// The modified-Cholesky shift ladder was exhausted.
    #[error("preconditioner factorization failed after shift ladder")]
    PreconditionFailure,

    /// A statistics routine received an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// Batch statistics received an empty batch.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, PcvtError>;
