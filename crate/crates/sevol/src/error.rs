//! Crate-wide error type.

/// Errors shared by every module. Parse and validation failures map to CLI
/// exit code 2, obstruction verdicts to 3, numerical failures to 4.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cone is not strictly convex: {0}")]
    NotStrictlyConvex(String),

    #[error("cone is not Gorenstein: {0}")]
    NotGorenstein(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Some pairing `<xi, u>` with a generator of the moment cone is <= 0.
    #[error("Reeb vector lies outside the interior of the fan cone")]
    ReebOutsideCone,

    /// Floating-point guard: a pairing is positive but below the degeneracy
    /// threshold, so the evaluation would be numerically meaningless.
    #[error("Reeb vector within {0:e} of the fan cone boundary")]
    ReebNearBoundary(f64),

    #[error("operation requires a rational Reeb vector")]
    RequiresRationalReeb,

    #[error("no convergence after {iters} iterations (constrained gradient norm {grad_norm:e})")]
    NonConvergence {
        iters: usize,
        last: Vec<f64>,
        grad_norm: f64,
    },

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("evaluation on or outside the cone boundary: {0}")]
    BoundaryEvaluation(String),

    #[error("Hessian not positive definite at sample point (min eigenvalue {min_eig:e})")]
    NonConvex { point: Vec<f64>, min_eig: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
