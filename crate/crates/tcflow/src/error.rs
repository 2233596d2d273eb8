use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: input validation (bad parameters,
/// domain violations, malformed files) and numerical failures (no root,
/// non-convergence, degenerate spectra). [`Error::is_validation`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("instability precondition violated: eta^2 = {eta2} <= mu = {mu}")]
    InstabilityPrecondition { eta2: f64, mu: f64 },
    #[error("degenerate height: L = {l} is within {tol} of L_{k} = {lk}")]
    DegenerateHeight { l: f64, k: usize, lk: f64, tol: f64 },
    #[error("resolution too low: {0}")]
    Resolution(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("no criticality in range [{lo}, {hi}]")]
    NoCriticality { lo: f64, hi: f64 },
    #[error("PES failed: {0}")]
    PesFailed(String),
    #[error("eigenvalue not simple (gap {gap:e}, tolerance {tol:e})")]
    NotSimple { gap: f64, tol: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },
    #[error("below saddle-node: discriminant {0:e} < 0")]
    BelowSaddleNode(f64),
    #[error("threshold out of range: {0}")]
    ThresholdOutOfRange(String),
    #[error("no interior separation: {0}")]
    NoInteriorSeparation(String),
    #[error("loop through singularity: |v| = {0:e}")]
    LoopThroughSingularity(f64),
    #[error("CFL violation: {0}")]
    Cfl(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InstabilityPrecondition { .. }
                | Error::DegenerateHeight { .. }
                | Error::Resolution(_)
                | Error::Invalid(_)
                | Error::GridMismatch(_)
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
