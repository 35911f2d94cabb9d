use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("multiplier is not finite at (xi, eta) = ({xi}, {eta})")]
    NonFiniteMultiplier { xi: f64, eta: f64 },

    #[error("negative-order homogeneous operator applied to a field with nonzero mean")]
    NonzeroMean,

    #[error("backward diffusion requested: mu = {mu} > 0 with t = {t} < 0")]
    BackwardDiffusion { mu: f64, t: f64 },

    #[error("zero input: {0}")]
    ZeroInput(String),

    #[error("evaluation point {x} lies within the outer radius of the sample boundary")]
    OutOfDomain { x: f64 },

    #[error("CFL audit violated at t = {t}: dt*max|u|*max|xi| = {value} > {limit}")]
    CflViolation { t: f64, value: f64, limit: f64 },

    #[error("blow-up detected at t = {t}: max|u| = {max_abs}")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("spectrum not resolved: edge-to-peak ratio {ratio:e} exceeds {limit:e}")]
    Unresolved { ratio: f64, limit: f64 },

    #[error("solution reached the domain boundary: boundary mass fraction {fraction:e} exceeds {limit:e}")]
    BoundaryContact { fraction: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("series recorded with mu = {0} > 0; conservation laws apply only to mu = 0")]
    DissipativeSeries(f64),
}

impl Error {
    /// Errors that come from the numerical evolution rather than the input.
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self,
            Error::CflViolation { .. } | Error::BlowUp { .. } | Error::NoConvergence { .. }
        )
    }
}
