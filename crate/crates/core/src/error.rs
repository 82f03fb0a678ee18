use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge after {refinements} refinements (last {last}, previous {previous}, agreement {agreement:e})")]
    NonConvergence {
        refinements: usize,
        last: Complex64,
        previous: Complex64,
        agreement: f64,
    },

    #[error("branch continuation is ambiguous at sample {index}: |dv| = {jump:e} against |v| = {magnitude:e}; increase sample density")]
    StepDensity { index: usize, jump: f64, magnitude: f64 },

    #[error("no contour around branch points {first} and {second}: {reason}; a homotopic detour is required")]
    Geometry {
        first: usize,
        second: usize,
        reason: String,
    },

    #[error("finite-difference stencil touches the singular point {point}")]
    SingularStencil { point: Complex64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for failures of an iterative numerical method rather than bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::StepDensity { .. })
    }
}
