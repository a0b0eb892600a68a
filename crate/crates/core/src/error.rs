use thiserror::Error;

/// Errors raised by the model, the vector fields and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid orbit data: {0}")]
    InvalidSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid seed configuration: {0}")]
    InvalidSeed(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("state dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("warping function g_{index} = {value} is not positive")]
    NonpositiveWarp { index: usize, value: f64 },

    #[error("generalized mean curvature xi = {0} is not positive")]
    NonpositiveXi(f64),

    #[error("outside the domain of {function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    #[error("stage {stage} of the Runge-Kutta step failed: {source}")]
    Stage { stage: usize, source: Box<Error> },

    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("trajectory leaves the constraint locus: {0}")]
    ConstraintDrift(String),

    #[error("trajectory does not cover the requested range: {0}")]
    Coverage(String),

    #[error("unknown check suite `{0}`")]
    UnknownSuite(String),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

impl Error {
    /// Strips [`Error::Stage`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
