use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing key `{0}`")]
    MissingKey(String),

    #[error("invalid value for `{0}`: {1}")]
    InvalidValue(String, String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("shape mismatch for {what}: expected {expected} entries, got {got}")]
    ShapeMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("CFL violation: dt = {dt:e}, dx = {dx:e}, c_max = {c_max:e} (Courant number {courant:.3})")]
    CflViolation {
        dt: f64,
        dx: f64,
        c_max: f64,
        courant: f64,
    },

    #[error("explicit diffusion stability violated: number {number:.4} > {limit}")]
    DiffusionStabilityViolation { number: f64, limit: f64 },

    #[error("lambda = 0 cannot drive parabolic stepping; use the conservative (clifton) mode")]
    SingularLambda,

    #[error("damage became negative ({min_gamma:e}) under the logistic source; reduce dt")]
    PositivityViolation { min_gamma: f64 },

    #[error("admissibility violated at t = {time:e}: min Z*dGamma/dt = {min_z_gammadot:e} < -{tol:e}")]
    AdmissibilityViolation {
        time: f64,
        min_z_gammadot: f64,
        tol: f64,
    },

    #[error("non-finite field values at t = {time:e}")]
    NonFinite { time: f64 },

    #[error("configuration conflict: {0}")]
    ConfigConflict(String),

    #[error("front speed must be positive, got {0}")]
    NonpositiveSpeed(f64),

    #[error("no front detected")]
    NoFrontDetected,

    #[error("signal has not settled on a plateau")]
    NoPlateau,

    #[error("trajectory has {0} time levels, at least {1} required")]
    TooFewLevels(usize, usize),

    #[error("basis Gram matrix is singular or ill-conditioned (condition estimate {0:e})")]
    SingularBasis(f64),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Errors caused by the scenario description rather than by the dynamics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::MissingKey(_)
                | Error::InvalidValue(..)
                | Error::Parse(_)
                | Error::ShapeMismatch { .. }
                | Error::ConfigConflict(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
