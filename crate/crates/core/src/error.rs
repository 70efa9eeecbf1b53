use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for a set of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("iteration limit {limit} reached with gap {gap:e} (target {target:e})")]
    IterationLimit { limit: usize, gap: f64, target: f64 },

    #[error("degenerate pivot at index {index}: iterate coincides with the pivot point")]
    DegeneratePivot { index: usize },

    #[error(
        "membership gap stalled at {gap:e}, above target {target:e}, at floating-point resolution"
    )]
    PrecisionFloor { gap: f64, target: f64 },

    #[error("angle at the query is undefined because the iterate coincides with it")]
    UndefinedAngle,

    #[error("gamma floor {floor:e} reached with {found} of {wanted} requested vertices")]
    GammaFloor {
        floor: f64,
        found: usize,
        wanted: usize,
    },

    #[error("perturbation hypothesis violated: 4*epsilon = {four_eps} exceeds sigma = {sigma}")]
    HypothesisViolation { four_eps: f64, sigma: f64 },

    #[error("query point lies in the hull (distance {distance:e}); certificate is undefined")]
    InsideHull { distance: f64 },

    #[error("cone anchor error: {0}")]
    Anchor(String),

    #[error("instance generation failed after {retries} retries: {reason}")]
    GenerationFailed { retries: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

/// Checks that `value` lies in the open unit interval.
pub(crate) fn check_unit_open(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, value, "must lie in (0, 1)"))
    }
}
