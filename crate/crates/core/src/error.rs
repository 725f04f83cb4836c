use thiserror::Error;

/// Errors raised by the simulation, control, and objective layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leading denominator coefficient is zero")]
    ZeroLeadingCoefficient,

    #[error("empty coefficient list: {0}")]
    EmptyCoefficients(&'static str),

    #[error("non-finite coefficient in {0}")]
    NonFiniteCoefficient(&'static str),

    #[error("sample time must be positive and finite, got {0}")]
    InvalidSampleTime(f64),

    #[error("non-finite input sample at index {0}")]
    NonFiniteInput(usize),

    #[error("non-finite error signal: {0}")]
    NonFiniteError(f64),

    #[error("algebraic loop: channel ({row}, {col}) has direct feedthrough")]
    AlgebraicLoop { row: usize, col: usize },

    #[error("sample time mismatch: expected {expected}, found {found}")]
    SampleTimeMismatch { expected: f64, found: f64 },

    #[error("horizon {horizon} s is not a positive integer multiple of dt {dt} s")]
    HorizonNotMultiple { horizon: f64, dt: f64 },

    #[error("expected {expected} loops, got {found}")]
    LoopCountMismatch { expected: usize, found: usize },

    #[error("invalid saturation limits: u_min {u_min} must be below u_max {u_max}")]
    InvalidLimits { u_min: f64, u_max: f64 },

    #[error("conditional integration band must be positive, got {0}")]
    InvalidErrorBand(f64),

    #[error("non-finite gain: {0}")]
    NonFiniteGain(f64),

    #[error("invalid reference profile: {0}")]
    InvalidReference(String),

    #[error("empty error sequence")]
    EmptySequence,

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate baseline: loop {0} metric is zero")]
    DegenerateBaseline(usize),

    #[error("invalid loop weights: {0}")]
    InvalidWeights(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
