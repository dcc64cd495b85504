use thiserror::Error;

/// Errors raised by the spectral kernels, the model equations, the
/// integrators and the diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("field mean {mean:e} is not zero (tolerance {tolerance:e})")]
    MeanNotZero { mean: f64, tolerance: f64 },

    #[error("symbol is not Hermitian at wavenumber {wavenumber:?}: realness of the output would break")]
    NonHermitianSymbol { wavenumber: Vec<i64> },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("density must be positive, found minimum {min:e}")]
    NonpositiveDensity { min: f64 },

    #[error("vacuum state: density variable reaches {min:e}")]
    VacuumState { min: f64 },

    #[error("positivity violated at t = {t}: minimum {min:e} below floor {floor:e}")]
    PositivityViolation { t: f64, min: f64, floor: f64 },

    #[error("numerical blowup at t = {t}: norm {norm:e}")]
    NumericalBlowup { t: f64, norm: f64 },

    #[error("empty k_0 range: no integer in [{lower}, {upper})")]
    EmptyRange { lower: f64, upper: f64 },

    #[error("non-positive value {value:e} at sample {index}")]
    NonpositiveValue { index: usize, value: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("invalid stepper configuration: {0}")]
    InvalidConfig(String),

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    /// Attach the simulation time at which an error surfaced.
    pub fn at(self, t: f64) -> Error {
        match self {
            e @ Error::AtTime { .. }
            | e @ Error::PositivityViolation { .. }
            | e @ Error::NumericalBlowup { .. } => e,
            other => Error::AtTime {
                t,
                source: Box::new(other),
            },
        }
    }

    /// Strip any time annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
