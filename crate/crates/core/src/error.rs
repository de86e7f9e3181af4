use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite field value at sample ({x}, {y})")]
    NumericFault { x: usize, y: usize },

    #[error("field has zero power")]
    DegenerateField,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid distance {0} m")]
    InvalidDistance(f64),

    #[error("shift ({sx}, {sy}) m exceeds the guard band of a {window} m window")]
    ShiftOverflow { sx: f64, sy: f64, window: f64 },

    #[error("aliasing risk: {0}")]
    AliasingRisk(String),

    #[error("asymmetric cavity: stability criterion only defined for identical retroreflectors")]
    NotSupported,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("reflectivity of 1 gives unbounded circulating power")]
    UnboundedCirculatingPower,

    #[error("collapsed mode has no radius")]
    DegenerateMode,

    #[error("nothing to plot")]
    NothingToPlot,

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
