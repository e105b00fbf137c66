use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid geometry is degenerate.
    InvalidGrid(String),
    /// A parameter is outside its admissible range.
    InvalidParameter(String),
    /// Two arrays or states that must agree in length do not.
    LengthMismatch { expected: usize, found: usize },
    /// The nonlocal operator was asked to run with a nonpositive range.
    NonpositiveEta(f64),
    /// The model breaks one or more of its structural assumptions.
    InvalidModel(String),
    /// A cell left the admissible box `[0, rho_max]` beyond tolerance.
    BoundViolation {
        lane: usize,
        cell: usize,
        value: f64,
        t: f64,
    },
    /// Neither convection nor lane changing can move any density.
    NoDynamics,
    /// Output times are unsorted, negative, or otherwise unusable.
    InvalidTimes(String),
    /// Refinement grids do not nest.
    NonNestedGrids(String),
    /// Unknown scenario tag.
    UnknownScenario(String),
    /// A run failed inside a sweep; carries the offending eta.
    Sweep { eta: f64, source: alloc::boxed::Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::NonpositiveEta(eta) => {
                write!(f, "nonlocal operator requires eta > 0, got {eta}")
            }
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::BoundViolation { lane, cell, value, t } => write!(
                f,
                "maximum principle violated: lane {lane}, cell {cell}, value {value:e} at t = {t}"
            ),
            Error::NoDynamics => write!(f, "no dynamics: all velocities and the lane-change rate vanish"),
            Error::InvalidTimes(msg) => write!(f, "invalid output times: {msg}"),
            Error::NonNestedGrids(msg) => write!(f, "non-nested grids: {msg}"),
            Error::UnknownScenario(name) => write!(f, "unknown scenario `{name}`"),
            Error::Sweep { eta, source } => write!(f, "run with eta = {eta} failed: {source}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for failures detected while time stepping (as opposed to bad input).
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::BoundViolation { .. } => true,
            Error::Sweep { source, .. } => source.is_runtime(),
            _ => false,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
