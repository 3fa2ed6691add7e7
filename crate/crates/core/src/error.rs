use alloc::string::String;
use core::fmt;

/// An addressable entry of the kinetic state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Electron { level: usize },
    Phonon { branch: usize, mode: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Electron { level } => write!(f, "electron level {level}"),
            Location::Phonon { branch, mode } => write!(f, "phonon branch {branch} mode {mode}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("occupation {value} outside the domain [0, {max}) of statistics `{statistics}`")]
    Domain {
        statistics: String,
        value: f64,
        max: f64,
    },
    #[error("{location}: {source}")]
    At {
        location: Location,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("ratio target {0} is not a non-negative number")]
    InvalidRatio(f64),
    #[error("ratio target {target} exceeds the saturation value {limit} reached at the occupation guard")]
    Saturated { target: f64, limit: f64 },
    #[error("ratio target {target} not attained; ratio reached only {reached} at occupation {at}")]
    NotAttained { target: f64, reached: f64, at: f64 },
    #[error("bisection failed to converge within bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },
    #[error(
        "statistics `{statistics}` violates the monotone-ratio assumption near occupation {at}"
    )]
    NonMonotoneRatio { statistics: String, at: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative weight {weight} at index {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("phonon modes must have positive energy (mode index 0 requested)")]
    ZeroEnergyMode,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{quantity} {target} is not attainable; attainable range is ({min}, {max})")]
    Infeasible {
        quantity: &'static str,
        target: f64,
        min: f64,
        max: f64,
    },
    #[error("total energy is not monotone in temperature inside the bracket [{t_lo}, {t_hi}]")]
    NonMonotoneEnergy { t_lo: f64, t_hi: f64 },
    #[error("{0} touches a zero-weight entry")]
    ZeroWeightChannel(String),
    #[error("kernel table entry {0} does not match any channel on the grid")]
    UnknownChannel(String),
    #[error("NaN encountered at {0}")]
    NotANumber(Location),
}

impl Error {
    pub(crate) fn at(self, location: Location) -> Error {
        Error::At {
            location,
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
