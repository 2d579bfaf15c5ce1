use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum HciError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("oxide breakdown: nitrate concentration {concentration} is at or above breakdown threshold {threshold}")]
    OxideBreakdown { concentration: f64, threshold: f64 },

    #[error("cannot calibrate: nominal stress rate is zero")]
    CannotCalibrate,

    #[error("transistor {transistor} is nonfunctional: vt {vt} V >= vdd {vdd} V")]
    Nonfunctional {
        transistor: String,
        vt: f64,
        vdd: f64,
    },

    #[error("unknown target: {0}")]
    UnknownTarget(String),

    #[error("incomplete stimulus: no activity given for primary input `{0}`")]
    IncompleteStimulus(String),

    #[error("invalid ring: {0} stages (need an odd count of at least 3)")]
    InvalidRing(usize),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario field `{field}`: {message}")]
    ScenarioField { field: String, message: String },

    #[error("reports are incomparable: {0}")]
    Incomparable(String),

    #[error("scenario `{scenario}`: {source}")]
    InScenario {
        scenario: String,
        #[source]
        source: Box<HciError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report encoding: {0}")]
    Encoding(String),
}

impl HciError {
    /// True for errors caused by malformed or inconsistent user input, as opposed
    /// to failures while running a well-formed scenario.
    pub fn is_validation(&self) -> bool {
        match self {
            HciError::Parse { .. }
            | HciError::ScenarioField { .. }
            | HciError::InvalidNetlist(_)
            | HciError::UnknownTarget(_)
            | HciError::IncompleteStimulus(_)
            | HciError::InvalidProtocol(_)
            | HciError::InvalidInput(_)
            | HciError::Incomparable(_) => true,
            HciError::InScenario { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HciError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = HciError> = std::result::Result<T, E>;
