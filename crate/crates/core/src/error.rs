use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a documented precondition (negative gap, drive outside [0, 1], ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Non-finite state in the plant integrator.
    #[error("simulation fault at t={time:.6} s: {reason}")]
    SimulationFault { time: f64, reason: String },

    /// Coil temperature left the rated compensation range.
    #[error("over-temperature device fault: coil at {temp:.2} °C outside rated [{min}, {max}] °C")]
    OverTemperature { temp: f64, min: f64, max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("calibration failed at nearness {nearness:.3} mm: {reason}")]
    Calibration { nearness: f64, reason: String },

    /// Calibration produced rigid amplitude >= loose amplitude.
    #[error("model direction violated at nearness {nearness:.3} mm: rigid {rigid:.6} mm >= loose {loose:.6} mm")]
    ModelDirection { nearness: f64, rigid: f64, loose: f64 },

    #[error("degenerate calibration at nearness {nearness:.3} mm: loose and rigid references coincide")]
    DegenerateCalibration { nearness: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
