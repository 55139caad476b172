use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register size {0} out of range (1..=6 qubits)")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for a {n}-qubit register")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("qubit index {0} used more than once")]
    IndexCollision(usize),
    #[error("operator is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("empty keep set for partial trace")]
    EmptyKeep,
    #[error("unknown qubit label `{0}`")]
    UnknownLabel(String),
    #[error("invalid encoding conversion: {0}")]
    Encoding(String),
    #[error("missing input: {0}")]
    Missing(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "outside the allowed interval",
        })
    }
}
