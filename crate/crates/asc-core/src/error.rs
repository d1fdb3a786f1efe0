use thiserror::Error;

/// Crate-wide error type. Every fallible operation in this crate returns
/// `Result<T, Error>`; variants carry enough context to be surfaced directly
/// by a command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit count {n} outside supported range 1..=8")]
    QubitCountOutOfRange { n: usize },

    #[error("malformed Pauli string {text:?}: {reason}")]
    MalformedPauli { text: String, reason: String },

    #[error("coordinate {coord} invalid for {n} qubits")]
    CoordinateOutOfRange { coord: usize, n: usize },

    #[error("coordinate list {coords:?} contains a repeat")]
    RepeatedCoordinate { coords: Vec<usize> },

    #[error("invalid stabilizer code: {reason}")]
    InvalidCode { reason: String },

    #[error("operator {operator} does not lie in the normalizer")]
    NotInNormalizer { operator: String },

    #[error("operators {left} and {right} are not an ambiguous pair (syndromes differ)")]
    NotAmbiguous { left: String, right: String },

    #[error("operators {left} and {right} are ambiguous; preprocessing cannot separate them")]
    AmbiguousPair { left: String, right: String },

    #[error("toggler signs unbalanced: {plus} plus vs {minus} minus over {sets} sets")]
    UnbalancedToggler {
        plus: usize,
        minus: usize,
        sets: usize,
    },

    #[error("toggler assigns no sign to syndrome {syndrome}")]
    MissingTogglerSign { syndrome: String },

    #[error("process matrix dimension {dim} does not match {m} qubits (expected {expected})")]
    ProcessDimensionMismatch {
        dim: usize,
        m: usize,
        expected: usize,
    },

    #[error("process matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("unknown catalog code {id:?}")]
    UnknownCode { id: String },

    #[error("unknown noise preset {name:?}")]
    UnknownPreset { name: String },

    #[error("single-qubit conjugation does not map Paulis to Paulis: {reason}")]
    NotAPauliMap { reason: String },

    #[error("measurement plan references missing probability (entry {entry}, syndrome {syndrome})")]
    MissingProbability { entry: usize, syndrome: String },

    #[error("malformed {what}: {reason}")]
    MalformedInput { what: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
