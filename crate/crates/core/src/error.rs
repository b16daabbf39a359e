use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("register of {requested} qubits is outside the supported range {min}..={max}")]
    ResourceLimit {
        requested: usize,
        min: usize,
        max: usize,
    },

    #[error("party count M={parties} is outside the supported range {min}..={max}")]
    PartyCount {
        parties: usize,
        min: usize,
        max: usize,
    },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("Bell measurement needs two distinct qubits, got {0} twice")]
    RepeatedQubit(usize),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("message width mismatch: scheme has {expected} parties, message has {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("invalid message: {0}")]
    InvalidMessage(String),

    #[error("invalid operator tuple: {0}")]
    InvalidOperators(String),

    #[error("encoding map is not a bijection: {0}")]
    NotBijective(String),

    #[error("messages {first} and {second} both produce outcome {key}; scheme is not decodable")]
    Decodability {
        first: String,
        second: String,
        key: String,
    },

    #[error("protocol violation: outcome {0} cannot occur under this scheme")]
    UnknownOutcome(String),

    #[error("decoder table was built for scheme {table}, not {scheme}")]
    SchemeMismatch { table: String, scheme: String },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid qubit pairing: {0}")]
    Pairing(String),

    #[error("scheme file line {line}: {message}")]
    Parse { line: usize, message: String },
}
