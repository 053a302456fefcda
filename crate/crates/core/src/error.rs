use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid demand matrix: {0}")]
    InvalidDemand(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("bitstring has length {got} but the edge indexing has {expected} edges")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("cannot enumerate matchings of a graph with {edges} edges (cap is {cap})")]
    EnumerationCap { edges: usize, cap: usize },

    #[error(
        "statevector simulation needs one qubit per edge: {qubits} edges exceeds the cap of {cap} \
         qubits; use a smaller instance (tensor-network simulation is not supported)"
    )]
    QubitCap { qubits: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: unsupported schema version {found} (this build reads major version {supported})")]
    Schema {
        path: String,
        found: String,
        supported: u32,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
