use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported qubit count {0} (expected {1})")]
    QubitCount(usize, &'static str),

    #[error("amplitude vector has length {got}, expected 2^{n} = {expected}")]
    AmplitudeLength { n: usize, got: usize, expected: usize },

    #[error("state vector is zero")]
    ZeroVector,

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("invalid qubit subset: {0}")]
    Subset(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix trace is {0}, expected 1")]
    Trace(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("state has effective rank > 2 (third eigenvalue {0:.3e})")]
    RankExceeded(f64),

    #[error("operation requires a mixed rank-2 state, got a pure one")]
    PureInput,

    #[error("local operator on qubit {qubit} is singular (|det| = {det:.3e})")]
    SingularOperator { qubit: usize, det: f64 },

    #[error("expected {expected} local operators, got {got}")]
    OperatorCount { expected: usize, got: usize },

    #[error("state is not supported on the rank-2 span (residual {0:.3e})")]
    OutsideSupport(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid parameters: {0}")]
    Parameters(String),

    #[error("state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics on valid input, as opposed to bad
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_)
                | Error::Trace(_)
                | Error::NotPsd(_)
                | Error::RankExceeded(_)
                | Error::OutsideSupport(_)
                | Error::Numerical(_)
        )
    }
}
