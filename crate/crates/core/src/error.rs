use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {dim} exceeds configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("partial trace needs a non-empty set of kept qubits")]
    EmptyKeepSet,
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Nyquist bound violated: max |E| * dt = {product} >= pi (max |E| = {max_energy}, dt = {dt})")]
    Nyquist { max_energy: f64, dt: f64, product: f64 },
    #[error("sample times are not uniformly spaced (record {index})")]
    NonUniformSpacing { index: usize },
    #[error("no spectral peak found")]
    NoPeak,
    #[error("gap unresolvable: |E1 - E0| = {0:e}")]
    GapUnresolvable(f64),
    #[error("impossible branch: outcome probability {0:e}")]
    ImpossibleBranch(f64),
    #[error("ground weight decayed to {weight:e} after {rounds} rounds")]
    GroundLost { weight: f64, rounds: usize },
    #[error("zero coupling on pair {0}")]
    ZeroCoupling(String),
    #[error("pulse program parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
