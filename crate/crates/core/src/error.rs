use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid qubit count {n}: expected 1..={max}")]
    QubitCount { n: usize, max: usize },

    #[error("bitstring {bits:?} does not describe {n} qubits")]
    Bitstring { bits: String, n: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    QubitIndex { index: usize, n: usize },

    #[error("excitation number {k} out of range for {n} qubits")]
    Excitation { k: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator does not commute with J_z (residual {residual:.3e})")]
    BreaksWeight { residual: f64 },

    #[error("not a physical density matrix: {0}")]
    Unphysical(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("time step {dt} too large: dt * |L| = {product:.3} exceeds {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("value does not fit in 128 bits: {0}")]
    Overflow(String),

    #[error("couplings {0}")]
    Couplings(String),
}
