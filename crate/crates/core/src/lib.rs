//! Collective decoherence on small qubit registers.
//!
//! The crate builds the collective jump operator `J = Σ σ₋` and the
//! bath-induced Hamiltonian `H_S = Σ b_αβ σ_α₊ σ_β₋` for `N` identical qubits,
//! extracts decoherence-free (lowest-weight) subspaces and the subspaces that
//! additionally stay invariant under `H_S`, integrates the Lindblad master
//! equation, and evaluates the combinatorial scalability metrics of
//! collective encodings.
//!
//! Modules:
//! - [`qubit_space`]: computational basis bookkeeping and spin operators.
//! - [`structure`]: lowest-weight kernels, su(2) towers, invariant subspaces.
//! - [`dynamics`]: coupling models, Liouvillians, RK4 evolution, fidelity.
//! - [`metrics`]: encoding efficiency and decoherence-free fractions.
//! - [`encodings`]: named three- and four-qubit bases and logical encodings.
//! - [`report`]: number formatting for CSV output.

pub mod dynamics;
pub mod encodings;
mod error;
pub mod linalg;
pub mod metrics;
pub mod qubit_space;
pub mod report;
pub mod structure;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
