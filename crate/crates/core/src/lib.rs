//! Simulation of time-dependent non-Hermitian qubit dynamics through Naimark
//! dilation onto a Hermitian qubit–ancilla system.
//!
//! The pipeline runs: [`model`] Hamiltonian → [`propagator`] time-ordered
//! exponentials → [`dilation`] metric and dilated Hamiltonian → [`circuit`]
//! synthesis into CNOT + `U(θ,φ,λ)` gates → [`simulator`] statevector runs
//! with shot sampling → [`analysis`] postselection, normalisation fitting and
//! dynamical invariants.
//!
//! The dense kernels in [`linalg`] are generic over the real scalar type; the
//! physics layers work in `f64` through the aliases below.

pub mod analysis;
pub mod circuit;
pub mod dilation;
pub mod error;
pub mod linalg;
pub mod model;
pub mod propagator;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;
/// Dense complex 2×2 matrix in double precision.
pub type CMatrix2 = linalg::Matrix<f64, 2>;
/// Dense complex 4×4 matrix in double precision.
pub type CMatrix4 = linalg::Matrix<f64, 4>;
/// Two-component state vector.
pub type Vec2 = linalg::Vector<f64, 2>;
/// Four-component state vector, ordered |00⟩, |01⟩, |10⟩, |11⟩.
pub type Vec4 = linalg::Vector<f64, 4>;
