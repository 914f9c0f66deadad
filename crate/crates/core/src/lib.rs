//! Determinantal point processes on finite ground sets and quadrature grids,
//! their multiplicative functionals, and the coherent states of a truncated
//! fermionic Fock space whose inner products reproduce the same determinants.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: kernel validation, spectral data, Gauss–Legendre rules and
//!   Nyström discretisation.
//! * [`dpp_finite`]: the exact finite-set process, enumerated by brute force and
//!   evaluated through determinants.
//! * [`fredholm`]: Fredholm determinants of continuous kernels.
//! * [`fock`]: wedge monomials, Plücker coordinates and coherent states.
//! * [`embedding`]: the projector and doubled-projector correspondences between
//!   multiplicative functionals and coherent states.
//! * [`sampler`]: the spectral exact sampler and Monte Carlo audits.
//! * [`verify`]: randomized identity suites shared by the CLI and tests.

pub mod dpp_finite;
pub mod embedding;
pub mod error;
pub mod fock;
pub mod fredholm;
pub mod kernels;
pub mod linalg;
pub mod random;
pub mod sampler;
pub mod subset;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;

pub use dpp_finite::{FiniteDpp, Symbol};
pub use embedding::DoubledProjector;
pub use fock::{BlockOperator, FockVector, SplitSpace};
pub use fredholm::PiecewiseSymbol;
pub use kernels::{DiscreteKernel, KernelFunction, QuadratureRule, SpectralData};
pub use sampler::SampleBatch;
pub use subset::{Configuration, IndexSet};
