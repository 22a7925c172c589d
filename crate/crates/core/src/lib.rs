//! Solver library for the bi-linear oscillator H = v|p| + F|x|.
//!
//! The dimensionless problem H = |k| + |x| is discretized on an N-site
//! lattice with potential cutoff lambda_c, diagonalized densely or by
//! Lanczos on a fast Toeplitz matvec, compared against the Bohr-Sommerfeld
//! spectrum, and checked against the analytic relations the eigenfunctions
//! must satisfy (Fourier self-duality, power-law tails, half-line integral
//! identities, and the singular integro-differential eigen-equation).
//! Closed-form model fits and a Fourier-symmetric variational ansatz for
//! the ground state round out the toolkit.

pub mod eigen;
pub mod error;
pub mod fitting;
pub mod lattice;
pub mod quasiclassical;
pub mod report;
pub mod scale;
pub mod svg;
pub mod verification;

pub use eigen::{solve, solve_dense, solve_iterative, Method, Parity, SolveRequest, Spectrum};
pub use error::{Error, Result};
pub use lattice::{build_operator, fourier_coeff, HamiltonianOperator, LatticeConfig};
pub use scale::PhysicalScale;
