//! Resolvent self-consistency for eigenstate overlap distributions.
//!
//! A basis state |phi> of an unperturbed Hamiltonian spreads over the
//! eigenstates |psi_n> of H = H0 + V with weights p_n = |<psi_n|phi>|^2.
//! The diagonal resolvent R(z) = sum_n p_n / (z - lambda_n) obeys a closed
//! Dyson-like equation with a self-energy; this crate computes that
//! self-energy exactly (by diagonalization), approximately (mean field on a
//! grid), and through a family of analytic line shapes.
//!
//! Sign convention: spectral functions are read off at z = lambda - i0+,
//! so Im R(lambda - i0+) = pi * sum_n p_n delta(lambda - lambda_n) >= 0.
//!
//! Modules, bottom up:
//! - [`specfun`]: Faddeeva, Voigt, dispersion, Hilbert transforms.
//! - [`model`]: Ising chain and banded random ensembles, entropy estimates.
//! - [`oracle`]: exact diagonalization and every resolvent-level quantity.
//! - [`meanfield`]: damped fixed-point solver on a grid.
//! - [`ansatz`]: Lorentzian, Gaussian, Voigt and Faddeeva self-energy forms.
//! - [`corrections`]: third-order terms, parity diagnostics, SCBA.
//! - [`pipeline`]: config-driven runs with hashed artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod corrections;
pub mod error;
pub mod grid;
pub mod meanfield;
pub mod model;
mod optim;
pub mod oracle;
pub mod pipeline;
pub mod selfcheck;
pub mod specfun;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use specfun::ComplexValue;
