//! Numerical laboratory for second correlation functions of characteristic
//! polynomials of non-Hermitian Gaussian band matrices.
//!
//! The crate is organised around the pieces of the transfer-operator picture:
//!
//! * [`band`]: variance profile `J = (1 - W^2 Δ)^{-1}` and matrix sampling.
//! * [`mc`]: log-domain Monte Carlo estimation of the ratio statistics.
//! * [`saddle`]: the dual 2x2 field, its action `f(Q)` and transfer kernel.
//! * [`spectral`]: the Gaussian (Hermitian-sector) kernel and its Mehler spectrum.
//! * [`harmonics`]: harmonic analysis on U(2) used by the unitary sector.
//! * [`crossover`]: the effective tridiagonal model and limit laws.
//! * [`experiments`]: configuration, run records and the acceptance suite.

pub mod band;
pub mod crossover;
pub mod error;
pub mod experiments;
pub mod harmonics;
pub mod mc;
pub mod parallel;
pub mod quadrature;
pub mod saddle;
pub mod spectral;
pub mod rng;

pub use error::{Error, Result};
pub use mc::point::SpectralPoint;
pub use num_complex::Complex64;
