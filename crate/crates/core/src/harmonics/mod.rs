//! Harmonic analysis on U(2).

pub mod berezin;
pub mod bessel;
pub mod bracket;
pub mod euler;
pub mod haar;
pub mod wigner;
pub mod zexp;

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type U2 = Matrix2<Complex64>;

pub use berezin::{berezin_check, BerezinResult, SingularPair};
pub use bessel::{bessel_i0, bessel_i0_scaled, ln_bessel_i0};
pub use bracket::{heat_eig, heat_eig_asymptotic, k_bracket, HermitianPair};
pub use euler::{euler_compose, euler_decompose, haar_quadrature, EulerAngles};
pub use haar::{haar_from_rng, haar_sample};
pub use wigner::{wigner_matrix, wigner_p, wigner_t};
pub use zexp::{z_expansion_check, ZExpansion};

/// Operator-norm distance from unitarity, `max |U* U - I|`.
pub fn unitarity_error(u: &U2) -> f64 {
    (u.adjoint() * u - U2::identity()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}
