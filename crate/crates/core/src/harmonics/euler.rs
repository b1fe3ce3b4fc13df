//! Euler coordinates `U = e^{iγ} [[c e^{iσ}, i s e^{iδ}], [i s e^{-iδ}, c e^{-iσ}]]`
//! with `c = cos(θ/2)`, `s = sin(θ/2)`.

use super::U2;
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    /// `[0, π]`
    pub theta: f64,
    /// `[-π, π]`
    pub sigma: f64,
    /// `[-π, π]`
    pub delta: f64,
    /// `[-π/2, π/2]`
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(theta: f64, sigma: f64, delta: f64, gamma: f64) -> Self {
        EulerAngles { theta, sigma, delta, gamma }
    }

    /// `φ = σ + δ`, `ψ = σ - δ`
    pub fn phi_psi(&self) -> (f64, f64) {
        (self.sigma + self.delta, self.sigma - self.delta)
    }
}

pub fn euler_compose(a: &EulerAngles) -> U2 {
    let (s, c) = (0.5 * a.theta).sin_cos();
    let i = Complex64::i();
    let e = |x: f64| Complex64::from_polar(1.0, x);
    U2::new(c * e(a.sigma), i * s * e(a.delta), i * s * e(-a.delta), c * e(-a.sigma)) * e(a.gamma)
}

/// Inverse of [`euler_compose`]. The pair `(γ, V)` is only defined up to
/// `(γ + π, -V)`; γ is taken in `(-π/2, π/2]`. On the coordinate
/// singularities δ (θ = 0) or σ (θ = π) is set to zero.
pub fn euler_decompose(u: &U2) -> EulerAngles {
    let gamma = 0.5 * u.determinant().arg();
    let v = u * Complex64::from_polar(1.0, -gamma);
    let theta = 2.0 * v[(0, 0)].norm().min(1.0).acos();
    let mut sigma = v[(0, 0)].arg();
    let mut delta = (v[(0, 1)] / Complex64::i()).arg();
    if v[(0, 1)].norm() < 1e-15 {
        delta = 0.0;
    }
    if v[(0, 0)].norm() < 1e-15 {
        sigma = 0.0;
    }
    EulerAngles { theta, sigma, delta, gamma }
}

/// Normalised Haar density in Euler coordinates.
pub fn haar_density(theta: f64) -> f64 {
    theta.sin() / (8.0 * PI.powi(3))
}

/// Product rule for `∫ f dU` over U(2): Gauss-Legendre in θ, trapezoid in the
/// periodic angles.
pub fn haar_quadrature(n_theta: usize, n_angle: usize, f: impl Fn(&EulerAngles) -> Complex64) -> Complex64 {
    let gl = GaussLegendre::on_interval(n_theta, 0.0, PI);
    let h = 2.0 * PI / n_angle as f64;
    let hg = PI / n_angle as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
        let wt = wt * haar_density(t);
        for i in 0..n_angle {
            let sigma = -PI + h * i as f64;
            for j in 0..n_angle {
                let delta = -PI + h * j as f64;
                for k in 0..n_angle {
                    let gamma = -FRAC_PI_2 + hg * k as f64;
                    acc += f(&EulerAngles { theta: t, sigma, delta, gamma }) * (wt * h * h * hg);
                }
            }
        }
    }
    acc
}
