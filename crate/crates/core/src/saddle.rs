//! The dual 2x2 field: action `f(Q)`, transfer kernel, saddle window and the
//! single-site check of the integral representation.
//!
//! `L = diag(1, -1)` throughout, so `ẑ = diag(z1, z2) = z + ζ L / √n`.

use crate::error::{invalid, Error, Result};
use crate::harmonics::haar::haar_from_rng;
use crate::harmonics::U2;
use crate::mc::estimate::theta_single_site;
use crate::mc::point::SpectralPoint;
use crate::quadrature::GaussLegendre;
use crate::rng;
use nalgebra::Vector2;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

pub type QMatrix = U2;

/// `det [[ẑ, Q], [-Q*, ẑ*]]` in closed form.
pub fn det_dual(q: &QMatrix, z1: Complex64, z2: Complex64) -> Complex64 {
    let a = |i, j| q[(i, j)].norm_sqr();
    (z1 * z2).norm_sqr()
        + z2.norm_sqr() * a(0, 0)
        + z1.norm_sqr() * a(1, 1)
        + z2 * z1.conj() * a(0, 1)
        + z1 * z2.conj() * a(1, 0)
        + q.determinant().norm_sqr()
}

/// `f(Q) = (-Tr QQ* + log det 𝒬 + 2u²) / 2`, principal branch.
pub fn f_eval(q: &QMatrix, point: &SpectralPoint) -> Result<Complex64> {
    let d = det_dual(q, point.z1, point.z2);
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularDual);
    }
    let tr = q.iter().map(|x| x.norm_sqr()).sum::<f64>();
    Ok(0.5 * (d.ln() + (2.0 * point.u_star * point.u_star - tr)))
}

/// `f` through the singular values when `z1 = z2 = z`.
pub fn f_singular_values(mu: (f64, f64), z: Complex64) -> f64 {
    let u2 = 1.0 - z.norm_sqr();
    [mu.0, mu.1].iter().map(|&l| 0.5 * ((z.norm_sqr() + l * l).ln() - l * l + u2)).sum()
}

/// `log` of `π⁴ W⁴ λ⁻² exp{-W² Tr(Q1-Q2)(Q1-Q2)* + f(Q1) + f(Q2)}`.
pub fn log_kernel(q1: &QMatrix, q2: &QMatrix, point: &SpectralPoint) -> Result<f64> {
    let f = f_eval(q1, point)? + f_eval(q2, point)?;
    if f.im.abs() > 1e-12 * f.re.abs().max(1.0) {
        return Err(Error::NotReal(f.im));
    }
    let w = point.w;
    let d = q1 - q2;
    let quad = d.iter().map(|x| x.norm_sqr()).sum::<f64>();
    Ok(4.0 * (PI * w).ln() - 2.0 * point.lambda_star.ln() - w * w * quad + f.re)
}

pub fn kernel_eval(q1: &QMatrix, q2: &QMatrix, point: &SpectralPoint) -> Result<f64> {
    let v = log_kernel(q1, q2, point)?.exp();
    if v.is_infinite() {
        return Err(Error::Overflow);
    }
    Ok(v)
}

/// `‖Q*Q - u²I‖ ≤ log W / √W` (operator norm, closed).
pub fn in_omega(q: &QMatrix, w: f64, point: &SpectralPoint) -> bool {
    let h = q.adjoint() * q - U2::identity() * Complex64::from(point.u_star * point.u_star);
    // Hermitian 2x2: eigenvalues m ± r
    let m = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let r = (0.25 * (h[(0, 0)].re - h[(1, 1)].re).powi(2) + h[(0, 1)].norm_sqr()).sqrt();
    m.abs() + r <= w.ln() / w.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvdForm {
    pub mu1: f64,
    pub mu2: f64,
    pub left: U2,
    /// `Q = left · diag(mu1, mu2) · right`
    pub right: U2,
    pub jacobian: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarForm {
    pub u: U2,
    pub r: U2,
    pub jacobian: f64,
}

pub fn svd_form(q: &QMatrix) -> SvdForm {
    let svd = q.svd(true, true);
    let (mut left, mut right) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let (mut mu1, mut mu2) = (svd.singular_values[0], svd.singular_values[1]);
    if mu2 > mu1 {
        std::mem::swap(&mut mu1, &mut mu2);
        left.swap_columns(0, 1);
        right.swap_rows(0, 1);
    }
    let jacobian = 4.0 * PI.powi(4) * (mu1 * mu1 - mu2 * mu2).powi(2) * mu1 * mu2;
    SvdForm { mu1, mu2, left, right, jacobian }
}

pub fn polar_form(q: &QMatrix) -> PolarForm {
    let s = svd_form(q);
    let v = s.right.adjoint();
    let sigma = U2::from_diagonal(&Vector2::new(Complex64::from(s.mu1), Complex64::from(s.mu2)));
    let r = v * sigma * s.right;
    let r = (r + r.adjoint()) * Complex64::from(0.5);
    let jacobian = PI.powi(3) * (s.mu1 + s.mu2).powi(2) * s.mu1 * s.mu2;
    PolarForm { u: s.left * s.right, r, jacobian }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaCheck {
    pub mc: f64,
    pub mc_stderr: f64,
    pub quadrature: f64,
    pub wick: f64,
}

/// `E|h - z1|²|h - z2|²` for a standard complex Gaussian `h`.
pub fn theta_wick(z1: Complex64, z2: Complex64) -> f64 {
    2.0 + z1.norm_sqr() + z2.norm_sqr() + (z1 * z2).norm_sqr() + 2.0 * (z1.conj() * z2).re
}

fn pauli() -> [U2; 4] {
    let i = Complex64::i();
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [U2::identity(), U2::new(z, o, o, z), U2::new(z, -i, i, z), U2::new(o, z, z, -o)]
}

/// `∫ e^{2f(Q) - 2u²} dQ` up to the unitary-volume constant. `Q = U Λ V`;
/// the integrand is a degree-(1,1) polynomial in the entries of U and of V
/// times invariants, so the Pauli group averages the unitaries exactly.
fn dual_integral(point: &SpectralPoint, nodes: usize) -> Result<f64> {
    let gl = GaussLegendre::on_interval(nodes, 0.0, 8.0);
    let pauli = pauli();
    let mut acc = 0.0;
    for (&m1, &w1) in gl.nodes.iter().zip(&gl.weights) {
        for (&m2, &w2) in gl.nodes.iter().zip(&gl.weights) {
            let lam = U2::from_diagonal(&Vector2::new(Complex64::from(m1), Complex64::from(m2)));
            let mut avg = Complex64::new(0.0, 0.0);
            for a in &pauli {
                for b in &pauli {
                    let f = f_eval(&(a * lam * b), point)?;
                    avg += (2.0 * f - 2.0 * point.u_star * point.u_star).exp();
                }
            }
            let jac = 4.0 * PI.powi(4) * (m1 * m1 - m2 * m2).powi(2) * m1 * m2;
            acc += w1 * w2 * jac * avg.re / 16.0;
        }
    }
    Ok(acc)
}

fn refined_dual_integral(point: &SpectralPoint) -> Result<f64> {
    let coarse = dual_integral(point, 48)?;
    let fine = dual_integral(point, 72)?;
    let change = (fine - coarse).abs() / fine.abs();
    if change > 1e-10 {
        return Err(Error::NoConvergence(format!("singular-value rule 48 -> 72 nodes changed by {change:.3e}")));
    }
    Ok(fine)
}

/// Three independent values of the single-site correlator. The quadrature is
/// normalised by its value at `z1 = z2 = 0`, where the answer is 2.
pub fn theta_n1_check(z1: Complex64, z2: Complex64, mc_samples: usize, seed: u64) -> Result<ThetaCheck> {
    if mc_samples < 100 {
        return Err(invalid("samples", format!("need at least 100 samples, got {mc_samples}")));
    }
    let point = SpectralPoint::from_pair(z1, z2, 1.0)?;
    let origin = SpectralPoint::from_pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 1.0)?;
    let c_vol = 2.0 / refined_dual_integral(&origin)?;
    let quadrature = c_vol * refined_dual_integral(&point)?;
    let (mc, mc_stderr) = theta_single_site(z1, z2, mc_samples, seed);
    Ok(ThetaCheck { mc, mc_stderr, quadrature, wick: theta_wick(z1, z2) })
}

/// CSV of `(sample_id, f_real, f_imag, in_omega)` for `Q = u U + G / W`,
/// U Haar and G standard complex Gaussian.
pub fn write_saddle_dump<W: Write>(point: &SpectralPoint, samples: usize, seed: u64, mut out: W) -> Result<()> {
    writeln!(out, "sample_id,f_real,f_imag,in_omega")?;
    for i in 0..samples as u64 {
        let mut r = rng::stream(seed, i);
        let u = haar_from_rng(&mut r);
        let g = U2::from_fn(|_, _| rng::complex_normal(&mut r, 1.0));
        let q = u * Complex64::from(point.u_star) + g * Complex64::from(1.0 / point.w);
        let f = f_eval(&q, point)?;
        writeln!(out, "{i},{:.16e},{:.16e},{}", f.re, f.im, in_omega(&q, point.w, point))?;
    }
    Ok(())
}
