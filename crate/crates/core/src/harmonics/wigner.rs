//! Matrix coefficients `t^{(l)}_{mk}` of the integer-spin irreducible
//! representations, through the contour integral
//!
//! `P_{mk}(θ) = μ/(2π) ∮ (c + i s e^{iφ})^{l+k} (c + i s e^{-iφ})^{l-k} e^{i(m-k)φ} dφ`
//!
//! with `μ = sqrt((l-m)!(l+m)!/((l-k)!(l+k)!))`. The integrand is a
//! trigonometric polynomial, so the trapezoid rule on `4l + 4` nodes is exact
//! up to rounding. Rounding grows like `(1 + sin θ)^l`, which is harmless for
//! small angles or moderate `l`.

use super::euler::euler_decompose;
use super::U2;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn check(l: i64, m: i64, k: i64) -> Result<()> {
    if l < 0 || m.abs() > l || k.abs() > l {
        return Err(Error::IndexOutOfRange(format!("l={l}, m={m}, k={k}")));
    }
    Ok(())
}

pub fn wigner_p(l: i64, m: i64, k: i64, theta: f64) -> Result<Complex64> {
    check(l, m, k)?;
    let nodes = 4 * l as usize + 4;
    let (s, c) = (0.5 * theta).sin_cos();
    let i = Complex64::i();
    let mu = 0.5 * (ln_factorial(l - m) + ln_factorial(l + m) - ln_factorial(l - k) - ln_factorial(l + k));
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let phi = TAU * j as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, phi);
        let a = c + i * s * e;
        let b = c + i * s * e.conj();
        let term = a.powi((l + k) as i32) * b.powi((l - k) as i32) * Complex64::from_polar(1.0, (m - k) as f64 * phi);
        acc += term;
    }
    Ok(acc * (mu.exp() / nodes as f64))
}

/// `t^{(l)}_{mk}(U) = P_{mk}(θ) e^{i(mφ + kψ)}` in the Euler coordinates of U.
pub fn wigner_t(l: i64, m: i64, k: i64, u: &U2) -> Result<Complex64> {
    let a = euler_decompose(u);
    let (phi, psi) = a.phi_psi();
    Ok(wigner_p(l, m, k, a.theta)? * Complex64::from_polar(1.0, m as f64 * phi + k as f64 * psi))
}

/// The `(2l + 1)`-dimensional representation matrix, indices `-l..=l`.
pub fn wigner_matrix(l: i64, u: &U2) -> Result<DMatrix<Complex64>> {
    check(l, 0, 0)?;
    let d = (2 * l + 1) as usize;
    let a = euler_decompose(u);
    let (phi, psi) = a.phi_psi();
    let mut out = DMatrix::zeros(d, d);
    for m in -l..=l {
        for k in -l..=l {
            let p = wigner_p(l, m, k, a.theta)?;
            out[((m + l) as usize, (k + l) as usize)] = p * Complex64::from_polar(1.0, m as f64 * phi + k as f64 * psi);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::euler::{euler_compose, haar_quadrature};
    use crate::harmonics::haar::haar_indexed;
    use proptest::prelude::*;

    fn legendre(l: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if l == 0 {
            return 1.0;
        }
        for n in 1..l {
            let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn low_order_values() {
        let u = haar_indexed(3, 0);
        assert!((wigner_t(0, 0, 0, &u).unwrap() - 1.0).norm() < 1e-15);
        for &t in &[0.0, 0.3, 1.2, 2.5, std::f64::consts::PI] {
            let p = wigner_p(1, 0, 0, t).unwrap();
            assert!((p.re - t.cos()).abs() < 1e-14 && p.im.abs() < 1e-14);
            let asym = 1.0 - 2.0 * (0.5 * t).sin().powi(2);
            assert!((p.re - asym).abs() < 1e-12);
        }
        assert!(wigner_p(2, 3, 0, 0.1).is_err());
        assert!(wigner_p(-1, 0, 0, 0.1).is_err());
    }

    #[test]
    fn zonal_is_legendre() {
        for l in 0..20 {
            for &t in &[0.1, 0.7, 1.9, 3.0] {
                let p = wigner_p(l, 0, 0, t).unwrap();
                assert!((p.re - legendre(l as usize, t.cos())).abs() < 1e-9, "l={l} t={t}");
            }
        }
    }

    #[test]
    fn rows_are_unit_vectors() {
        for s in 0..10 {
            let u = haar_indexed(21, s);
            for l in 0..=10 {
                let t = wigner_matrix(l, &u).unwrap();
                for r in 0..t.nrows() {
                    let norm: f64 = t.row(r).iter().map(|x| x.norm_sqr()).sum();
                    assert!((norm - 1.0).abs() < 1e-10);
                    assert!(t.row(r).iter().all(|x| x.norm() <= 1.0 + 1e-10));
                }
            }
        }
    }

    #[test]
    fn homomorphism() {
        for s in 0..6 {
            let (a, b) = (haar_indexed(5, 2 * s), haar_indexed(5, 2 * s + 1));
            for l in 1..=5 {
                let lhs = wigner_matrix(l, &(a * b)).unwrap();
                let rhs = wigner_matrix(l, &a).unwrap() * wigner_matrix(l, &b).unwrap();
                let err = (lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max);
                assert!(err < 1e-9, "l={l}: {err}");
            }
        }
    }

    #[test]
    fn schur_orthogonality() {
        // zonal functions depend on θ only; the angular integrals are trivial
        let gl = crate::quadrature::GaussLegendre::on_interval(24, 0.0, std::f64::consts::PI);
        let zonal: Vec<Vec<f64>> =
            (0..=6).map(|l| gl.nodes.iter().map(|&t| wigner_p(l, 0, 0, t).unwrap().re).collect()).collect();
        for l in 0..=6usize {
            for lp in 0..=6usize {
                let v: f64 = (0..24).map(|i| gl.weights[i] * 0.5 * gl.nodes[i].sin() * zonal[l][i] * zonal[lp][i]).sum();
                let want = if l == lp { 1.0 / (2 * l + 1) as f64 } else { 0.0 };
                assert!((v - want).abs() < 1e-8, "{l},{lp}: {v}");
            }
        }
        // off-zonal entries through the full product rule
        let v = haar_quadrature(16, 8, |a| {
            let u = euler_compose(a);
            wigner_t(2, 1, -1, &u).unwrap() * wigner_t(2, 1, -1, &u).unwrap().conj()
        });
        assert!((v.re - 0.2).abs() < 1e-10);
        let v = haar_quadrature(16, 8, |a| {
            let u = euler_compose(a);
            wigner_t(2, 1, -1, &u).unwrap() * wigner_t(1, 1, -1, &u).unwrap().conj()
        });
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn first_off_diagonal_leading_term() {
        for l in 1..=16i64 {
            let lf = l as f64;
            for k in -l..l {
                for &x in &[0.01, 0.03, 0.05, 0.1] {
                    let s = x / lf;
                    let theta = 2.0 * s.asin();
                    let lead = ((1.0 + (k + 1) as f64 / lf) * (1.0 - k as f64 / lf)).sqrt() * lf * s;
                    let got = wigner_p(l, k + 1, k, theta).unwrap().norm();
                    assert!((got / lead - 1.0).abs() <= 10.0 * lf * s * s, "l={l} k={k} x={x}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_by_one(l in 0i64..12, m in -12i64..12, k in -12i64..12, t in 0.0f64..std::f64::consts::PI) {
            prop_assume!(m.abs() <= l && k.abs() <= l);
            prop_assert!(wigner_p(l, m, k, t).unwrap().norm() <= 1.0 + 1e-10);
        }
    }
}
