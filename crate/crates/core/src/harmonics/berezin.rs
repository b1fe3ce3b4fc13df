//! Two-unitary integral against its Bessel-determinant closed form.

use super::bessel::bessel_i0;
use super::haar::haar_from_rng;
use super::U2;
use crate::error::{invalid, Result};
use crate::rng;
use num_complex::Complex64;
use rayon::prelude::*;

const BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerezinResult {
    pub group_ratio: f64,
    pub group_stderr: f64,
    pub bessel_ratio: f64,
    pub samples: usize,
}

/// Singular values of the two diagonal blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularPair {
    pub mu1: (f64, f64),
    pub mu2: (f64, f64),
}

impl SingularPair {
    fn validate(&self, w: f64) -> Result<()> {
        for (a, b) in [self.mu1, self.mu2] {
            if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
                return Err(invalid("mu", format!("singular values must be finite and >= 0, got ({a}, {b})")));
            }
            if (a - b).abs() < 1e-3 {
                return Err(invalid("mu", format!("degenerate singular values ({a}, {b})")));
            }
        }
        let worst = [self.mu1.0, self.mu1.1]
            .iter()
            .flat_map(|a| [self.mu2.0, self.mu2.1].map(|b| w * w * a * b))
            .fold(0.0, f64::max);
        if worst > 50.0 {
            return Err(invalid("mu", format!("W² μ μ' = {worst} exceeds 50")));
        }
        Ok(())
    }

    fn vandermonde(&self) -> f64 {
        (self.mu1.0.powi(2) - self.mu1.1.powi(2)) * (self.mu2.0.powi(2) - self.mu2.1.powi(2))
    }

    /// `exp{W² Tr V1 Λ1 V2 Λ2 + c.c.}` times the Vandermonde factors.
    fn group_integrand(&self, v1: &U2, v2: &U2, w: f64) -> f64 {
        let l1 = U2::from_diagonal(&nalgebra::Vector2::new(Complex64::from(self.mu1.0), Complex64::from(self.mu1.1)));
        let l2 = U2::from_diagonal(&nalgebra::Vector2::new(Complex64::from(self.mu2.0), Complex64::from(self.mu2.1)));
        let t = (v1 * l1 * v2 * l2).trace().re;
        (2.0 * w * w * t).exp() * self.vandermonde()
    }

    /// `det { I0(2W² μ1i μ2j) }`
    pub fn bessel_det(&self, w: f64) -> Result<f64> {
        let i = |a: f64, b: f64| bessel_i0(2.0 * w * w * a * b);
        let (a, b) = self.mu1;
        let (c, d) = self.mu2;
        Ok(i(a, c)? * i(b, d)? - i(a, d)? * i(b, c)?)
    }
}

/// Monte Carlo over Haar pairs `(V1, V2)` of both parameter sets with common
/// random numbers; the ratio error comes from the delta method with the
/// sample covariance.
pub fn berezin_check(num: &SingularPair, den: &SingularPair, w: f64, samples: usize, seed: u64) -> Result<BerezinResult> {
    num.validate(w)?;
    den.validate(w)?;
    if samples < 100 {
        return Err(invalid("samples", format!("need at least 100 samples, got {samples}")));
    }
    let blocks = (samples as u64).div_ceil(BLOCK);
    let sums: Vec<[f64; 5]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut s = [0.0; 5];
            for i in b * BLOCK..((b + 1) * BLOCK).min(samples as u64) {
                let mut r = rng::stream(seed, i);
                let v1 = haar_from_rng(&mut r);
                let v2 = haar_from_rng(&mut r);
                let x = num.group_integrand(&v1, &v2, w);
                let y = den.group_integrand(&v1, &v2, w);
                s[0] += x;
                s[1] += y;
                s[2] += x * x;
                s[3] += y * y;
                s[4] += x * y;
            }
            s
        })
        .collect();
    let mut t = [0.0; 5];
    for s in &sums {
        for k in 0..5 {
            t[k] += s[k];
        }
    }
    let n = samples as f64;
    let (mx, my) = (t[0] / n, t[1] / n);
    let vx = (t[2] / n - mx * mx) * n / (n - 1.0);
    let vy = (t[3] / n - my * my) * n / (n - 1.0);
    let cxy = (t[4] / n - mx * my) * n / (n - 1.0);
    let ratio = mx / my;
    let rel_var = (vx / (mx * mx) + vy / (my * my) - 2.0 * cxy / (mx * my)) / n;
    Ok(BerezinResult {
        group_ratio: ratio,
        group_stderr: ratio.abs() * rel_var.max(0.0).sqrt(),
        bessel_ratio: num.bessel_det(w)? / den.bessel_det(w)?,
        samples,
    })
}
