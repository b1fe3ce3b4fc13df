//! Effective tridiagonal model on the zonal harmonics and the limit laws.

use crate::error::{invalid, Error, Result};
use crate::mc::point::SpectralPoint;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

const TRUNCATION_TOL: f64 = 1e-10;
const MIN_LEVEL: usize = 8;

/// Multiplication by `|ζ|² cos θ` in the basis `sqrt(2l+1) P_l(cos θ)`:
/// zero diagonal, `(l, l+1)` entry `|ζ|² (l+1) / sqrt((2l+1)(2l+3))`.
#[derive(Clone, Debug, PartialEq)]
pub struct NuMatrix {
    pub m0: usize,
    /// `off[l]` couples `l` and `l + 1`.
    pub off: Vec<f64>,
}

pub fn nu_matrix(zeta_abs: f64, m0: usize) -> Result<NuMatrix> {
    if m0 < 1 {
        return Err(invalid("m0", "truncation level must be at least 1"));
    }
    if !(zeta_abs >= 0.0 && zeta_abs.is_finite()) {
        return Err(invalid("zeta", format!("|zeta| must be finite, got {zeta_abs}")));
    }
    let z2 = zeta_abs * zeta_abs;
    let off = (0..m0)
        .map(|l| {
            let l = l as f64;
            z2 * (l + 1.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)).sqrt()
        })
        .collect();
    Ok(NuMatrix { m0, off })
}

impl NuMatrix {
    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.m0 + 1;
        DMatrix::from_fn(d, d, |i, j| match i.abs_diff(j) {
            1 => self.off[i.min(j)],
            _ => 0.0,
        })
    }
}

/// `𝒟 = -l(l+1)·damping + (2/N) ν̂`, symmetric tridiagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveMatrix {
    pub m0: usize,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Per-level damping `1 / (2u²W²)`, the small-angle slope of the heat-kernel
/// eigenvalues.
pub fn heat_damping(w: f64, u_star: f64) -> f64 {
    1.0 / (2.0 * u_star * u_star * w * w)
}

pub fn d_matrix_with_damping(n: usize, zeta_abs: f64, damping: f64, m0: usize) -> Result<EffectiveMatrix> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if damping.is_nan() || damping < 0.0 {
        return Err(invalid("damping", format!("must be >= 0, got {damping}")));
    }
    let nu = nu_matrix(zeta_abs, m0)?;
    let scale = 2.0 / n as f64;
    let diag = (0..=m0).map(|l| -((l * (l + 1)) as f64) * damping).collect();
    Ok(EffectiveMatrix { m0, diag, off: nu.off.iter().map(|v| scale * v).collect() })
}

pub fn d_matrix(point: &SpectralPoint, m0: usize) -> Result<EffectiveMatrix> {
    d_matrix_with_damping(point.n, point.zeta.norm(), heat_damping(point.w, point.u_star), m0)
}

impl EffectiveMatrix {
    pub fn dense_identity_plus(&self) -> DMatrix<f64> {
        let d = self.m0 + 1;
        DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                1.0 + self.diag[i]
            } else if i.abs_diff(j) == 1 {
                self.off[i.min(j)]
            } else {
                0.0
            }
        })
    }
}

/// `((I + d)^n)_{00}` by repeated squaring.
pub fn matrix_power_00(d: &EffectiveMatrix, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "exponent must be at least 1"));
    }
    let mut base = d.dense_identity_plus();
    let dim = base.nrows();
    let mut acc = DMatrix::identity(dim, dim);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(acc[(0, 0)])
}

/// Same quantity through the eigendecomposition of `d`,
/// `sum v0² (1 + δ)^n` with `(1 + δ)^n = exp(n ln1p δ)`.
pub fn matrix_power_00_eigen(d: &EffectiveMatrix, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "exponent must be at least 1"));
    }
    let dim = d.m0 + 1;
    let dm = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            d.diag[i]
        } else if i.abs_diff(j) == 1 {
            d.off[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(dm);
    let nf = n as f64;
    Ok((0..dim)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            let lam = 1.0 + eig.eigenvalues[k];
            let mag = if lam >= 0.0 { (nf * eig.eigenvalues[k].ln_1p()).exp() } else { (nf * (-lam).ln()).exp() };
            let sign = if lam < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            v0 * v0 * sign * mag
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub gin_pred: f64,
    pub loc_pred: f64,
    /// Truncation level actually used.
    pub m0: usize,
}

/// Highest level whose diagonal keeps `|1 + d_ll| <= 1`.
fn level_cap(damping: f64) -> usize {
    if damping == 0.0 {
        return usize::MAX;
    }
    let mut l = ((0.25 + 2.0 / damping).sqrt() - 0.5).floor() as usize;
    while ((l + 1) * (l + 2)) as f64 * damping <= 2.0 {
        l += 1;
    }
    while l > 0 && (l * (l + 1)) as f64 * damping > 2.0 {
        l -= 1;
    }
    l
}

/// `((I + 𝒟)^N)_{00}` through the eigen route, with the truncation raised by
/// 50% until the value moves by at most 1e-10. At the admissible cap the
/// comparison is with the level just below.
pub fn power_00_converged(n: usize, zeta_abs: f64, damping: f64, m0: usize) -> Result<(f64, usize)> {
    let cap = level_cap(damping);
    let eval = |m: usize| -> Result<f64> { matrix_power_00_eigen(&d_matrix_with_damping(n, zeta_abs, damping, m)?, n as u64) };
    let mut m = m0.max(MIN_LEVEL);
    let mut cached: Option<(usize, f64)> = None;
    loop {
        let hi = (m * 3).div_ceil(2).min(cap);
        let lo = if m < hi { m } else { hi.saturating_sub(1).max(1) };
        if lo >= hi {
            return Err(Error::Truncation(hi));
        }
        let p_lo = match cached {
            Some((level, v)) if level == lo => v,
            _ => eval(lo)?,
        };
        let p_hi = eval(hi)?;
        if (p_hi - p_lo).abs() <= TRUNCATION_TOL {
            return Ok((p_hi, hi));
        }
        if hi == cap {
            return Err(Error::Truncation(cap));
        }
        cached = Some((hi, p_hi));
        m = hi;
    }
}

/// `loc = ((I + 𝒟)^N)_{00}`, `gin = e^{-2|ζ|²} loc`.
pub fn predict_ratios(point: &SpectralPoint, m0: usize) -> Result<Prediction> {
    let za = point.zeta.norm();
    let (p, used) = power_00_converged(point.n, za, heat_damping(point.w, point.u_star), m0)?;
    Ok(Prediction { gin_pred: (-2.0 * za * za).exp() * p, loc_pred: p, m0: used })
}

/// `(1 - e^{-4|ζ|²}) / (4|ζ|²)`
pub fn ginibre_limit(zeta: Complex64) -> f64 {
    let x = 4.0 * zeta.norm_sqr();
    if x < 4e-4 {
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `∫ e^{2|ζ|² cos θ} dU = sinh(2|ζ|²) / (2|ζ|²)`
pub fn haar_exp_nu(zeta_abs: f64) -> f64 {
    let x = 2.0 * zeta_abs * zeta_abs;
    if x < 1e-4 {
        1.0 + x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sinh() / x
    }
}

/// `K(w1, w2) = exp(-|w1|²/2 - |w2|²/2 + w1 conj(w2))`
pub fn ginibre_kernel(w1: Complex64, w2: Complex64) -> Complex64 {
    (-0.5 * w1.norm_sqr() - 0.5 * w2.norm_sqr() + w1 * w2.conj()).exp()
}

/// `[K11 K22 - |K12|²] / |ζ1 - ζ2|²`; points closer than 1e-6 are rejected.
pub fn det2_kernel_ratio(zeta1: Complex64, zeta2: Complex64) -> Result<f64> {
    let d2 = (zeta1 - zeta2).norm_sqr();
    if d2 < 1e-12 {
        return Err(invalid("zeta", "points closer than 1e-6; use det2_kernel_ratio_confluent"));
    }
    let k11 = ginibre_kernel(zeta1, zeta1).re;
    let k22 = ginibre_kernel(zeta2, zeta2).re;
    let k12 = ginibre_kernel(zeta1, zeta2).norm_sqr();
    Ok((k11 * k22 - k12) / d2)
}

/// Valid everywhere: series `1 - x/2 + x²/6` in `x = |ζ1 - ζ2|²` near the diagonal.
pub fn det2_kernel_ratio_confluent(zeta1: Complex64, zeta2: Complex64) -> f64 {
    let x = (zeta1 - zeta2).norm_sqr();
    if x < 1e-12 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PredictionRow {
    pub n: usize,
    pub w: f64,
    pub w2_over_n: f64,
    pub zeta_abs: f64,
    pub gin_pred: f64,
    pub loc_pred: f64,
    pub gin_limit: f64,
    pub loc_limit: f64,
}

pub fn prediction_row(point: &SpectralPoint, m0: usize) -> Result<PredictionRow> {
    let p = predict_ratios(point, m0)?;
    Ok(PredictionRow {
        n: point.n,
        w: point.w,
        w2_over_n: point.w * point.w / point.n as f64,
        zeta_abs: point.zeta.norm(),
        gin_pred: p.gin_pred,
        loc_pred: p.loc_pred,
        gin_limit: ginibre_limit(point.zeta),
        loc_limit: 1.0,
    })
}
