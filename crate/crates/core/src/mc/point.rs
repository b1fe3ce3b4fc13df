use crate::error::{invalid, Result};
use num_complex::Complex64;

/// Bulk point `z`, offset `ζ` and the derived saddle parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub z: Complex64,
    pub zeta: Complex64,
    pub n: usize,
    pub w: f64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub u_star: f64,
    pub alpha: f64,
    pub lambda_star: f64,
}

pub fn spectral_point(z: Complex64, zeta: Complex64, n: usize, w: f64) -> Result<SpectralPoint> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(invalid("w", format!("bandwidth must be positive and finite, got {w}")));
    }
    if !(z.re.is_finite() && z.im.is_finite() && zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(invalid("z", "non-finite coordinates"));
    }
    if z.norm() >= 1.0 {
        return Err(invalid("z", format!("|z| = {} must be < 1", z.norm())));
    }
    let shift = zeta / (n as f64).sqrt();
    let u_star = (1.0 - z.norm_sqr()).sqrt();
    let u2 = u_star * u_star;
    let alpha = u_star * (2.0 + u2 / (w * w)).sqrt();
    let lambda_star = 1.0 - (alpha - u2 / w) / w;
    if lambda_star <= 0.0 {
        return Err(invalid("w", format!("bandwidth {w} too small: lambda_star = {lambda_star}")));
    }
    Ok(SpectralPoint { z, zeta, n, w, z1: z + shift, z2: z - shift, u_star, alpha, lambda_star })
}

impl SpectralPoint {
    /// Single-site point with prescribed `z1`, `z2`.
    pub fn from_pair(z1: Complex64, z2: Complex64, w: f64) -> Result<SpectralPoint> {
        spectral_point(0.5 * (z1 + z2), 0.5 * (z1 - z2), 1, w)
    }

    pub fn with_w(&self, w: f64) -> Result<SpectralPoint> {
        spectral_point(self.z, self.zeta, self.n, w)
    }
}
