//! Modified Bessel function `I_0` on the non-negative axis.

use crate::error::{invalid, Result};
use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 15.0;

/// `sum (x^2/4)^k / (k!)^2`
fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `sum a_k / x^k` of `I_0(x) ~ e^x / sqrt(2πx) (1 + 1/(8x) + 9/(2 (8x)^2) + ...)`,
/// truncated before the terms start to grow.
fn asymptotic_sum(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let r = ((2 * k - 1) as f64).powi(2) / (8.0 * k as f64 * x);
        if r >= 1.0 {
            break;
        }
        term *= r;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn check(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(invalid("x", format!("I0 argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Overflows to `inf` beyond `x ≈ 713`; see [`ln_bessel_i0`].
pub fn bessel_i0(x: f64) -> Result<f64> {
    check(x)?;
    if x <= SERIES_LIMIT {
        Ok(series(x))
    } else {
        Ok(bessel_i0_scaled(x)? * x.exp())
    }
}

/// `e^{-x} I_0(x)`
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    check(x)?;
    if x <= SERIES_LIMIT {
        Ok(series(x) * (-x).exp())
    } else {
        Ok(asymptotic_sum(x) / (2.0 * PI * x).sqrt())
    }
}

pub fn ln_bessel_i0(x: f64) -> Result<f64> {
    Ok(bessel_i0_scaled(x)?.ln() + x)
}
