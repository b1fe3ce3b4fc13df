//! Experiment parameters from a JSON file and/or command-line flags.

use crate::error::{invalid, Result};
use crate::mc::point::{spectral_point, SpectralPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Every field is optional so flags can be layered over a file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Accepts `"0.5"`, `"0.5,0.1"` and `"0.5+0.1i"` (also `"-0.1i"`, `"i"`).
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty value".into());
    }
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("cannot parse {s:?} as a complex number"));
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(num(re)?, num(im)?));
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let imag = |x: &str| match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => num(x),
        };
        return match split {
            Some(k) => Ok(Complex64::new(num(&body[..k])?, imag(&body[k..])?)),
            None => Ok(Complex64::new(0.0, imag(body)?)),
        };
    }
    Ok(Complex64::new(num(&t)?, 0.0))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Values in `over` win.
    pub fn layered(&self, over: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($($f:ident),*) => { ExperimentConfig { $($f: over.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        pick!(n, w, w_grid, z, zeta, samples, seed, m0, nodes, model_only, filter, format, out, workers)
    }

    /// Copy with execution-only settings removed, for embedding in outputs.
    pub fn echo(&self) -> ExperimentConfig {
        ExperimentConfig { out: None, workers: None, format: None, ..self.clone() }
    }

    pub fn n_or(&self, default: usize) -> Result<usize> {
        let n = self.n.unwrap_or(default);
        if n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        Ok(n)
    }

    pub fn w_or(&self, default: f64) -> Result<f64> {
        check_w(self.w.unwrap_or(default))
    }

    pub fn z(&self) -> Result<Complex64> {
        let z = match &self.z {
            Some(s) => parse_complex(s).map_err(|e| invalid("z", e))?,
            None => Complex64::new(0.0, 0.0),
        };
        if z.norm().is_nan() || z.norm() >= 1.0 {
            return Err(invalid("z", format!("|z| = {} must be < 1", z.norm())));
        }
        Ok(z)
    }

    pub fn zeta(&self) -> Result<Complex64> {
        match &self.zeta {
            Some(s) => parse_complex(s).map_err(|e| invalid("zeta", e)),
            None => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn samples_or(&self, default: usize) -> Result<usize> {
        let s = self.samples.unwrap_or(default);
        if s < 100 {
            return Err(invalid("samples", format!("need at least 100, got {s}")));
        }
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(super::DEFAULT_SEED)
    }

    pub fn m0(&self) -> Result<usize> {
        let m = self.m0.unwrap_or(8);
        if m < 1 {
            return Err(invalid("m0", "must be at least 1"));
        }
        Ok(m)
    }

    pub fn w_grid(&self) -> Result<Vec<f64>> {
        let grid = self.w_grid.clone().ok_or_else(|| invalid("w_grid", "a grid of at least two bandwidths is required"))?;
        if grid.len() < 2 {
            return Err(invalid("w_grid", format!("need at least two values, got {}", grid.len())));
        }
        grid.into_iter().map(check_w).collect()
    }

    pub fn point(&self, n_default: usize, w_default: f64) -> Result<SpectralPoint> {
        spectral_point(self.z()?, self.zeta()?, self.n_or(n_default)?, self.w_or(w_default)?)
    }
}

fn check_w(w: f64) -> Result<f64> {
    if !(w.is_finite() && w > 0.0) {
        return Err(invalid("w", format!("bandwidth must be positive and finite, got {w}")));
    }
    Ok(w)
}
