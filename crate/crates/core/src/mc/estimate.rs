//! Shared-sample estimators of the delocalized and localized ratios.

use super::logdet::log_abs_det2_in_place;
use super::logmean::LogMeanAccumulator;
use super::point::SpectralPoint;
use crate::band::{build_profile, BandProfile};
use crate::error::{invalid, Error, Result};
use crate::rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

pub const DEFAULT_RESAMPLES: usize = 200;
const BOOTSTRAP_SALT: u64 = 0xb007;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioPair {
    pub gin: RatioEstimate,
    pub loc: RatioEstimate,
    pub singular_count: usize,
}

/// Per-sample `(L0, L1, L2)` with `Ls = log |det(H - z_s)|^2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogDetTable {
    pub l0: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub singular_count: usize,
}

impl LogDetTable {
    pub fn len(&self) -> usize {
        self.l0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l0.is_empty()
    }

    /// `(gin, loc)` over the given sample indices (all when `None`).
    pub fn ratios(&self, idx: Option<&[usize]>) -> Result<(f64, f64)> {
        let mut cross = LogMeanAccumulator::new();
        let mut a = LogMeanAccumulator::new();
        let mut b = LogMeanAccumulator::new();
        let mut c = LogMeanAccumulator::new();
        let mut push = |i: usize| {
            cross.push(self.l1[i] + self.l2[i]);
            a.push(2.0 * self.l1[i]);
            b.push(2.0 * self.l2[i]);
            c.push(2.0 * self.l0[i]);
        };
        match idx {
            Some(ix) => ix.iter().for_each(|&i| push(i)),
            None => (0..self.len()).for_each(push),
        }
        let x = cross.value()?;
        let gin = (x - 0.5 * a.value()? - 0.5 * b.value()?).exp();
        let loc = (x - c.value()?).exp();
        Ok((gin, loc))
    }
}

/// Fills the log-determinant table. Sample `i` is drawn from stream `i`, and
/// results are kept in index order whatever the thread count.
pub fn log_det_table(profile: &BandProfile, point: &SpectralPoint, samples: usize, seed: u64) -> Result<LogDetTable> {
    let n = profile.n();
    let shifts = [point.z, point.z1, point.z2];
    let rows: Vec<Option<[f64; 3]>> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); n * n], vec![Complex64::new(0.0, 0.0); n * n]),
            |(h, work), i| {
                profile.fill_sample(seed, i, h);
                let mut out = [0.0; 3];
                for (slot, &s) in out.iter_mut().zip(&shifts) {
                    work.copy_from_slice(h);
                    for d in 0..n {
                        work[d * n + d] -= s;
                    }
                    match log_abs_det2_in_place(work, n) {
                        Ok(v) => *slot = v,
                        Err(_) => return None,
                    }
                }
                Some(out)
            },
        )
        .collect();
    let mut t = LogDetTable::default();
    for r in rows {
        match r {
            Some([a, b, c]) => {
                t.l0.push(a);
                t.l1.push(b);
                t.l2.push(c);
            }
            None => t.singular_count += 1,
        }
    }
    if t.singular_count * 1000 > samples {
        return Err(Error::TooManySingular { count: t.singular_count, total: samples });
    }
    if t.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(t)
}

/// Linear-interpolated sample quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap: half the 16-84% spread, for `(gin, loc)`.
pub fn bootstrap_stderr(table: &LogDetTable, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let m = table.len();
    let boot_seed = rng::derive_seed(seed, BOOTSTRAP_SALT);
    let reps: Vec<Result<(f64, f64)>> = (0..resamples as u64)
        .into_par_iter()
        .map_init(
            || vec![0usize; m],
            |idx, b| {
                let mut r = rng::stream(boot_seed, b);
                idx.iter_mut().for_each(|i| *i = r.random_range(0..m));
                table.ratios(Some(idx))
            },
        )
        .collect();
    let mut g = Vec::with_capacity(resamples);
    let mut l = Vec::with_capacity(resamples);
    for r in reps {
        let (a, b) = r?;
        g.push(a);
        l.push(b);
    }
    let spread = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.total_cmp(b));
        0.5 * (quantile(v, 0.84) - quantile(v, 0.16))
    };
    Ok((spread(&mut g), spread(&mut l)))
}

pub fn estimate_with_profile(profile: &BandProfile, point: &SpectralPoint, samples: usize, seed: u64) -> Result<RatioPair> {
    if samples < 100 {
        return Err(invalid("samples", format!("need at least 100 samples, got {samples}")));
    }
    if profile.n() != point.n {
        return Err(invalid("n", "profile and point dimensions differ"));
    }
    let table = log_det_table(profile, point, samples, seed)?;
    let (gin, loc) = table.ratios(None)?;
    let (gin_se, loc_se) = bootstrap_stderr(&table, DEFAULT_RESAMPLES, seed)?;
    let used = table.len();
    Ok(RatioPair {
        gin: RatioEstimate { value: gin, stderr: gin_se, samples: used, seed },
        loc: RatioEstimate { value: loc, stderr: loc_se, samples: used, seed },
        singular_count: table.singular_count,
    })
}

pub fn estimate_ratios(point: &SpectralPoint, samples: usize, seed: u64) -> Result<RatioPair> {
    let profile = build_profile(point.n, point.w)?;
    estimate_with_profile(&profile, point, samples, seed)
}

/// Plain mean and standard error of `|h - z1|^2 |h - z2|^2` for a single
/// standard complex Gaussian `h`.
pub fn theta_single_site(z1: Complex64, z2: Complex64, samples: usize, seed: u64) -> (f64, f64) {
    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let h = rng::complex_normal(&mut rng::stream(seed, i), 1.0);
            (h - z1).norm_sqr() * (h - z2).norm_sqr()
        })
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::point::spectral_point;
    use crate::parallel::with_workers;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_offset_gives_exact_one() {
        let p = spectral_point(c(0.3, 0.0), c(0.0, 0.0), 6, 2.0).unwrap();
        let r = estimate_ratios(&p, 300, 1).unwrap();
        assert_eq!(r.gin.value, 1.0);
        assert_eq!(r.gin.stderr, 0.0);
        assert_eq!(r.loc.value, 1.0);
    }

    #[test]
    fn rejects_small_sample_count() {
        let p = spectral_point(c(0.3, 0.0), c(0.1, 0.0), 6, 2.0).unwrap();
        assert!(estimate_ratios(&p, 99, 1).is_err());
    }

    #[test]
    fn single_site_matches_wick() {
        let (z1, z2) = (c(0.3, -0.2), c(-0.1, 0.5));
        let wick = 2.0 + z1.norm_sqr() + z2.norm_sqr() + (z1 * z2).norm_sqr() + 2.0 * (z1.conj() * z2).re;
        let (m, se) = theta_single_site(z1, z2, 200_000, 5);
        assert!((m - wick).abs() < 4.0 * se, "{m} vs {wick} (se {se})");
        // the same quantity through the band pipeline with n = 1
        let p = SpectralPoint::from_pair(z1, z2, 1.0).unwrap();
        let t = log_det_table(&build_profile(1, 1.0).unwrap(), &p, 200_000, 5).unwrap();
        let lme = crate::mc::log_mean_exp(t.l1.iter().zip(&t.l2).map(|(a, b)| a + b)).unwrap();
        assert!((lme.exp() - wick).abs() < 4.0 * se * 1.2);
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let p = spectral_point(c(0.2, 0.1), c(0.7, 0.0), 8, 3.0).unwrap();
        let a = with_workers(1, || estimate_ratios(&p, 400, 77)).unwrap();
        let b = with_workers(3, || estimate_ratios(&p, 400, 77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_rotation_in_distribution() {
        let phi = 1.1f64;
        let rot = Complex64::from_polar(1.0, phi);
        let p = spectral_point(c(0.4, 0.0), c(0.8, 0.0), 8, 2.0).unwrap();
        let q = spectral_point(rot * p.z, rot * p.zeta, 8, 2.0).unwrap();
        let a = estimate_ratios(&p, 4000, 3).unwrap();
        let b = estimate_ratios(&q, 4000, 3).unwrap();
        let sg = (a.gin.stderr.powi(2) + b.gin.stderr.powi(2)).sqrt();
        assert!((a.gin.value - b.gin.value).abs() < 4.0 * sg);
        let sl = (a.loc.stderr.powi(2) + b.loc.stderr.powi(2)).sqrt();
        assert!((a.loc.value - b.loc.value).abs() < 4.0 * sl);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 1.0), 3.0);
        assert!((quantile(&v, 0.5) - 1.5).abs() < 1e-15);
    }
}
