//! Band variance profile and the Gaussian non-Hermitian band ensemble.

use crate::error::{invalid, Error, Result};
use crate::rng;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Symmetric tridiagonal operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `a * self + b * I`
    pub fn affine(&self, a: f64, b: f64) -> Tridiagonal {
        Tridiagonal {
            diag: self.diag.iter().map(|d| a * d + b).collect(),
            off: self.off.iter().map(|o| a * o).collect(),
        }
    }

    /// Thomas algorithm. Only valid without pivoting, which holds for the
    /// diagonally dominant systems used here.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        if denom == 0.0 {
            return Err(Error::Singular);
        }
        if n > 1 {
            c[0] = self.off[0] / denom;
        }
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            if denom == 0.0 {
                return Err(Error::Singular);
            }
            if i + 1 < n {
                c[i] = self.off[i] / denom;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

/// Neumann stencil `-Δ` on `n` sites: diagonal `(1, 2, ..., 2, 1)`, off-diagonals `-1`.
pub fn neumann_laplacian(n: usize) -> Result<Tridiagonal> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if n == 1 {
        return Ok(Tridiagonal { diag: vec![0.0], off: vec![] });
    }
    let mut diag = vec![2.0; n];
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    Ok(Tridiagonal { diag, off: vec![-1.0; n - 1] })
}

#[derive(Clone, Debug)]
pub struct BandProfile {
    n: usize,
    w: f64,
    /// Row-major `n x n`.
    j: Vec<f64>,
    /// `sqrt(J_jk / 2)`, the per-component standard deviation.
    amplitude: Vec<f64>,
}

/// `J = (1 - w^2 Δ)^{-1}`, one tridiagonal solve per column.
pub fn build_profile(n: usize, w: f64) -> Result<BandProfile> {
    if !w.is_finite() || w <= 0.0 {
        return Err(invalid("w", format!("bandwidth must be positive and finite, got {w}")));
    }
    let lap = neumann_laplacian(n)?;
    let a = lap.affine(w * w, 1.0);
    debug_assert!((0..n).all(|i| {
        let off: f64 = [i.checked_sub(1).map(|k| a.off[k]), a.off.get(i).copied()]
            .iter()
            .flatten()
            .map(|x| x.abs())
            .sum();
        a.diag[i] > off
    }));
    let mut j = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[col] = 1.0;
        let x = a.solve(&e)?;
        for (row, v) in x.into_iter().enumerate() {
            j[row * n + col] = v;
        }
    }
    // mirror the upper triangle so the stored matrix is exactly symmetric
    for r in 0..n {
        for c in 0..r {
            let v = 0.5 * (j[r * n + c] + j[c * n + r]);
            j[r * n + c] = v;
            j[c * n + r] = v;
        }
    }
    let amplitude = j.iter().map(|v| (0.5 * v).sqrt()).collect();
    Ok(BandProfile { n, w, j, amplitude })
}

impl BandProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.j[j * self.n + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.j[j * self.n..(j + 1) * self.n]
    }

    pub fn row_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|r| (self.row(r).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in 0..r {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Max residual of `(1 - w^2 Δ) J - I`.
    pub fn inverse_residual(&self) -> f64 {
        let a = neumann_laplacian(self.n).expect("n >= 1").affine(self.w * self.w, 1.0);
        let mut worst: f64 = 0.0;
        for c in 0..self.n {
            let col: Vec<f64> = (0..self.n).map(|r| self.get(r, c)).collect();
            for (r, v) in a.apply(&col).into_iter().enumerate() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Fills `out` (row-major) with one sample of H for `(seed, stream)`.
    ///
    /// Entries are drawn row-major, two 64-bit words each, so the matrix is a
    /// pure function of its key.
    pub fn fill_sample(&self, seed: u64, stream: u64, out: &mut [Complex64]) {
        assert_eq!(out.len(), self.n * self.n);
        let mut rng = rng::stream(seed, stream);
        for (h, &amp) in out.iter_mut().zip(&self.amplitude) {
            let (g1, g2) = rng::normal_pair(&mut rng);
            *h = Complex64::new(amp * g1, amp * g2);
        }
    }

    pub fn export_header(&self) -> ProfileHeader {
        ProfileHeader { n: self.n, w: self.w, row_sum_error: self.row_sum_error() }
    }

    /// Entries `(j, k, J_jk)` with `0 <= k - j <= 5w`.
    pub fn band_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let reach = (5.0 * self.w).floor();
        (0..self.n).flat_map(move |r| {
            (r..self.n)
                .take_while(move |&c| (c - r) as f64 <= reach)
                .map(move |c| (r, c, self.get(r, c)))
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.export_header())?)?;
        writeln!(out, "j,k,value")?;
        for (r, c, v) in self.band_entries() {
            writeln!(out, "{r},{c},{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileHeader {
    pub n: usize,
    pub w: f64,
    pub row_sum_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandSample {
    pub n: usize,
    /// Row-major.
    pub h: Vec<Complex64>,
    pub seed: u64,
}

impl BandSample {
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.h[j * self.n + k]
    }
}

pub fn sample_matrix(profile: &BandProfile, seed: u64) -> BandSample {
    sample_matrix_stream(profile, seed, 0)
}

pub fn sample_matrix_stream(profile: &BandProfile, seed: u64, stream: u64) -> BandSample {
    let mut h = vec![Complex64::new(0.0, 0.0); profile.n * profile.n];
    profile.fill_sample(seed, stream, &mut h);
    BandSample { n: profile.n, h, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn laplacian_small_cases() {
        assert!(neumann_laplacian(0).is_err());
        let l1 = neumann_laplacian(1).unwrap();
        assert_eq!(l1.diag, vec![0.0]);
        let l2 = neumann_laplacian(2).unwrap();
        assert_eq!(l2.diag, vec![1.0, 1.0]);
        assert_eq!(l2.off, vec![-1.0]);
        let l3 = neumann_laplacian(3).unwrap();
        assert_eq!(l3.apply(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn profile_small_cases() {
        let p = build_profile(1, 3.7).unwrap();
        assert_eq!(p.get(0, 0), 1.0);
        let p = build_profile(2, 1.0).unwrap();
        let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for (r, row) in want.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!((p.get(r, c) - v).abs() < 1e-15);
            }
        }
        assert!(build_profile(4, -1.0).is_err());
        assert!(build_profile(4, f64::NAN).is_err());
        assert!(build_profile(0, 1.0).is_err());
    }

    #[test]
    fn profile_invariants_on_grid() {
        for &w in &[0.5, 1.0, 4.0, 32.0] {
            for n in [1, 2, 3, 17, 128, 512] {
                let p = build_profile(n, w).unwrap();
                assert!(p.row_sum_error() <= 1e-12, "n={n} w={w}: {}", p.row_sum_error());
                assert!(p.symmetry_error() <= 1e-13);
                assert!(p.inverse_residual() <= 1e-9 * (1.0 + w * w));
            }
        }
    }

    #[test]
    fn decay_rate_matches_tridiagonal_root() {
        // interior decay of the inverse of tridiag(-w^2, 1 + 2w^2, -w^2) is acosh(1 + 1/(2w^2))
        let w: f64 = 8.0;
        let p = build_profile(256, w).unwrap();
        let ds: Vec<f64> = (16..=64).map(|d| d as f64).collect();
        let ys: Vec<f64> = (16..=64).map(|d| p.get(0, d).ln()).collect();
        let mx = ds.iter().sum::<f64>() / ds.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = ds.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = ds.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let rate = (1.0 + 0.5 / (w * w)).acosh();
        assert!((slope + rate).abs() < 1e-9, "slope {slope} vs {rate}");
        assert!((slope * w + 1.0).abs() < 0.01);
        let resid: f64 = ds.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).abs()).fold(0.0, f64::max);
        assert!(resid < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = build_profile(8, 2.0).unwrap();
        assert_eq!(sample_matrix(&p, 42), sample_matrix(&p, 42));
        assert_ne!(sample_matrix(&p, 42), sample_matrix(&p, 43));
        assert_ne!(sample_matrix_stream(&p, 42, 1), sample_matrix_stream(&p, 42, 2));
    }

    #[test]
    fn sample_moments() {
        let p = build_profile(3, 1.0).unwrap();
        let reps = 100_000;
        let mut mean = [Complex64::new(0.0, 0.0); 9];
        let mut abs2 = [0.0; 9];
        let mut sq = [Complex64::new(0.0, 0.0); 9];
        let mut abs4 = [0.0; 9];
        let mut buf = vec![Complex64::new(0.0, 0.0); 9];
        for s in 0..reps {
            p.fill_sample(9, s, &mut buf);
            for (i, h) in buf.iter().enumerate() {
                mean[i] += h;
                abs2[i] += h.norm_sqr();
                abs4[i] += h.norm_sqr().powi(2);
                sq[i] += h * h;
            }
        }
        let nf = reps as f64;
        for i in 0..9 {
            let jv = p.get(i / 3, i % 3);
            // Var Re h = J/2, Var |h|^2 = J^2, Var Re h^2 = J^2/2
            let se_mean = (0.5 * jv / nf).sqrt();
            assert!((mean[i].re / nf).abs() < 4.0 * se_mean);
            assert!((mean[i].im / nf).abs() < 4.0 * se_mean);
            let m2 = abs2[i] / nf;
            let se2 = ((abs4[i] / nf - m2 * m2) / nf).sqrt();
            assert!((m2 - jv).abs() < 4.0 * se2, "E|H|^2 {m2} vs {jv}");
            let se_sq = (0.5 * jv * jv / nf).sqrt();
            assert!((sq[i] / nf).norm() < 4.0 * 1.5 * se_sq);
        }
    }

    #[test]
    fn export_rows() {
        let p = build_profile(2, 1.0).unwrap();
        let rows: Vec<_> = p.band_entries().collect();
        assert_eq!(rows.len(), 3);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# {\"n\":2"));
        assert!(text.contains("0,1,3.3333333333333331e-1"));
        let one = build_profile(1, 1.0).unwrap();
        assert_eq!(one.band_entries().collect::<Vec<_>>(), vec![(0, 0, 1.0)]);
    }

    proptest! {
        #[test]
        fn rows_decay_monotonically(n in 1usize..80, w in 0.2f64..20.0) {
            let p = build_profile(n, w).unwrap();
            for r in 0..n {
                let row = p.row(r);
                prop_assert!(row.iter().all(|&v| v > 0.0));
                for c in r..n.saturating_sub(1) {
                    prop_assert!(row[c] >= row[c + 1]);
                }
                for c in 1..=r {
                    prop_assert!(row[c] >= row[c - 1]);
                }
            }
            prop_assert!(p.row_sum_error() <= 1e-12);
        }
    }
}
