//! The Gaussian factor kernel `c·exp(-a x² - b (x-y)² - a y²)`, its Mehler
//! eigensystem and a Nyström solver used to check it.

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussKernel1D {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `(α, λ*)` for bandwidth `w` and saddle radius `u`.
pub fn saddle_params(w: f64, u: f64) -> (f64, f64) {
    let alpha = u * (2.0 + u * u / (w * w)).sqrt();
    (alpha, 1.0 - (alpha - u * u / w) / w)
}

impl GaussKernel1D {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("kernel coefficient must be positive, got {v}")));
            }
        }
        Ok(GaussKernel1D { a, b, c })
    }

    /// `a = 2u⁴/W`, `b = 2Wu²`, `c = sqrt(2u²W / (π λ*))`; the prefactor makes
    /// the top eigenvalue one.
    pub fn from_saddle(w: f64, u: f64) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(invalid("w", format!("must be positive, got {w}")));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(invalid("u_star", format!("must lie in (0, 1], got {u}")));
        }
        let (_, lambda) = saddle_params(w, u);
        Self::new(2.0 * u.powi(4) / w, 2.0 * w * u * u, (2.0 * u * u * w / (std::f64::consts::PI * lambda)).sqrt())
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.c * (-self.a * x * x - self.b * (x - y).powi(2) - self.a * y * y).exp()
    }

    /// `s = sqrt(a² + 2ab)`; eigenfunctions decay like `e^{-s x²}`.
    pub fn s(&self) -> f64 {
        (self.a * self.a + 2.0 * self.a * self.b).sqrt()
    }

    /// Eigenvalue ratio `q = b / (a + b + s)`.
    pub fn mehler_q(&self) -> f64 {
        self.b / (self.a + self.b + self.s())
    }

    pub fn mehler_lambda0(&self) -> f64 {
        self.c * (std::f64::consts::PI / (self.a + self.b + self.s())).sqrt()
    }
}

/// `λ0 q^m` for `m = 0..=m_max`.
pub fn mehler_eigs(k: &GaussKernel1D, m_max: usize) -> Vec<f64> {
    let (l0, q) = (k.mehler_lambda0(), k.mehler_q());
    (0..=m_max as i32).map(|m| l0 * q.powi(m)).collect()
}

/// Physicists' Hermite polynomial.
pub fn hermite(m: usize, y: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    if m == 0 {
        return h0;
    }
    for n in 1..m {
        let h2 = 2.0 * y * h1 - 2.0 * n as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Unnormalised `m`-th eigenfunction `H_m(sqrt(2s) x) e^{-s x²}`.
pub fn mehler_eigenfunction(k: &GaussKernel1D, m: usize, x: f64) -> f64 {
    let s = k.s();
    hermite(m, (2.0 * s).sqrt() * x) * (-s * x * x).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NystromGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub half_width: f64,
}

impl NystromGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n == 0 || half_width.is_nan() || half_width <= 0.0 {
            return Err(invalid("grid", format!("need n >= 1 and X > 0, got n={n}, X={half_width}")));
        }
        let gl = GaussLegendre::on_interval(n, -half_width, half_width);
        Ok(NystromGrid { nodes: gl.nodes, weights: gl.weights, half_width })
    }

    /// Half-width `8 / sqrt(s)`, which keeps the first ten eigenfunctions'
    /// tails below 1e-16.
    pub fn for_kernel(k: &GaussKernel1D, n: usize) -> Result<Self> {
        Self::new(n, 8.0 / k.s().sqrt())
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct NystromResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `m` holds eigenfunction `m` on the nodes, normalised in the
    /// discrete L² inner product.
    pub eigenfunctions: DMatrix<f64>,
    /// Largest eigenvalue change under node doubling.
    pub doubling_shift: f64,
}

fn symmetrised(k: &GaussKernel1D, grid: &NystromGrid, weight: &dyn Fn(f64) -> f64) -> DMatrix<f64> {
    let n = grid.len();
    let sw: Vec<f64> = grid.weights.iter().zip(&grid.nodes).map(|(w, &x)| w.sqrt() * weight(x)).collect();
    DMatrix::from_fn(n, n, |i, j| sw[i] * k.value(grid.nodes[i], grid.nodes[j]) * sw[j])
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn nystrom_eigs(k: &GaussKernel1D, grid: &NystromGrid, count: usize) -> Result<NystromResult> {
    nystrom_eigs_weighted(k, grid, count, &|_| 1.0)
}

/// Nyström on `g(x) K(x, y) g(y)`.
pub fn nystrom_eigs_weighted(k: &GaussKernel1D, grid: &NystromGrid, count: usize, g: &dyn Fn(f64) -> f64) -> Result<NystromResult> {
    let limit = 1.0 / (k.a + k.b).sqrt();
    if grid.max_spacing() > limit {
        return Err(invalid("grid", format!("node spacing {:.3e} exceeds kernel width {limit:.3e}", grid.max_spacing())));
    }
    if count == 0 || count > grid.len() {
        return Err(invalid("count", format!("need 1..={} eigenvalues, got {count}", grid.len())));
    }
    let eig = SymmetricEigen::new(symmetrised(k, grid, g));
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues: Vec<f64> = order[..count].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenfunctions = DMatrix::zeros(grid.len(), count);
    for (col, &i) in order[..count].iter().enumerate() {
        for r in 0..grid.len() {
            eigenfunctions[(r, col)] = eig.eigenvectors[(r, i)] / grid.weights[r].sqrt();
        }
    }
    let fine = NystromGrid::new(2 * grid.len(), grid.half_width)?;
    let fine_eigs = sorted_desc(symmetrised(k, &fine, g).symmetric_eigenvalues().iter().copied().collect());
    let doubling_shift = eigenvalues.iter().zip(&fine_eigs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if doubling_shift > 1e-8 {
        return Err(Error::UnderResolved { shift: doubling_shift });
    }
    Ok(NystromResult { eigenvalues, eigenfunctions, doubling_shift })
}

/// One level of the four-fold tensor spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub level: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Multi-indices `m ∈ ℕ⁴` with `|m| = s`.
pub fn modes_at_level(s: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..=s {
        for b in 0..=s - a {
            for c in 0..=s - a - b {
                out.push([a, b, c, s - a - b - c]);
            }
        }
    }
    out
}

/// Spectrum of the product kernel: level `s` has eigenvalue `λ*^s` and
/// multiplicity `C(s+3, 3)`.
pub fn a_star_spectrum(w: f64, u: f64, s_max: usize) -> Result<Vec<SpectrumLevel>> {
    let k = GaussKernel1D::from_saddle(w, u)?;
    let one_d = mehler_eigs(&k, s_max);
    Ok((0..=s_max)
        .map(|s| SpectrumLevel {
            level: s,
            eigenvalue: one_d[0].powi(3) * one_d[s],
            multiplicity: (s + 1) * (s + 2) * (s + 3) / 6,
        })
        .collect())
}

/// Product of one-dimensional eigenfunctions for a multi-index.
pub fn hermite_mode(k: &GaussKernel1D, m: [usize; 4], x: [f64; 4]) -> f64 {
    m.iter().zip(&x).map(|(&mi, &xi)| mehler_eigenfunction(k, mi, xi)).product()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub w: f64,
    pub u_star: f64,
    pub eigenvalues: Vec<f64>,
    pub mehler_error: Vec<f64>,
    pub grid_nodes: usize,
}

pub fn spectral_report(w: f64, u: f64, nodes: usize, count: usize) -> Result<SpectralReport> {
    let k = GaussKernel1D::from_saddle(w, u)?;
    let grid = NystromGrid::for_kernel(&k, nodes)?;
    let r = nystrom_eigs(&k, &grid, count)?;
    let exact = mehler_eigs(&k, count - 1);
    let mehler_error = r.eigenvalues.iter().zip(&exact).map(|(a, b)| (a / b - 1.0).abs()).collect();
    Ok(SpectralReport { w, u_star: u, eigenvalues: r.eigenvalues, mehler_error, grid_nodes: nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mehler_closed_form_at_reference_point() {
        let k = GaussKernel1D::from_saddle(10.0, 1.0).unwrap();
        let (alpha, lambda) = saddle_params(10.0, 1.0);
        assert!((k.mehler_q() - 0.868_225_531_212_421_7).abs() < 1e-14);
        assert!((k.mehler_q() * (1.0 + alpha / 10.0 + 0.01) - 1.0).abs() < 1e-14);
        assert!((k.mehler_q() - lambda).abs() < 1e-14);
        assert!((k.mehler_lambda0() - 1.0).abs() < 1e-12);
        assert!((k.s() - 2.0 * alpha).abs() < 1e-13);
    }

    #[test]
    fn q_equals_lambda_star() {
        let mut r = crate::rng::stream(5, 0);
        use rand::Rng;
        for _ in 0..20 {
            let w = 2.0 + 200.0 * r.random::<f64>();
            let u = 0.05 + 0.95 * r.random::<f64>();
            let k = GaussKernel1D::from_saddle(w, u).unwrap();
            let (_, lambda) = saddle_params(w, u);
            assert!((k.mehler_q() - lambda).abs() <= 1e-14);
            assert!((k.mehler_lambda0() - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn rank_one_collapse() {
        let k = GaussKernel1D::new(1.0, 1e-12, 1.0).unwrap();
        assert!(k.mehler_q() < 1e-11);
        assert!(GaussKernel1D::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn nystrom_matches_mehler() {
        for &w in &[5.0, 10.0, 20.0, 40.0] {
            for &u in &[0.5, 0.8, 1.0] {
                let k = GaussKernel1D::from_saddle(w, u).unwrap();
                let grid = NystromGrid::for_kernel(&k, 400).unwrap();
                assert!(grid.weights.iter().all(|&x| x > 0.0));
                assert!((grid.weights.iter().sum::<f64>() - 2.0 * grid.half_width).abs() < 1e-12 * grid.half_width);
                let r = nystrom_eigs(&k, &grid, 9).unwrap();
                let exact = mehler_eigs(&k, 8);
                for (m, (a, b)) in r.eigenvalues.iter().zip(&exact).enumerate() {
                    assert!((a / b - 1.0).abs() <= 1e-8, "w={w} u={u} m={m}: {a} vs {b}");
                }
                assert!((r.eigenvalues[0] - 1.0).abs() <= 1e-8);
                assert!(r.doubling_shift <= 1e-8);
            }
        }
    }

    #[test]
    fn eigenfunctions_are_hermite_functions() {
        let k = GaussKernel1D::from_saddle(10.0, 1.0).unwrap();
        let grid = NystromGrid::for_kernel(&k, 400).unwrap();
        let r = nystrom_eigs(&k, &grid, 4).unwrap();
        for m in 0..4 {
            let f: Vec<f64> = grid.nodes.iter().map(|&x| mehler_eigenfunction(&k, m, x)).collect();
            let norm = f.iter().zip(&grid.weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
            let v = r.eigenfunctions.column(m);
            let sign = f.iter().zip(v.iter()).zip(&grid.weights).map(|((a, b), w)| a * b * w).sum::<f64>().signum();
            let mismatch = f
                .iter()
                .zip(v.iter())
                .zip(&grid.weights)
                .map(|((a, b), w)| w * (a / norm - sign * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(mismatch <= 1e-6, "m={m}: {mismatch}");
        }
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let k = GaussKernel1D::from_saddle(40.0, 1.0).unwrap();
        let grid = NystromGrid::for_kernel(&k, 20).unwrap();
        assert!(nystrom_eigs(&k, &grid, 3).is_err());
        let grid = NystromGrid::for_kernel(&k, 60).unwrap();
        assert!(matches!(nystrom_eigs(&k, &grid, 9), Err(Error::UnderResolved { .. }) | Err(Error::Invalid { .. })));
    }

    #[test]
    fn tensor_spectrum_levels() {
        let levels = a_star_spectrum(10.0, 1.0, 4).unwrap();
        assert_eq!(levels[0].multiplicity, 1);
        assert_eq!(levels[2].multiplicity, 10);
        for (s, level) in levels.iter().enumerate() {
            assert_eq!(modes_at_level(s).len(), level.multiplicity);
        }
        let (alpha, lambda) = saddle_params(10.0, 1.0);
        assert!((levels[1].eigenvalue - lambda).abs() < 1e-12);
        let gap = levels[0].eigenvalue - levels[1].eigenvalue;
        assert!((gap - (alpha / 10.0 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert!((hermite(2, 0.5) - (4.0 * 0.25 - 2.0)).abs() < 1e-15);
        assert!((hermite(3, 0.5) - (8.0 * 0.125 - 12.0 * 0.5)).abs() < 1e-15);
        let k = GaussKernel1D::from_saddle(10.0, 1.0).unwrap();
        assert!((hermite_mode(&k, [0, 0, 0, 0], [0.0; 4]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_perturbation_scales_like_w_minus_two() {
        let mut shifts = Vec::new();
        for &w in &[40.0f64, 80.0, 160.0] {
            let k = GaussKernel1D::from_saddle(w, 1.0).unwrap();
            let grid = NystromGrid::for_kernel(&k, 400).unwrap();
            let base = nystrom_eigs(&k, &grid, 4).unwrap().eigenvalues;
            let eps = w.powf(-1.5);
            let pert = nystrom_eigs_weighted(&k, &grid, 4, &|x| (eps * x.powi(3)).exp()).unwrap().eigenvalues;
            shifts.push(base.iter().zip(&pert).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>());
        }
        for (m, ((a, b), d)) in shifts[0].iter().zip(&shifts[1]).zip(&shifts[2]).enumerate() {
            let e1 = (a / b).log2();
            let e2 = (b / d).log2();
            assert!(e1 >= 1.9 && e2 >= 1.9, "m={m}: {e1} {e2}");
            let c = d * 160f64.powi(2) / (m + 1) as f64;
            assert!(c < 1.0);
        }
    }
}
