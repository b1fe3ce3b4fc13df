//! The heat-kernel average `<f>` over U(2) and its eigenvalues on the
//! irreducible representations.

use super::euler::EulerAngles;
use super::wigner::wigner_p;
use super::U2;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Hermitian fluctuations `(R1, R2)` around the saddle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianPair {
    pub r1: U2,
    pub r2: U2,
}

impl HermitianPair {
    pub fn new(r1: U2, r2: U2) -> Result<Self> {
        for (name, r) in [("r1", &r1), ("r2", &r2)] {
            let err = (r - r.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
            if err > 1e-14 * (1.0 + r.norm()) {
                return Err(invalid(name, format!("not Hermitian (defect {err:.2e})")));
            }
        }
        Ok(HermitianPair { r1, r2 })
    }

    pub fn zero() -> Self {
        HermitianPair { r1: U2::zeros(), r2: U2::zeros() }
    }

    /// `(1 + R1/√W, 1 + R2/√W)`
    pub fn shifted(&self, w: f64) -> (U2, U2) {
        let s = 1.0 / w.sqrt();
        (U2::identity() + self.r1 * Complex64::from(s), U2::identity() + self.r2 * Complex64::from(s))
    }

    /// `S = {1 + R1/√W, 1 + R2/√W} / 2`
    pub fn s_matrix(&self, w: f64) -> U2 {
        let (a, b) = self.shifted(w);
        (a * b + b * a) * Complex64::from(0.5)
    }

    pub fn tr_s(&self, w: f64) -> f64 {
        self.s_matrix(w).trace().re
    }
}

/// Quadrature box around the identity: half-widths for θ (from 0), σ and γ.
/// The weight drops below `e^{-40}` outside.
fn ranges(a: f64) -> (f64, f64, f64) {
    let r = 1.0 / a.sqrt();
    ((18.0 * r).min(PI), (9.0 * r).min(PI), (9.0 * r).min(FRAC_PI_2))
}

/// Unnormalised `(∫ f w, ∫ w)` on an `n`-point product rule; δ uses `nd`
/// trapezoid nodes.
fn product_rule(a: f64, n: usize, nd: usize, f: &dyn Fn(&EulerAngles) -> Complex64) -> (Complex64, f64) {
    let (lt, ls, lg) = ranges(a);
    let gt = GaussLegendre::on_interval(n, 0.0, lt);
    let gs = GaussLegendre::on_interval(n, -ls, ls);
    let gg = GaussLegendre::on_interval(n, -lg, lg);
    let hd = TAU / nd as f64;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (&t, &wt) in gt.nodes.iter().zip(&gt.weights) {
        let c = (0.5 * t).cos();
        let wt = wt * t.sin();
        for (&s, &ws) in gs.nodes.iter().zip(&gs.weights) {
            for (&g, &wg) in gg.nodes.iter().zip(&gg.weights) {
                let weight = wt * ws * wg * (-a * (1.0 - c * s.cos() * g.cos())).exp();
                if weight == 0.0 {
                    continue;
                }
                for j in 0..nd {
                    let ang = EulerAngles { theta: t, sigma: s, delta: -PI + hd * j as f64, gamma: g };
                    num += f(&ang) * weight;
                    den += weight;
                }
            }
        }
    }
    (num, den)
}

/// θ-only integrands: the σ, γ, δ integrals only touch the weight.
fn zonal_rule(a: f64, n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let (lt, ls, lg) = ranges(a);
    let gt = GaussLegendre::on_interval(n, 0.0, lt);
    let gs = GaussLegendre::on_interval(n, -ls, ls);
    let gg = GaussLegendre::on_interval(n, -lg, lg);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &wt) in gt.nodes.iter().zip(&gt.weights) {
        let c = (0.5 * t).cos();
        let mut inner = 0.0;
        for (&s, &ws) in gs.nodes.iter().zip(&gs.weights) {
            let cs = c * s.cos();
            for (&g, &wg) in gg.nodes.iter().zip(&gg.weights) {
                inner += ws * wg * (-a * (1.0 - cs * g.cos())).exp();
            }
        }
        let w = wt * t.sin() * inner;
        num += w * f(t);
        den += w;
    }
    num / den
}

fn refine<T: Copy>(
    start: usize,
    cap: usize,
    tol: f64,
    norm: impl Fn(T, T) -> (f64, f64),
    eval: impl Fn(usize) -> T,
) -> Result<T> {
    let mut n = start;
    let mut prev = eval(n);
    let mut last = f64::NAN;
    loop {
        let next_n = (n * 3).div_ceil(2);
        if next_n > cap {
            return Err(Error::NoConvergence(format!("bracket rule reached {n} nodes per axis (last change {last:.3e})")));
        }
        let cur = eval(next_n);
        let (diff, scale) = norm(cur, prev);
        if diff <= tol * scale.max(1.0) {
            return Ok(cur);
        }
        last = diff;
        prev = cur;
        n = next_n;
    }
}

/// Normalised average `<f>` with weight `exp{-2u²W² TrS (1 - cos(θ/2) cos σ cos γ)}`
/// against the Haar density. Refined until the relative change is ≤ 1e-12.
pub fn k_bracket(pair: &HermitianPair, w: f64, u_star: f64, f: impl Fn(&EulerAngles) -> Complex64) -> Result<Complex64> {
    let a = weight_scale(pair, w, u_star)?;
    let f: &dyn Fn(&EulerAngles) -> Complex64 = &f;
    refine(
        16,
        81,
        1e-12,
        |x: Complex64, y: Complex64| ((x - y).norm(), x.norm()),
        |n| {
            let (num, den) = product_rule(a, n, (n / 4).max(8), f);
            num / den
        },
    )
}

/// Same average for integrands depending on θ only.
pub fn k_bracket_zonal(pair: &HermitianPair, w: f64, u_star: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let a = weight_scale(pair, w, u_star)?;
    let f: &dyn Fn(f64) -> f64 = &f;
    refine(24, 400, 1e-13, |x: f64, y: f64| ((x - y).abs(), x.abs()), |n| zonal_rule(a, n, f))
}

fn weight_scale(pair: &HermitianPair, w: f64, u_star: f64) -> Result<f64> {
    if !w.is_finite() || w <= 0.0 {
        return Err(invalid("w", "must be positive"));
    }
    if !(u_star > 0.0 && u_star <= 1.0) {
        return Err(invalid("u_star", format!("must lie in (0, 1], got {u_star}")));
    }
    let tr_s = pair.tr_s(w);
    if tr_s <= 0.0 {
        return Err(invalid("pair", "Tr S must be positive"));
    }
    Ok(2.0 * u_star * u_star * w * w * tr_s)
}

/// Eigenvalue of the averaging operator on the `l`-th representation,
/// `<t^{(l)}_{00}>` at `R1 = R2 = 0`.
pub fn heat_eig(l: i64, w: f64, u_star: f64) -> Result<f64> {
    if l < 0 {
        return Err(Error::IndexOutOfRange(format!("l={l}")));
    }
    if l as f64 > w {
        return Err(invalid("l", format!("l={l} exceeds the bandwidth {w}; the rule would under-resolve")));
    }
    k_bracket_zonal(&HermitianPair::zero(), w, u_star, |t| wigner_p(l, 0, 0, t).expect("l checked").re)
}

/// Leading small-angle behaviour of [`heat_eig`]: `1 - l(l+1) / (2 u² W²)`.
pub fn heat_eig_asymptotic(l: i64, w: f64, u_star: f64) -> f64 {
    let l = l as f64;
    1.0 - l * (l + 1.0) / (2.0 * u_star * u_star * w * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn normalisation_and_odd_moments() {
        let pair = HermitianPair::zero();
        let one = k_bracket(&pair, 20.0, 1.0, |_| c(1.0)).unwrap();
        assert!((one - 1.0).norm() < 1e-14);
        let odd = k_bracket(&pair, 20.0, 0.9, |a| c(a.gamma.sin())).unwrap();
        assert!(odd.norm() < 1e-14);
    }

    #[test]
    fn sin2_gamma_closed_form() {
        let i = Complex64::i();
        let r1 = U2::new(c(0.3), c(0.1) + 0.2 * i, c(0.1) - 0.2 * i, c(-0.4));
        let r2 = U2::new(c(-0.2), c(0.5), c(0.5), c(0.1));
        let pair = HermitianPair::new(r1, r2).unwrap();
        for &w in &[20.0, 40.0, 80.0] {
            let u = 0.8;
            let got = k_bracket(&pair, w, u, |a| c(a.gamma.sin().powi(2))).unwrap().re;
            let want = 1.0 / (2.0 * u * u * w * w * pair.tr_s(w));
            let ratio = got / want;
            assert!((ratio - 1.0).abs() <= 10.0 / (w * w), "w={w}: ratio {ratio}");
        }
    }

    #[test]
    fn zonal_path_agrees_with_full_rule() {
        let pair = HermitianPair::zero();
        let full = k_bracket(&pair, 6.0, 1.0, |a| c(wigner_p(2, 0, 0, a.theta).unwrap().re)).unwrap();
        let fast = k_bracket_zonal(&pair, 6.0, 1.0, |t| wigner_p(2, 0, 0, t).unwrap().re).unwrap();
        assert!((full.re - fast).abs() < 1e-11);
    }

    #[test]
    fn heat_eigenvalues() {
        assert_eq!(heat_eig(0, 20.0, 1.0).unwrap(), 1.0);
        assert!(heat_eig(21, 20.0, 1.0).is_err());
        // deviation from the small-angle form falls like W^-4
        for l in 1..=4 {
            let dev: Vec<f64> = [20.0, 40.0, 80.0]
                .iter()
                .map(|&w| (heat_eig(l, w, 1.0).unwrap() - heat_eig_asymptotic(l, w, 1.0)).abs())
                .collect();
            assert!(dev[0] / dev[1] >= 8.0 && dev[1] / dev[2] >= 8.0, "l={l}: {dev:?}");
        }
        let h = heat_eig(1, 20.0, 1.0).unwrap();
        assert!((h - (1.0 - 2.0 / 800.0)).abs() < 5.0 / 20f64.powi(4));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = U2::new(c(0.0), c(1.0), c(0.0), c(0.0));
        assert!(HermitianPair::new(m, U2::zeros()).is_err());
    }
}
