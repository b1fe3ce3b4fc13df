//! The unitary-sector factor `𝒵(R1, R2)` and its commutator expansion.

use super::bessel::bessel_i0_scaled;
use super::bracket::HermitianPair;
use super::U2;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ZExpansion {
    pub z_quad: f64,
    pub delta_formula: f64,
    /// Nodes per axis of the accepted rule.
    pub nodes: usize,
}

/// Cylinder Jacobian `π³ (Tr R)² det R` of a positive Hermitian `R`.
pub fn cylinder_jacobian(r: &U2) -> f64 {
    PI.powi(3) * r.trace().re.powi(2) * r.determinant().re
}

fn traceless(r: &U2) -> U2 {
    r - U2::identity() * (r.trace() * 0.5)
}

/// `u² Tr[R2,R1][R1,R2] / (2 Tr S) - Tr(R1° + R2°)² / (4 W Tr S)`
pub fn delta_formula(pair: &HermitianPair, w: f64, u_star: f64) -> f64 {
    let (r1, r2) = (pair.r1, pair.r2);
    let tr_s = pair.tr_s(w);
    let com = |a: &U2, b: &U2| a * b - b * a;
    let c = (com(&r2, &r1) * com(&r1, &r2)).trace().re;
    let t = traceless(&r1) + traceless(&r2);
    u_star * u_star * c / (2.0 * tr_s) - (t * t).trace().re / (4.0 * w * tr_s)
}

/// `∫ dU exp{κ (Re Tr UM - Tr M)}` with `M = (1 + R1/√W)(1 + R2/√W)` and
/// `κ = 2u²W²`, normalised by Haar volume. The δ-integral is done exactly:
/// it produces `2π e^{κ|b|} I0e(κ|b|)` with `b` the off-diagonal coupling.
fn unitary_integral(m: &U2, kappa: f64, a: f64, n: usize) -> f64 {
    let r = 1.0 / a.sqrt();
    let (lt, ls, lg) = ((28.0 * r).min(PI), (14.0 * r).min(PI), (14.0 * r).min(FRAC_PI_2));
    let gt = GaussLegendre::on_interval(n, 0.0, lt);
    let gs = GaussLegendre::on_interval(n, -ls, ls);
    let gg = GaussLegendre::on_interval(n, -lg, lg);
    let i = Complex64::i();
    let tr = m.trace().re;
    let mut acc = 0.0;
    for (&t, &wt) in gt.nodes.iter().zip(&gt.weights) {
        let (s, c) = (0.5 * t).sin_cos();
        let wt = wt * t.sin();
        for (&sg, &ws) in gs.nodes.iter().zip(&gs.weights) {
            let es = Complex64::from_polar(1.0, sg);
            let diag = es * m[(0, 0)] + es.conj() * m[(1, 1)];
            for (&g, &wg) in gg.nodes.iter().zip(&gg.weights) {
                let eg = Complex64::from_polar(1.0, g);
                let main = (c * eg * diag).re;
                let off = (i * s * eg * m[(1, 0)] + (i * s * eg * m[(0, 1)]).conj()).norm();
                let e = kappa * (main + off - tr);
                let i0 = bessel_i0_scaled(kappa * off).expect("non-negative argument");
                acc += wt * ws * wg * e.exp() * i0 * 2.0 * PI;
            }
        }
    }
    acc / (8.0 * PI.powi(3))
}

/// `𝒵(R1, R2)` by quadrature together with `Δ`. The normalisation
/// `2 W⁴ / π²` makes `𝒵 → 1` as `W → ∞` at `R1 = R2 = 0`.
pub fn z_expansion_check(pair: &HermitianPair, w: f64, u_star: f64) -> Result<ZExpansion> {
    if !w.is_finite() || w <= 1.0 {
        return Err(invalid("w", format!("need w > 1, got {w}")));
    }
    if !(u_star > 0.0 && u_star <= 1.0) {
        return Err(invalid("u_star", format!("must lie in (0, 1], got {u_star}")));
    }
    let (a1, a2) = pair.shifted(w);
    let m = a1 * a2;
    let (c1, c2) = (a1 * Complex64::from(u_star), a2 * Complex64::from(u_star));
    let (j1, j2) = (cylinder_jacobian(&c1), cylinder_jacobian(&c2));
    if j1 <= 0.0 || j2 <= 0.0 {
        return Err(invalid("pair", "1 + R/√W must be positive definite"));
    }
    let kappa = 2.0 * u_star * u_star * w * w;
    let a = kappa * pair.tr_s(w);
    let prefactor = 2.0 * w.powi(4) / (PI * PI) * (j1 * j2).sqrt();
    let mut n = 32;
    let mut prev = prefactor * unitary_integral(&m, kappa, a, n);
    loop {
        let next = (n * 3).div_ceil(2);
        if next > 300 {
            return Err(Error::NoConvergence(format!("Z quadrature at {n} nodes per axis")));
        }
        let cur = prefactor * unitary_integral(&m, kappa, a, next);
        if (cur - prev).abs() <= 1e-11 * cur.abs().max(1.0) {
            return Ok(ZExpansion { z_quad: cur, delta_formula: delta_formula(pair, w, u_star), nodes: next });
        }
        prev = cur;
        n = next;
    }
}

/// `(R + D/√W, R - D/√W)`
pub fn centred_pair(r: U2, d: U2, w: f64) -> Result<HermitianPair> {
    let s = Complex64::from(1.0 / w.sqrt());
    HermitianPair::new(r + d * s, r - d * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn pauli() -> [U2; 3] {
        let i = Complex64::i();
        let z = c(0.0);
        [U2::new(z, c(1.0), c(1.0), z), U2::new(z, -i, i, z), U2::new(c(1.0), z, z, c(-1.0))]
    }

    #[test]
    fn zero_pair_is_one_up_to_w_minus_two() {
        let u = 0.75f64.sqrt();
        let mut prev = None;
        for &w in &[20.0, 40.0, 80.0] {
            let z = z_expansion_check(&HermitianPair::zero(), w, u).unwrap();
            assert_eq!(z.delta_formula, 0.0);
            let e = (z.z_quad - 1.0).abs();
            assert!(e < 1.0 / (w * w));
            if let Some(p) = prev {
                let order = f64::log2(p / e);
                assert!(order > 1.9, "order {order}");
            }
            prev = Some(e);
        }
    }

    #[test]
    fn commuting_pair_has_no_commutator_term() {
        let [_, _, s3] = pauli();
        let w = 40.0;
        let pair = centred_pair(s3 * c(0.5) + U2::identity() * c(0.3), s3 * c(0.4), w).unwrap();
        let r = pair.r1 * pair.r2 - pair.r2 * pair.r1;
        assert!(r.norm() < 1e-15);
        let z = z_expansion_check(&pair, w, 0.75f64.sqrt()).unwrap();
        assert!((z.z_quad - 1.0 - z.delta_formula).abs() <= 20.0 / (w * w));
    }

    #[test]
    fn non_commuting_pair_converges_at_second_order() {
        let [s1, s2, _] = pauli();
        let u = 0.75f64.sqrt();
        let errs: Vec<f64> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&w| {
                let pair = centred_pair(s1 * c(0.6), s2 * c(0.5), w).unwrap();
                let z = z_expansion_check(&pair, w, u).unwrap();
                assert!(z.delta_formula > 0.0);
                (z.z_quad - 1.0 - z.delta_formula).abs()
            })
            .collect();
        assert!(errs[0] / errs[1] > 2f64.powf(1.9));
        assert!(errs[1] / errs[2] > 2f64.powf(1.9));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(z_expansion_check(&HermitianPair::zero(), 0.5, 1.0).is_err());
        assert!(z_expansion_check(&HermitianPair::zero(), 20.0, 0.0).is_err());
        let big = HermitianPair::new(U2::identity() * c(-10.0), U2::zeros()).unwrap();
        assert!(z_expansion_check(&big, 20.0, 1.0).is_err());
    }
}
