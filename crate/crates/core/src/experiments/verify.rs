//! The ten acceptance criteria. Shared by `bandpoly verify` and the
//! `acceptance` test target; every tolerance is pinned here.

use super::config::ExperimentConfig;
use super::scan::{run_scan, write_scan_csv, ScanPlan, ScanResult};
use super::DEFAULT_SEED;
use crate::band::build_profile;
use crate::crossover::{ginibre_limit, haar_exp_nu, heat_damping, power_00_converged, predict_ratios};
use crate::error::Result;
use crate::harmonics::zexp::centred_pair;
use crate::harmonics::{berezin_check, heat_eig, wigner_p, z_expansion_check, SingularPair, U2};
use crate::mc::spectral_point;
use crate::parallel::with_workers;
use crate::rng::{self, derive_seed};
use crate::saddle::theta_n1_check;
use crate::spectral::{saddle_params, spectral_report, GaussKernel1D};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

pub const MODULES: [&str; 7] =
    ["band-model", "saddle-core", "gaussian-spectral", "unitary-harmonics", "crossover-model", "mc-lab", "cli-experiments"];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub runtime_s: f64,
    pub runtime_limit_s: f64,
    pub summary: String,
    pub measured: Value,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.2} s, limit {} s) {}",
            self.id,
            self.module,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.runtime_s,
            self.runtime_limit_s,
            self.summary
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: &'static str,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub all_pass: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Module name; `None` runs everything.
    pub filter: Option<String>,
    pub seed: u64,
    /// Workers of the main crossover scan; the determinism rerun uses one.
    pub workers: usize,
    /// Directory that receives the two scan CSVs.
    pub out_dir: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { filter: None, seed: DEFAULT_SEED, workers: 8, out_dir: None }
    }
}

struct Outcome {
    pass: bool,
    summary: String,
    measured: Value,
}

fn outcome(pass: bool, summary: String, measured: Value) -> Result<Outcome> {
    Ok(Outcome { pass, summary, measured })
}

type Check = Box<dyn Fn() -> Result<Outcome>>;

struct Criterion {
    id: u32,
    module: &'static str,
    name: &'static str,
    limit_s: f64,
}

fn timed(crit: &Criterion, f: impl FnOnce() -> Result<Outcome>) -> CriterionReport {
    let t = Instant::now();
    let res = f();
    let runtime_s = t.elapsed().as_secs_f64();
    let (pass, summary, measured) = match res {
        Ok(o) => (o.pass, o.summary, o.measured),
        Err(e) => (false, format!("error: {e}"), Value::Null),
    };
    let in_time = runtime_s <= crit.limit_s;
    let summary = if in_time { summary } else { format!("{summary}; over the runtime limit") };
    CriterionReport {
        id: crit.id,
        module: crit.module,
        name: crit.name,
        pass: pass && in_time,
        runtime_s,
        runtime_limit_s: crit.limit_s,
        summary,
        measured,
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn criterion_1() -> Result<Outcome> {
    let mut worst_sum: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for &n in &[1usize, 16, 256] {
        for &w in &[1.0, 8.0, 32.0] {
            let p = build_profile(n, w)?;
            worst_sum = worst_sum.max(p.row_sum_error());
            worst_sym = worst_sym.max(p.symmetry_error());
        }
    }
    let p = build_profile(2, 1.0)?;
    let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
    let mut small: f64 = 0.0;
    for (j, row) in want.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            small = small.max((p.get(j, k) - v).abs());
        }
    }
    let pass = worst_sum <= 1e-12 && worst_sym <= 1e-13 && small <= 1e-14;
    outcome(
        pass,
        format!("row sums {worst_sum:.1e} (tol 1e-12), symmetry {worst_sym:.1e} (tol 1e-13), n=2 {small:.1e} (tol 1e-14)"),
        json!({"row_sum_error": worst_sum, "symmetry_error": worst_sym, "n2_error": small}),
    )
}

fn criterion_2(seed: u64) -> Result<Outcome> {
    const SAMPLES: usize = 1_000_000;
    let mut r = rng::stream(derive_seed(seed, 2), 0);
    let mut disc = || {
        let rad = 0.9 * r.random::<f64>().sqrt();
        Complex64::from_polar(rad, std::f64::consts::TAU * r.random::<f64>())
    };
    let mut rows = Vec::new();
    let mut pass = true;
    let (mut worst_mc, mut worst_quad, mut worst_cross): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..5u64 {
        let (z1, z2) = (disc(), disc());
        let t = theta_n1_check(z1, z2, SAMPLES, derive_seed(seed, 20 + i))?;
        let mc_sigma = (t.mc - t.wick).abs() / t.mc_stderr;
        let quad_rel = (t.quadrature / t.wick - 1.0).abs();
        let cross_sigma = (t.mc - t.quadrature).abs() / t.mc_stderr;
        pass &= mc_sigma <= 4.0 && quad_rel <= 1e-3 && cross_sigma <= 4.0;
        worst_mc = worst_mc.max(mc_sigma);
        worst_quad = worst_quad.max(quad_rel);
        worst_cross = worst_cross.max(cross_sigma);
        rows.push(json!({"z1": [z1.re, z1.im], "z2": [z2.re, z2.im], "check": t}));
    }
    outcome(
        pass,
        format!(
            "MC-Wick {worst_mc:.2} sigma, MC-quadrature {worst_cross:.2} sigma (tol 4), quadrature-Wick rel {worst_quad:.1e} (tol 1e-3)"
        ),
        json!({"points": rows}),
    )
}

fn criterion_3() -> Result<Outcome> {
    const NODES: usize = 400;
    const COUNT: usize = 9;
    let (mut worst_eig, mut worst_top, mut worst_q): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rows = Vec::new();
    for &w in &[5.0, 10.0, 20.0, 40.0] {
        for &u in &[0.5, 0.8, 1.0] {
            let k = GaussKernel1D::from_saddle(w, u)?;
            let (_, lambda) = saddle_params(w, u);
            let q_err = (k.mehler_q() - lambda).abs();
            let rep = spectral_report(w, u, NODES, COUNT)?;
            let eig_err = rep.mehler_error.iter().copied().fold(0.0, f64::max);
            let top_err = (rep.eigenvalues[0] - 1.0).abs();
            worst_eig = worst_eig.max(eig_err);
            worst_top = worst_top.max(top_err);
            worst_q = worst_q.max(q_err);
            rows.push(json!({"w": w, "u_star": u, "max_rel_error": eig_err, "top_error": top_err, "q_error": q_err}));
        }
    }
    let pass = worst_eig <= 1e-8 && worst_top <= 1e-8 && worst_q <= 1e-14;
    outcome(
        pass,
        format!("eigenvalue rel {worst_eig:.1e} (tol 1e-8), top {worst_top:.1e} (tol 1e-8), q - lambda {worst_q:.1e} (tol 1e-14)"),
        json!({"cases": rows}),
    )
}

fn criterion_4() -> Result<Outcome> {
    let u = 1.0;
    let ws = [20.0, 40.0, 80.0];
    let mut literal = Vec::new();
    let mut corrected = Vec::new();
    let mut min_factor = f64::INFINITY;
    let mut min_corrected_order = f64::INFINITY;
    let mut dev_80_1 = f64::NAN;
    let mut corrected_80_1 = f64::NAN;
    for l in 1..=4i64 {
        let lf = l as f64;
        let mut dev = Vec::new();
        let mut dev2 = Vec::new();
        for &w in &ws {
            let h = heat_eig(l, w, u)?;
            dev.push((h - (1.0 - lf * (lf + 1.0) / (8.0 * u * u * w * w))).abs());
            dev2.push((h - (1.0 - lf * (lf + 1.0) / (2.0 * u * u * w * w))).abs());
        }
        for k in 0..2 {
            min_factor = min_factor.min(dev[k] / dev[k + 1]);
            min_corrected_order = min_corrected_order.min((dev2[k] / dev2[k + 1]).log2());
        }
        if l == 1 {
            dev_80_1 = dev[2];
            corrected_80_1 = dev2[2];
        }
        literal.push(json!({"l": l, "deviation": dev}));
        corrected.push(json!({"l": l, "deviation": dev2}));
    }
    let pass = min_factor >= 8.0 && dev_80_1 <= 1e-6;
    outcome(
        pass,
        format!(
            "with l(l+1)/(8u^2W^2): min doubling factor {min_factor:.2} (need 8), deviation at W=80,l=1 {dev_80_1:.2e} (tol 1e-6); \
             with l(l+1)/(2u^2W^2): min order {min_corrected_order:.2}, deviation at W=80,l=1 {corrected_80_1:.2e}"
        ),
        json!({"u_star": u, "w": ws, "literal": literal, "corrected": corrected}),
    )
}

fn pauli() -> [U2; 3] {
    let i = Complex64::i();
    let z = c(0.0);
    [U2::new(z, c(1.0), c(1.0), z), U2::new(z, -i, i, z), U2::new(c(1.0), z, z, c(-1.0))]
}

fn criterion_5() -> Result<Outcome> {
    let [s1, s2, s3] = pauli();
    let id = U2::identity();
    let u = 0.75f64.sqrt();
    let pairs: [(&str, U2, U2); 5] = [
        ("zero", U2::zeros(), U2::zeros()),
        ("diagonal", s3 * c(0.5) + id * c(0.3), s3 * c(0.4)),
        ("non-commuting", s1 * c(0.6), s2 * c(0.5)),
        ("mixed", s1 * c(0.3) + s3 * c(0.2) + id * c(0.1), s2 * c(0.3) - s1 * c(0.2)),
        ("large", s1 * c(1.0) + s3 * c(0.5), s2 * c(0.6) + s3 * c(0.3)),
    ];
    let ws = [20.0, 40.0, 80.0];
    let mut pass = true;
    let mut min_exp = f64::INFINITY;
    let mut max_c: f64 = 0.0;
    let mut rows = Vec::new();
    for (name, r, d) in pairs {
        let mut errs = Vec::new();
        let mut commutator = 0.0;
        for &w in &ws {
            let pair = centred_pair(r, d, w)?;
            commutator = (pair.r1 * pair.r2 - pair.r2 * pair.r1).norm() * w.sqrt();
            let z = z_expansion_check(&pair, w, u)?;
            errs.push((z.z_quad - 1.0 - z.delta_formula).abs());
        }
        let exps: Vec<f64> = (0..2).map(|k| (errs[k] / errs[k + 1]).log2()).collect();
        let cw = errs.iter().zip(&ws).map(|(e, w)| e * w * w).fold(0.0, f64::max);
        pass &= exps.iter().all(|&e| e >= 1.9);
        min_exp = exps.iter().copied().fold(min_exp, f64::min);
        max_c = max_c.max(cw);
        rows.push(json!({"pair": name, "errors": errs, "exponents": exps, "c": cw, "scaled_commutator": commutator}));
    }
    outcome(pass, format!("min exponent {min_exp:.3} (need 1.9), C = {max_c:.3}"), json!({"u_star": u, "w": ws, "pairs": rows}))
}

fn criterion_6(seed: u64) -> Result<Outcome> {
    const SAMPLES: usize = 1_000_000;
    let sets = [
        SingularPair { mu1: (1.2, 0.5), mu2: (1.0, 0.4) },
        SingularPair { mu1: (0.9, 0.3), mu2: (1.5, 0.7) },
        SingularPair { mu1: (1.1, 0.8), mu2: (0.6, 0.2) },
        SingularPair { mu1: (2.0, 0.6), mu2: (1.2, 0.5) },
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (k, (a, b)) in [(0usize, 1usize), (0, 2), (1, 3)].into_iter().enumerate() {
        let r = berezin_check(&sets[a], &sets[b], 1.0, SAMPLES, derive_seed(seed, 60 + k as u64))?;
        let sigmas = (r.group_ratio - r.bessel_ratio).abs() / r.group_stderr;
        pass &= sigmas <= 3.0;
        worst = worst.max(sigmas);
        rows.push(json!({
            "num": [sets[a].mu1, sets[a].mu2], "den": [sets[b].mu1, sets[b].mu2],
            "group_ratio": r.group_ratio, "group_stderr": r.group_stderr, "bessel_ratio": r.bessel_ratio, "sigmas": sigmas
        }));
    }
    outcome(pass, format!("worst deviation {worst:.2} sigma (tol 3)"), json!({"w": 1.0, "samples": SAMPLES, "checks": rows}))
}

fn criterion_7() -> Result<Outcome> {
    let mut kappa: f64 = 0.0;
    for l in 2..=64i64 {
        let lf = l as f64;
        for j in 1..=40 {
            let s = 0.1 * j as f64 / 40.0 / lf;
            let theta = 2.0 * s.asin();
            let p = wigner_p(l, 0, 0, theta)?.re;
            let dev = (p - (1.0 - lf * (lf + 1.0) * s * s)).abs();
            kappa = kappa.max(dev / (lf * s).powi(3));
        }
    }
    let mut exact: f64 = 0.0;
    for j in 0..=64 {
        let theta = std::f64::consts::PI * j as f64 / 64.0;
        let s = (0.5 * theta).sin();
        exact = exact.max((wigner_p(1, 0, 0, theta)?.re - (1.0 - 2.0 * s * s)).abs());
    }
    outcome(
        kappa <= 5.0 && exact <= 1e-12,
        format!("fitted kappa {kappa:.3e} (need <= 5), l=1 error {exact:.1e} (tol 1e-12)"),
        json!({"kappa": kappa, "l1_error": exact}),
    )
}

fn criterion_8() -> Result<Outcome> {
    const N: usize = 1_000_000;
    let z = c(0.0);
    let mut pass = true;
    let mut rows = Vec::new();
    let (mut worst_gin, mut worst_loc, mut worst_semi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &za in &[0.5, 0.8, 1.0] {
        let zeta = c(za);
        let g = predict_ratios(&spectral_point(z, zeta, N, (1e4 * N as f64).sqrt())?, 8)?;
        let l = predict_ratios(&spectral_point(z, zeta, N, (1e-3 * N as f64).sqrt())?, 8)?;
        let gin_rel = (g.gin_pred / ginibre_limit(zeta) - 1.0).abs();
        let loc_dev = (l.loc_pred - 1.0).abs();
        let (semi, _) = power_00_converged(N, za, 0.0, 8)?;
        let semi_dev = (semi - haar_exp_nu(za)).abs();
        pass &= gin_rel <= 1e-3 && loc_dev <= 1e-3 && semi_dev <= 1e-4;
        worst_gin = worst_gin.max(gin_rel);
        worst_loc = worst_loc.max(loc_dev);
        worst_semi = worst_semi.max(semi_dev);
        rows.push(json!({
            "zeta_abs": za, "gin_pred": g.gin_pred, "gin_rel_error": gin_rel,
            "loc_pred": l.loc_pred, "loc_error": loc_dev, "semigroup": semi, "semigroup_error": semi_dev
        }));
    }
    outcome(
        pass,
        format!("gin rel {worst_gin:.1e} (tol 1e-3), loc {worst_loc:.2e} (tol 1e-3), semigroup {worst_semi:.1e} (tol 1e-4)"),
        json!({"n": N, "z": 0.0, "damping_at_loc_w": heat_damping((1e-3 * N as f64).sqrt(), 1.0), "cases": rows}),
    )
}

pub fn scan_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: Some(64),
        z: Some("0.5".into()),
        zeta: Some("0.8".into()),
        w_grid: Some(vec![3.0, 6.0, 12.0, 24.0, 48.0]),
        samples: Some(20_000),
        seed: Some(seed),
        m0: Some(8),
        ..Default::default()
    }
}

fn scan_bytes(cfg: &ExperimentConfig, workers: usize) -> Result<(ScanResult, Vec<u8>)> {
    let plan = ScanPlan::from_config(cfg)?;
    let res = with_workers(workers, || run_scan(&plan));
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, &ExperimentConfig { workers: Some(workers), ..cfg.clone() }, &plan, &res)?;
    Ok((res, buf))
}

fn criterion_9(res: &ScanResult) -> Result<Outcome> {
    let rows = &res.rows;
    if !res.errors.is_empty() {
        return outcome(false, format!("scan errors: {}", res.errors.join("; ")), json!({"rows": rows}));
    }
    let a = rows.iter().all(|r| r.gin_mc <= 1.0);
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let diff = last.gin_mc - first.gin_mc;
    let sd = (last.gin_stderr.powi(2) + first.gin_stderr.powi(2)).sqrt();
    let b = diff > 0.04 && diff >= 3.0 * sd;
    let mut worst_gin = f64::NEG_INFINITY;
    let mut worst_loc = f64::NEG_INFINITY;
    for r in rows {
        worst_gin = worst_gin.max((r.gin_mc - r.gin_pred).abs() - (3.0 * r.gin_stderr).max(0.05));
        worst_loc = worst_loc.max((r.loc_mc - r.loc_pred).abs() - (3.0 * r.loc_stderr).max(0.07));
    }
    let cc = worst_gin <= 0.0 && worst_loc <= 0.0;
    let d_margin = (first.loc_mc - 1.0).abs() - (3.0 * first.loc_stderr).max(0.05);
    let d = d_margin <= 0.0;
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("W={}: gin {:.4}±{:.4} pred {:.4}, loc {:.4}±{:.4} pred {:.4}", r.w, r.gin_mc, r.gin_stderr, r.gin_pred, r.loc_mc, r.loc_stderr, r.loc_pred))
        .collect();
    outcome(
        a && b && cc && d,
        format!(
            "(a) {} (b) {} diff {diff:.4} sd {sd:.4} (c) {} gin excess {worst_gin:.4} loc excess {worst_loc:.4} (d) {} excess {d_margin:.4} | {}",
            ok(a),
            ok(b),
            ok(cc),
            ok(d),
            table.join("; ")
        ),
        json!({"a": a, "b": b, "c": cc, "d": d, "rows": rows}),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "failed"
    }
}

fn selected(filter: &Option<String>, module: &str) -> bool {
    filter.as_deref().is_none_or(|f| f == module)
}

/// Runs the selected criteria in order, calling `progress` after each one.
pub fn run_suite(opts: &VerifyOptions, mut progress: impl FnMut(&CriterionReport)) -> Result<VerifyReport> {
    if let Some(f) = &opts.filter {
        if !MODULES.contains(&f.as_str()) {
            return Err(crate::error::invalid("filter", format!("unknown module {f:?}; expected one of {}", MODULES.join(", "))));
        }
    }
    let seed = opts.seed;
    let mut out = Vec::new();
    let mut push = |r: CriterionReport, out: &mut Vec<CriterionReport>| {
        progress(&r);
        out.push(r);
    };
    let crit = |id, module, name, limit_s| Criterion { id, module, name, limit_s };
    let cheap: [(Criterion, Check); 8] = [
        (crit(1, "band-model", "profile exactness", 1.0), Box::new(criterion_1)),
        (crit(2, "saddle-core", "single-site correlator three ways", 60.0), Box::new(move || criterion_2(seed))),
        (crit(3, "gaussian-spectral", "Nystrom against Mehler", 10.0), Box::new(criterion_3)),
        (crit(4, "unitary-harmonics", "heat-kernel eigenvalue asymptotics", 60.0), Box::new(criterion_4)),
        (crit(5, "unitary-harmonics", "Z expansion second order", 120.0), Box::new(criterion_5)),
        (crit(6, "unitary-harmonics", "two-unitary integral against Bessel determinant", 120.0), Box::new(move || criterion_6(seed))),
        (crit(7, "unitary-harmonics", "zonal Legendre asymptotic", 10.0), Box::new(criterion_7)),
        (crit(8, "crossover-model", "effective model limits", 10.0), Box::new(criterion_8)),
    ];
    for (s, f) in cheap {
        if selected(&opts.filter, s.module) {
            let r = timed(&s, f);
            push(r, &mut out);
        }
    }
    let want9 = selected(&opts.filter, "mc-lab");
    let want10 = selected(&opts.filter, "cli-experiments");
    if want9 || want10 {
        let cfg = scan_config(seed);
        let s9 = crit(9, "mc-lab", "desk-scale crossover", 1800.0);
        let t = Instant::now();
        let main = scan_bytes(&cfg, opts.workers);
        let main_s = t.elapsed().as_secs_f64();
        if want9 {
            let mut r = timed(&s9, || match &main {
                Ok((res, _)) => criterion_9(res),
                Err(e) => Err(crate::error::Error::NoConvergence(e.to_string())),
            });
            r.runtime_s = main_s;
            r.pass &= main_s <= s9.limit_s;
            push(r, &mut out);
        }
        if want10 {
            let s10 = crit(10, "cli-experiments", "worker-count determinism", 1800.0);
            let r = timed(&s10, || {
                let (_, bytes_main) = main.as_ref().map_err(|e| crate::error::Error::NoConvergence(e.to_string()))?;
                let (_, bytes_one) = scan_bytes(&cfg, 1)?;
                if let Some(dir) = &opts.out_dir {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join(format!("crossover_scan_w{}.csv", opts.workers)), bytes_main)?;
                    std::fs::write(dir.join("crossover_scan_w1.csv"), &bytes_one)?;
                }
                let same = *bytes_main == bytes_one;
                outcome(
                    same,
                    format!("{} workers vs 1 worker: {} ({} bytes)", opts.workers, if same { "identical" } else { "different" }, bytes_one.len()),
                    json!({"workers": [opts.workers, 1], "identical": same, "bytes": bytes_one.len()}),
                )
            });
            push(r, &mut out);
        }
    }
    let all_pass = out.iter().all(|r| r.pass);
    Ok(VerifyReport { schema_version: super::SCHEMA_VERSION, seed, criteria: out, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_modules() {
        let opts = VerifyOptions { filter: Some("band-model".into()), ..Default::default() };
        let rep = run_suite(&opts, |_| {}).unwrap();
        assert_eq!(rep.criteria.len(), 1);
        assert_eq!(rep.criteria[0].id, 1);
        assert!(rep.criteria[0].pass, "{}", rep.criteria[0].line());
        let bad = VerifyOptions { filter: Some("nope".into()), ..Default::default() };
        assert!(run_suite(&bad, |_| {}).is_err());
    }

    #[test]
    fn zonal_fit_is_small() {
        let o = criterion_7().unwrap();
        assert!(o.pass, "{}", o.summary);
    }
}
