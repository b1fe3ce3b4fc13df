//! Monte Carlo ratios against the effective-model prediction over a bandwidth grid.

use super::config::ExperimentConfig;
use super::records::{write_csv, CsvMeta};
use crate::crossover::{ginibre_limit, predict_ratios};
use crate::error::Result;
use crate::mc::{estimate_ratios, spectral_point};
use crate::rng::derive_seed;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPlan {
    pub n: usize,
    pub z: Complex64,
    pub zeta: Complex64,
    pub grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub m0: usize,
    pub model_only: bool,
}

impl ScanPlan {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<ScanPlan> {
        let plan = ScanPlan {
            n: cfg.n_or(64)?,
            z: cfg.z()?,
            zeta: cfg.zeta()?,
            grid: cfg.w_grid()?,
            samples: cfg.samples_or(DEFAULT_SAMPLES)?,
            seed: cfg.seed(),
            m0: cfg.m0()?,
            model_only: cfg.model_only.unwrap_or(false),
        };
        // fail early on parameters that would break every row
        spectral_point(plan.z, plan.zeta, plan.n, plan.grid[0])?;
        Ok(plan)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRow {
    pub w: f64,
    pub w2_over_n: f64,
    pub gin_mc: f64,
    pub gin_stderr: f64,
    pub loc_mc: f64,
    pub loc_stderr: f64,
    pub singular_count: f64,
    pub gin_pred: f64,
    pub loc_pred: f64,
    pub gin_limit: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub errors: Vec<String>,
}

const MC_HEADER: [&str; 10] =
    ["w", "w2_over_n", "gin_mc", "gin_stderr", "loc_mc", "loc_stderr", "singular_count", "gin_pred", "loc_pred", "gin_limit"];
const MODEL_HEADER: [&str; 5] = ["w", "w2_over_n", "gin_pred", "loc_pred", "gin_limit"];

/// Seed of the Monte Carlo run at bandwidth `w`; independent of the grid around it.
pub fn point_seed(seed: u64, w: f64) -> u64 {
    derive_seed(seed, w.to_bits())
}

/// Runs every grid point; a failure leaves NaN in that row and an entry in `errors`.
pub fn run_scan(plan: &ScanPlan) -> ScanResult {
    let mut out = ScanResult::default();
    for &w in &plan.grid {
        let nan = f64::NAN;
        let mut row = ScanRow {
            w,
            w2_over_n: w * w / plan.n as f64,
            gin_mc: nan,
            gin_stderr: nan,
            loc_mc: nan,
            loc_stderr: nan,
            singular_count: nan,
            gin_pred: nan,
            loc_pred: nan,
            gin_limit: ginibre_limit(plan.zeta),
        };
        match spectral_point(plan.z, plan.zeta, plan.n, w) {
            Err(e) => out.errors.push(format!("w={w}: {e}")),
            Ok(point) => {
                match predict_ratios(&point, plan.m0) {
                    Ok(p) => {
                        row.gin_pred = p.gin_pred;
                        row.loc_pred = p.loc_pred;
                    }
                    Err(e) => out.errors.push(format!("w={w}: prediction: {e}")),
                }
                if !plan.model_only {
                    match estimate_ratios(&point, plan.samples, point_seed(plan.seed, w)) {
                        Ok(r) => {
                            row.gin_mc = r.gin.value;
                            row.gin_stderr = r.gin.stderr;
                            row.loc_mc = r.loc.value;
                            row.loc_stderr = r.loc.stderr;
                            row.singular_count = r.singular_count as f64;
                        }
                        Err(e) => out.errors.push(format!("w={w}: monte carlo: {e}")),
                    }
                }
            }
        }
        out.rows.push(row);
    }
    out
}

pub fn write_scan_csv<W: Write>(out: W, cfg: &ExperimentConfig, plan: &ScanPlan, result: &ScanResult) -> Result<()> {
    let mut meta = CsvMeta::new("crossover-scan", cfg);
    meta.errors = result.errors.clone();
    let rows: Vec<Vec<f64>> = result
        .rows
        .iter()
        .map(|r| {
            if plan.model_only {
                vec![r.w, r.w2_over_n, r.gin_pred, r.loc_pred, r.gin_limit]
            } else {
                vec![r.w, r.w2_over_n, r.gin_mc, r.gin_stderr, r.loc_mc, r.loc_stderr, r.singular_count, r.gin_pred, r.loc_pred, r.gin_limit]
            }
        })
        .collect();
    let header: &[&str] = if plan.model_only { &MODEL_HEADER } else { &MC_HEADER };
    write_csv(out, &meta, header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::with_workers;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            n: Some(8),
            z: Some("0.3".into()),
            zeta: Some("0.5".into()),
            w_grid: Some(vec![4.0, 8.0]),
            samples: Some(300),
            seed: Some(5),
            ..Default::default()
        }
    }

    #[test]
    fn small_scan_is_worker_independent() {
        let c = cfg();
        let plan = ScanPlan::from_config(&c).unwrap();
        let bytes = |workers| {
            let res = with_workers(workers, || run_scan(&plan));
            assert!(res.errors.is_empty(), "{:?}", res.errors);
            let mut buf = Vec::new();
            write_scan_csv(&mut buf, &ExperimentConfig { workers: Some(workers), ..c.clone() }, &plan, &res).unwrap();
            buf
        };
        assert_eq!(bytes(1), bytes(3));
    }

    #[test]
    fn failures_become_nan_rows() {
        // at W = 1e-3 no level of the effective model is admissible
        let c = ExperimentConfig { w_grid: Some(vec![1e-3, 8.0]), model_only: Some(true), ..cfg() };
        let plan = ScanPlan { grid: vec![1e-3, 8.0], ..ScanPlan::from_config(&cfg()).unwrap() };
        let plan = ScanPlan { model_only: true, ..plan };
        let res = run_scan(&plan);
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows[0].gin_pred.is_nan());
        assert!(res.rows[1].gin_pred.is_finite());
        assert_eq!(res.errors.len(), 1);
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &c, &plan, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains("errors"));
        assert!(text.lines().nth(2).unwrap().contains("NaN"));
    }

    #[test]
    fn point_seed_depends_on_w_only() {
        assert_eq!(point_seed(1, 6.0), point_seed(1, 6.0));
        assert_ne!(point_seed(1, 6.0), point_seed(1, 12.0));
        assert_ne!(point_seed(1, 6.0), point_seed(2, 6.0));
    }
}
