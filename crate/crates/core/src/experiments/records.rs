//! JSON run records and the commented metadata line of CSV outputs.

use super::config::ExperimentConfig;
use super::SCHEMA_VERSION;
use crate::error::Result;
use crate::mc::{RatioPair, SpectralPoint};
use serde::Serialize;
use std::io::Write;

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord<T: Serialize> {
    pub schema_version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    pub results: T,
    pub wall_time_s: f64,
}

impl<T: Serialize> RunRecord<T> {
    pub fn new(command: &str, config: &ExperimentConfig, results: T, wall_time_s: f64) -> Self {
        RunRecord { schema_version: SCHEMA_VERSION, command: command.into(), config: config.echo(), results, wall_time_s }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One Monte Carlo ratio measurement.
#[derive(Clone, Debug, Serialize)]
pub struct McRecord {
    pub n: usize,
    pub w: f64,
    pub z: [f64; 2],
    pub zeta: [f64; 2],
    pub samples: usize,
    pub gin: f64,
    pub gin_stderr: f64,
    pub loc: f64,
    pub loc_stderr: f64,
    pub singular_count: usize,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl McRecord {
    pub fn new(point: &SpectralPoint, pair: &RatioPair, wall_time_s: f64) -> Self {
        McRecord {
            n: point.n,
            w: point.w,
            z: [point.z.re, point.z.im],
            zeta: [point.zeta.re, point.zeta.im],
            samples: pair.gin.samples,
            gin: pair.gin.value,
            gin_stderr: pair.gin.stderr,
            loc: pair.loc.value,
            loc_stderr: pair.loc.stderr,
            singular_count: pair.singular_count,
            seed: pair.gin.seed,
            wall_time_s,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CsvMeta {
    pub schema_version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl CsvMeta {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        CsvMeta { schema_version: SCHEMA_VERSION, command: command.into(), config: config.echo(), info: None, errors: Vec::new() }
    }
}

pub fn write_meta_line<W: Write>(mut out: W, meta: &CsvMeta) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(meta)?)?;
    Ok(())
}

/// `# {json}` followed by a header row and the data rows.
pub fn write_csv<W: Write>(mut out: W, meta: &CsvMeta, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_meta_line(&mut out, meta)?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let cfg = ExperimentConfig { n: Some(4), workers: Some(8), ..Default::default() };
        let mut meta = CsvMeta::new("crossover-scan", &cfg);
        meta.errors.push("w=3: boom".into());
        let mut buf = Vec::new();
        write_csv(&mut buf, &meta, &["a", "b"], &[vec![1.0, f64::NAN]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {"));
        assert!(!lines[0].contains("workers"));
        let meta_json: serde_json::Value = serde_json::from_str(&lines[0][2..]).unwrap();
        assert_eq!(meta_json["schema_version"], SCHEMA_VERSION);
        assert_eq!(meta_json["config"]["n"], 4);
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.0000000000000000e0,NaN");
    }
}
