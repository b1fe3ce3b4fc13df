use bandpoly_core::band::build_profile;
use bandpoly_core::experiments::config::ExperimentConfig;
use bandpoly_core::experiments::records::{fmt_num, write_csv, write_meta_line, CsvMeta, McRecord, RunRecord};
use bandpoly_core::experiments::scan::{run_scan, write_scan_csv, ScanPlan};
use bandpoly_core::experiments::verify::{run_suite, VerifyOptions};
use bandpoly_core::harmonics::bracket::heat_eig_asymptotic;
use bandpoly_core::harmonics::{heat_eig, z_expansion_check, HermitianPair};
use bandpoly_core::mc::estimate_ratios;
use bandpoly_core::parallel::{resolve_workers, with_workers};
use bandpoly_core::spectral::{a_star_spectrum, mehler_eigs, spectral_report, GaussKernel1D};
use bandpoly_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "bandpoly", version, about = "Characteristic-polynomial correlators of non-Hermitian band matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Variance profile J as (j, k, value) rows
    Profile,
    /// Monte Carlo estimate of the delocalized and localized ratios
    McRatio,
    /// Monte Carlo against the effective model over a bandwidth grid
    CrossoverScan,
    /// Nystrom spectrum of the Gaussian kernel against the Mehler values
    Spectra,
    /// Heat-kernel eigenvalues and the unitary-sector factor at R = 0
    GroupIntegrals,
    /// Run the acceptance suite
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::McRatio => "mc-ratio",
            Command::CrossoverScan => "crossover-scan",
            Command::Spectra => "spectra",
            Command::GroupIntegrals => "group-integrals",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Default)]
struct Flags {
    /// JSON file with any of the flag values; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    w: Option<f64>,
    /// Comma-separated bandwidths
    #[arg(long, global = true, value_delimiter = ',')]
    w_grid: Option<Vec<f64>>,
    /// Complex number: "0.5", "0.5,0.1" or "0.5+0.1i"
    #[arg(long, global = true, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    zeta: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    m0: Option<usize>,
    /// Quadrature nodes (spectra)
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Skip the Monte Carlo columns (crossover-scan)
    #[arg(long, global = true)]
    model_only: bool,
    /// Threads; falls back to BANDPOLY_WORKERS, then hardware parallelism
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Module name (verify)
    #[arg(long, global = true)]
    filter: Option<String>,
}

impl Flags {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            n: self.n,
            w: self.w,
            w_grid: self.w_grid.clone(),
            z: self.z.clone(),
            zeta: self.zeta.clone(),
            samples: self.samples,
            seed: self.seed,
            m0: self.m0,
            nodes: self.nodes,
            model_only: self.model_only.then_some(true),
            filter: self.filter.clone(),
            format: self.format.map(|f| match f {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            }),
            out: self.out.clone(),
            workers: self.workers,
        }
    }
}

enum Failure {
    Validation(String),
    Runtime(String),
    Criteria,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid { .. } | Error::Json(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_config(flags: &Flags) -> Result<ExperimentConfig, Failure> {
    let over = flags.to_config();
    let Some(path) = &flags.config else { return Ok(over) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
    let file = ExperimentConfig::from_json(&text).map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
    Ok(file.layered(&over))
}

fn format_of(cfg: &ExperimentConfig, default: &str) -> Result<String, Failure> {
    let f = cfg.format.clone().unwrap_or_else(|| default.into());
    match f.as_str() {
        "csv" | "json" => Ok(f),
        _ => Err(Failure::Validation(format!("invalid format: {f:?}; expected csv or json"))),
    }
}

fn emit(cfg: &ExperimentConfig, bytes: &[u8]) -> Outcome {
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes<T: serde::Serialize>(command: Command, cfg: &ExperimentConfig, results: T, started: Instant) -> Result<Vec<u8>, Failure> {
    let rec = RunRecord::new(command.name(), cfg, results, started.elapsed().as_secs_f64());
    let mut s = rec.to_json()?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn cmd_profile(cfg: &ExperimentConfig, started: Instant) -> Outcome {
    let profile = build_profile(cfg.n_or(1)?, cfg.w_or(1.0)?)?;
    if format_of(cfg, "csv")? == "json" {
        let entries: Vec<_> = profile.band_entries().map(|(j, k, v)| json!([j, k, v])).collect();
        let results = json!({"row_sum_error": profile.row_sum_error(), "entries": entries});
        return emit(cfg, &json_bytes(Command::Profile, cfg, results, started)?);
    }
    let mut meta = CsvMeta::new("profile", cfg);
    meta.info = Some(json!({"row_sum_error": profile.row_sum_error()}));
    let mut buf = Vec::new();
    write_meta_line(&mut buf, &meta)?;
    writeln!(buf, "j,k,value")?;
    for (j, k, v) in profile.band_entries() {
        writeln!(buf, "{j},{k},{}", fmt_num(v))?;
    }
    emit(cfg, &buf)
}

fn cmd_mc_ratio(cfg: &ExperimentConfig, started: Instant) -> Outcome {
    let point = cfg.point(1, 1.0)?;
    let samples = cfg.samples_or(10_000)?;
    let workers = resolve_workers(cfg.workers)?;
    let pair = with_workers(workers, || estimate_ratios(&point, samples, cfg.seed()))?;
    let rec = McRecord::new(&point, &pair, started.elapsed().as_secs_f64());
    eprintln!("mc-ratio: {} samples on {workers} workers", rec.samples);
    if format_of(cfg, "json")? == "json" {
        return emit(cfg, &json_bytes(Command::McRatio, cfg, rec, started)?);
    }
    let mut buf = Vec::new();
    let row = vec![rec.gin, rec.gin_stderr, rec.loc, rec.loc_stderr, rec.singular_count as f64];
    write_csv(&mut buf, &CsvMeta::new("mc-ratio", cfg), &["gin", "gin_stderr", "loc", "loc_stderr", "singular_count"], &[row])?;
    emit(cfg, &buf)
}

fn cmd_crossover_scan(cfg: &ExperimentConfig, started: Instant) -> Outcome {
    let plan = ScanPlan::from_config(cfg)?;
    let workers = resolve_workers(cfg.workers)?;
    let res = with_workers(workers, || run_scan(&plan));
    eprintln!("crossover-scan: {} points on {workers} workers, {} failed", res.rows.len(), res.errors.len());
    for e in &res.errors {
        eprintln!("  {e}");
    }
    if format_of(cfg, "csv")? == "json" {
        let results = json!({"rows": res.rows, "errors": res.errors, "workers": workers});
        return emit(cfg, &json_bytes(Command::CrossoverScan, cfg, results, started)?);
    }
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, cfg, &plan, &res)?;
    emit(cfg, &buf)
}

fn cmd_spectra(cfg: &ExperimentConfig, started: Instant) -> Outcome {
    let w = cfg.w_or(10.0)?;
    let u = (1.0 - cfg.z()?.norm_sqr()).sqrt();
    let nodes = cfg.nodes.unwrap_or(400);
    let count = 9;
    let rep = spectral_report(w, u, nodes, count)?;
    let kernel = GaussKernel1D::from_saddle(w, u)?;
    let exact = mehler_eigs(&kernel, count - 1);
    if format_of(cfg, "csv")? == "json" {
        let results = json!({"report": rep, "mehler": exact, "a_star_levels": a_star_spectrum(w, u, 4)?});
        return emit(cfg, &json_bytes(Command::Spectra, cfg, results, started)?);
    }
    let rows: Vec<Vec<f64>> =
        (0..count).map(|m| vec![m as f64, rep.eigenvalues[m], exact[m], rep.mehler_error[m]]).collect();
    let mut buf = Vec::new();
    let mut meta = CsvMeta::new("spectra", cfg);
    meta.info = Some(json!({"u_star": u, "mehler_q": kernel.mehler_q()}));
    write_csv(&mut buf, &meta, &["m", "nystrom", "mehler", "rel_error"], &rows)?;
    emit(cfg, &buf)
}

fn cmd_group_integrals(cfg: &ExperimentConfig, started: Instant) -> Outcome {
    let w = cfg.w_or(20.0)?;
    let u = (1.0 - cfg.z()?.norm_sqr()).sqrt();
    let l_max = (w.floor() as i64).min(8);
    let mut rows = Vec::new();
    for l in 0..=l_max {
        rows.push(vec![l as f64, heat_eig(l, w, u)?, heat_eig_asymptotic(l, w, u)]);
    }
    let z0 = if w > 1.0 { Some(z_expansion_check(&HermitianPair::zero(), w, u)?) } else { None };
    if format_of(cfg, "csv")? == "json" {
        let heat: Vec<_> = rows.iter().map(|r| json!({"l": r[0], "heat_eig": r[1], "asymptotic": r[2]})).collect();
        let results = json!({"u_star": u, "heat": heat, "z_at_zero": z0});
        return emit(cfg, &json_bytes(Command::GroupIntegrals, cfg, results, started)?);
    }
    let mut buf = Vec::new();
    let mut meta = CsvMeta::new("group-integrals", cfg);
    meta.info = Some(json!({"u_star": u, "z_at_zero": z0}));
    write_csv(&mut buf, &meta, &["l", "heat_eig", "asymptotic"], &rows)?;
    emit(cfg, &buf)
}

fn cmd_verify(cfg: &ExperimentConfig) -> Outcome {
    let opts = VerifyOptions {
        filter: cfg.filter.clone(),
        seed: cfg.seed(),
        workers: match cfg.workers {
            Some(0) => return Err(Failure::Validation("invalid workers: must be at least 1".into())),
            Some(w) => w,
            None => 8,
        },
        out_dir: None,
    };
    let report = run_suite(&opts, |r| eprintln!("{}", r.line()))?;
    let mut s = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    s.push('\n');
    emit(cfg, s.as_bytes())?;
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Criteria)
    }
}

fn run(cli: &Cli) -> Outcome {
    let started = Instant::now();
    let cfg = load_config(&cli.flags)?;
    match cli.command {
        Command::Profile => cmd_profile(&cfg, started),
        Command::McRatio => cmd_mc_ratio(&cfg, started),
        Command::CrossoverScan => cmd_crossover_scan(&cfg, started),
        Command::Spectra => cmd_spectra(&cfg, started),
        Command::GroupIntegrals => cmd_group_integrals(&cfg, started),
        Command::Verify => cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criteria) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("bandpoly {}: {msg}", cli.command.name());
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("bandpoly {}: {msg}", cli.command.name());
            ExitCode::from(2)
        }
    }
}
