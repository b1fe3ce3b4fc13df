//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! `ACCEPTANCE_FILTER=<module>` restricts the run to one module.

use bandpoly_core::experiments::verify::{run_suite, VerifyOptions};
use std::process::ExitCode;

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let filter = std::env::var("ACCEPTANCE_FILTER").ok().filter(|s| !s.is_empty());
    let out_dir = std::env::temp_dir().join("bandpoly-acceptance");
    let opts = VerifyOptions { filter, out_dir: Some(out_dir), ..Default::default() };
    println!("acceptance suite, seed {}", opts.seed);
    match run_suite(&opts, |r| println!("{}", r.line())) {
        Ok(report) => {
            let failed: Vec<String> = report.criteria.iter().filter(|r| !r.pass).map(|r| r.id.to_string()).collect();
            if failed.is_empty() {
                println!("acceptance: all {} criteria pass", report.criteria.len());
                ExitCode::SUCCESS
            } else {
                println!("acceptance: {} of {} criteria fail ({})", failed.len(), report.criteria.len(), failed.join(", "));
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            println!("acceptance: suite could not run: {e}");
            ExitCode::FAILURE
        }
    }
}
