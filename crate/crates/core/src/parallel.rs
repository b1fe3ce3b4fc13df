use crate::error::{invalid, Result};

pub const WORKERS_ENV: &str = "BANDPOLY_WORKERS";

/// Worker count: explicit value, else `BANDPOLY_WORKERS`, else hardware parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize> {
    if let Some(w) = explicit {
        if w == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        return Ok(w);
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let w: usize = v
            .trim()
            .parse()
            .map_err(|_| invalid("workers", format!("{WORKERS_ENV}={v:?} is not a positive integer")))?;
        if w == 0 {
            return Err(invalid("workers", format!("{WORKERS_ENV} must be at least 1")));
        }
        return Ok(w);
    }
    Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `f` inside a dedicated pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    pool.install(f)
}
