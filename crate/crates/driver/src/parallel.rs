use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{DriverError, Result};

pub const THREADS_ENV: &str = "ERGOLIN_THREADS";

/// A pool capped by `ERGOLIN_THREADS` (all cores when unset).
///
/// Work is split by sample index and every sample owns its generator, so the
/// thread count never changes results.
pub fn pool() -> Result<ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| DriverError::config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    pool_with(threads)
}

/// A pool with exactly `threads` workers; 0 means one per core.
pub fn pool_with(threads: usize) -> Result<ThreadPool> {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| DriverError::config(format!("cannot start thread pool: {e}")))
}
