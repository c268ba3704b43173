//! Thread-pool executor for the Monte Carlo ensembles.

use rayon::prelude::*;
use sqg_core::mc::Executor;

use crate::error::{Error, Result};

/// Thread count override, read once per process.
pub const THREADS_ENV: &str = "SQG_THREADS";

pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `None` lets rayon pick, usually one thread per core.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(Error::Usage(format!("{THREADS_ENV} must be at least 1")));
            }
            b = b.num_threads(n);
        }
        let pool = b.build().map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
        Ok(Parallel { pool })
    }

    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| Error::Usage(format!("{THREADS_ENV}={v:?} is not a count")))?),
            Err(_) => None,
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
