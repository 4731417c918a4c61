//! Thread-pool executor.

use beampredict_core::exec::Executor;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs tasks on a dedicated rayon pool of a fixed size. Results come back
/// in task order, so output does not depend on the worker count.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `jobs == 0` picks the number of available cores.
    pub fn new(jobs: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
