use dvdet_core::model::BatchExecutor;
use rayon::prelude::*;

use crate::error::{Result, Stage, StageError};

/// Fans per-sample jobs out over a fixed-size thread pool. Results come back
/// in job order, so everything downstream stays deterministic.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> Result<RayonExecutor> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| StageError::invariant(Stage::Config, format!("thread pool: {e}")))?;
        Ok(RayonExecutor { pool })
    }
}

impl BatchExecutor for RayonExecutor {
    fn map<R, F>(&self, jobs: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..jobs).into_par_iter().map(f).collect())
    }
}
