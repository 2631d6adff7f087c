//! Rayon-backed chunk executor.
//!
//! Chunks land in a position-indexed vector, so the reduction order is
//! fixed by sample index regardless of the worker count; results are
//! byte-identical for any `threads`.

use pfmc_core::sampling::{ChunkStats, Executor};
use rayon::prelude::*;

pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(RayonExecutor { pool })
    }
}

impl Executor for RayonExecutor {
    fn run_chunks(
        &self,
        n_chunks: usize,
        job: &(dyn Fn(usize) -> ChunkStats + Sync),
    ) -> Vec<ChunkStats> {
        self.pool
            .install(|| (0..n_chunks).into_par_iter().map(job).collect())
    }
}
