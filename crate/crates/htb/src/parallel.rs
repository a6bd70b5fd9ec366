//! Chunk-parallel batch sampling.
//!
//! Simulation output is split into fixed-size chunks whose seeds are
//! derived from (master seed, chunk index) alone, so chunks can be
//! generated on any number of threads in any order; merging them in
//! chunk-index order reproduces the serial sampler bit for bit.

use rayon::prelude::*;

use htb_core::{
    assemble_batches, chunk_layout, sample_f_chunk, DependenceSpec, RNorm, SharingModel,
    SimBatches,
};

use crate::error::{AppError, AppResult};

/// Resolve the thread count: an explicit request wins (0 means "let the
/// pool decide"), otherwise rayon's default.
fn pool(threads: Option<usize>) -> AppResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| {
            AppError::io(
                "<thread pool>",
                std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
            )
        })
}

/// Parallel equivalent of [`htb_core::sample_f`]: identical output,
/// chunks distributed over a thread pool.
pub fn sample_f_parallel(
    spec: &DependenceSpec,
    model: &SharingModel,
    norm: RNorm,
    n: usize,
    seed: u64,
    threads: Option<usize>,
) -> AppResult<SimBatches> {
    if n == 0 {
        // Delegate the error shape to the serial path.
        return Ok(htb_core::sample_f(spec, model, norm, n, seed)?);
    }
    let chunks = chunk_layout(n);
    let parts: Result<Vec<Vec<Vec<f64>>>, htb_core::Error> = pool(threads)?.install(|| {
        chunks
            .par_iter()
            .map(|&chunk| sample_f_chunk(spec, model, norm, chunk, seed))
            .collect()
    });
    let parts = parts?;
    let (q, _) = model.shape();
    let mut columns: Vec<Vec<f64>> = (0..=q).map(|_| Vec::with_capacity(n)).collect();
    for part in parts {
        for (col, extra) in columns.iter_mut().zip(part) {
            col.extend(extra);
        }
    }
    Ok(assemble_batches(columns, spec, seed))
}
