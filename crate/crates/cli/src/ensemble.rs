//! Parallel execution of independent samples with a deterministic reduction.
//!
//! Samples are cut into fixed-size chunks. Each chunk is reduced on a worker
//! and the chunk accumulators are merged in index order on the calling
//! thread, so the floating-point summation order never depends on the
//! number of workers.

use fgsim_core::trajectory::{EnsembleAccumulator, TrajectoryRecord};

use crate::error::{RunError, RunResult};
use rayon::prelude::*;

/// Samples per work unit.
pub const CHUNK: usize = 8;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "FGSIM_WORKERS";

pub struct EnsembleOutput {
    pub accumulator: EnsembleAccumulator,
    /// Per-sample records in index order (without covariances), when kept.
    pub records: Vec<TrajectoryRecord>,
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub n_samples: usize,
    pub times: Vec<f64>,
    pub n_observables: usize,
    pub track_covariance: bool,
    pub keep_records: bool,
}

/// Instabilities become [`RunError::Instability`] tagged with `context`.
pub fn sample_error(context: &str, e: fgsim_core::Error) -> RunError {
    match e {
        fgsim_core::Error::Instability { .. } | fgsim_core::Error::StepSize { .. } => {
            RunError::Instability(format!("{context}: {e}"))
        }
        other => RunError::Core(other),
    }
}

/// Worker count from an explicit value, then [`WORKERS_ENV`], then the
/// available parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `sample(i)` for `i in 0..n_samples` on `workers` threads.
pub fn run_ensemble<F>(spec: &EnsembleSpec, workers: usize, sample: F) -> RunResult<EnsembleOutput>
where
    F: Fn(u64) -> fgsim_core::Result<TrajectoryRecord> + Sync,
{
    if spec.n_samples == 0 {
        return Err(RunError::config("n_samples must be at least 1"));
    }
    let chunks: Vec<(u64, u64)> = (0..spec.n_samples as u64)
        .step_by(CHUNK)
        .map(|lo| (lo, (lo + CHUNK as u64).min(spec.n_samples as u64)))
        .collect();
    let reduce_chunk = |&(lo, hi): &(u64, u64)| -> RunResult<(EnsembleAccumulator, Vec<TrajectoryRecord>)> {
        let mut acc = EnsembleAccumulator::new(spec.times.clone(), spec.n_observables, spec.track_covariance);
        let mut kept = Vec::new();
        for i in lo..hi {
            let mut rec = sample(i).map_err(|e| sample_error(&format!("sample {i}"), e))?;
            acc.add(&rec)?;
            if spec.keep_records {
                rec.covariances = None;
                kept.push(rec);
            }
        }
        Ok((acc, kept))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Other(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<_> = pool.install(|| chunks.par_iter().map(reduce_chunk).collect::<RunResult<Vec<_>>>())?;

    let mut accumulator = EnsembleAccumulator::new(spec.times.clone(), spec.n_observables, spec.track_covariance);
    let mut records = Vec::new();
    for (acc, kept) in parts {
        accumulator.merge(&acc)?;
        records.extend(kept);
    }
    Ok(EnsembleOutput { accumulator, records })
}
