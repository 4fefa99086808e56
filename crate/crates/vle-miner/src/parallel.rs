//! Internal parallelism, capped by the `VLE_MINER_THREADS` environment
//! variable (0 or unset means auto). The keyed per-student random streams
//! make the parallel generator's output identical to the sequential one
//! under any thread count.

use std::thread;

use vle_core::datagen::{assemble, generate_student, CohortSpec, DatagenError, GroundTruth};
use vle_core::model::Dataset;

pub const THREADS_ENV: &str = "VLE_MINER_THREADS";

/// Effective worker count: the env var caps it, 0/unset means the machine's
/// available parallelism.
pub fn thread_cap() -> usize {
    let auto = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        None | Some(0) => auto,
        Some(n) => n,
    }
}

/// Generates the cohort across worker threads, chunked by student index and
/// reassembled in index order.
pub fn generate_parallel(
    spec: &CohortSpec,
    threads: usize,
) -> Result<(Dataset, GroundTruth), DatagenError> {
    spec.validate()?;
    let n = spec.n_students;
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return vle_core::datagen::generate(spec);
    }

    let chunk = n.div_ceil(threads);
    let mut students = Vec::with_capacity(n);
    thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(n);
                scope.spawn(move || {
                    (lo..hi)
                        .map(|i| generate_student(spec, i))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            students.extend(handle.join().expect("generator workers do not panic"));
        }
    });
    assemble(spec, students)
}
