//! Trial-level fan-out.
//!
//! Trials share nothing, so they may run on any number of workers. Results
//! always come back indexed by trial, never by completion order. Without the
//! `parallel` feature every call runs sequentially.

/// Runs `trial(0..trials)` on the calling thread.
pub fn run_trials_seq<T, E, F>(trials: usize, trial: F) -> Result<Vec<T>, E>
where
    F: Fn(u64) -> Result<T, E>,
{
    (0..trials as u64).map(trial).collect()
}

/// Runs `trial(0..trials)` on a rayon pool with `jobs` workers, or on the
/// global pool when `jobs` is `None`.
#[cfg(feature = "parallel")]
pub fn run_trials_par<T, E, F>(trials: usize, jobs: Option<usize>, trial: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    use rayon::prelude::*;

    let work = || (0..trials as u64).into_par_iter().map(&trial).collect();
    match jobs {
        None => work(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => run_trials_seq(trials, &trial),
        },
    }
}

/// Dispatches to the parallel runner when available; `jobs = Some(1)` always
/// runs sequentially.
pub fn run_trials<T, E, F>(trials: usize, jobs: Option<usize>, trial: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != Some(1) {
            return run_trials_par(trials, jobs, trial);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    run_trials_seq(trials, trial)
}

/// Default worker count: available cores.
pub fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
