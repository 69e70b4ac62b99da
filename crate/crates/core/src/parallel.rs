//! Thin shim over rayon so data-parallel stages compile with or without it.
//!
//! With the `parallel` feature (default), `map_collect` fans work out over
//! rayon and collects results in input order, so output never depends on
//! scheduling. Without the feature it degrades to a plain iterator chain.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when enabled, preserving input order.
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential twin of [`map_collect`]; used by benchmarks to compare lanes.
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Caps the rayon worker count for the whole process. `jobs = 1` still runs
/// through rayon but with a single worker; call before any parallel work.
/// Returns false if a global pool was already installed.
#[cfg(feature = "parallel")]
pub fn configure_jobs(jobs: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_jobs(_jobs: usize) -> bool {
    true
}
