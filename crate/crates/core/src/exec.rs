//! Index-parallel map used for trials and batches.
//!
//! With the `parallel` feature the work runs on a rayon pool of the requested
//! size; without it, or with `workers == 1`, it runs in order on the calling
//! thread. Results always come back in index order, so callers aggregate the
//! same way regardless of how the work was scheduled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the crate was built with the `parallel` feature.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

fn sequential<T, F: Fn(usize) -> T>(len: usize, f: F) -> Vec<T> {
    (0..len).map(f).collect()
}

/// Evaluates `f(0..len)`. `workers == 0` uses every available core.
#[cfg(feature = "parallel")]
pub fn par_map<T, F>(len: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers == 1 || len <= 1 {
        return sequential(len, f);
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
        Err(_) => sequential(len, f),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, F>(len: usize, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    sequential(len, f)
}
