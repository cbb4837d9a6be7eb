//! Trial fan-out: the data-parallel inner loop of every multi-seed experiment.
//!
//! [`run`] maps a closure over trial indices `0..n` and collects the results
//! in index order. With the `parallel` feature (default) the map runs on the
//! rayon pool; without it, [`run`] is exactly [`run_sequential`]. Trial
//! closures own their ledgers and RNG streams, so both paths produce
//! identical output.

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn run<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(not(feature = "parallel"))]
pub fn run<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    run_sequential(n, f)
}

/// Sequential fallback, always available (used by the comparison benches).
pub fn run_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).map(f).collect()
}
