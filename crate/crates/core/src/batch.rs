//! Data-parallel maps over independent jobs (scenarios, sample states, ε values).
//!
//! With the `parallel` feature the work is spread over the rayon pool; without
//! it the same closures run sequentially in order. Results are always returned
//! in input order, so both builds produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `items.map(f)` preserving order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential reference of [`par_map`], for benchmarks and tests.
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Whether [`par_map`] runs on the rayon pool in this build.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
