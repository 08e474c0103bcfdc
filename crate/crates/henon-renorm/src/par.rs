//! Data-parallel map with a sequential fallback.
//!
//! Built with the default `parallel` feature this fans work out over rayon;
//! without it the same call sites run sequentially, which keeps outputs
//! bit-identical and makes the comparison benchmark honest.

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Cap the rayon pool size; ignored in sequential builds.  Returns false if
/// the pool was already initialized.
#[cfg(feature = "parallel")]
pub fn set_jobs(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn set_jobs(_n: usize) -> bool {
    true
}
