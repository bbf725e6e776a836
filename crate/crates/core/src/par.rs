//! Order-preserving data parallelism with a sequential fallback.
//!
//! Without the `parallel` feature everything runs on the calling thread.
//! With it, [`set_parallel`] switches between the two paths at run time,
//! which the benchmarks use to compare them in one build.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Enables or disables the parallel path (no effect without the feature).
pub fn set_parallel(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// Maps `f` over `items`; the output order matches the input order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if is_parallel() {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    items.into_iter().map(f).collect()
}
