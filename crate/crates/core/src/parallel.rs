//! Execution backends for the data-parallel evaluation loops.
//!
//! The hot loops (winning probabilities, correlation tables, exhaustive
//! strategy enumeration) map independent work items and then reduce the
//! results *in index order*, so the parallel backend produces bit-identical
//! output to the sequential one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which backend evaluates a batch of independent work items.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalBackend {
    /// Plain in-order iteration on the calling thread.
    Sequential,
    /// rayon work-stealing map; results are collected back in index order.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for EvalBackend {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        EvalBackend::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        EvalBackend::Sequential
    }
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_range<U, F>(backend: EvalBackend, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match backend {
        EvalBackend::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        EvalBackend::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}
