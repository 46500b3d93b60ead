//! Order-preserving map used by every accumulation that may run in
//! parallel. Work items are fixed by the caller (one per outer mode index),
//! each item is summed sequentially, and item results are combined in index
//! order, so the floating-point result does not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Work items evaluated on the current rayon pool.
    #[default]
    Parallel,
    /// Everything on the calling thread.
    Sequential,
}

pub(crate) fn ordered_map<T, F>(n: usize, reduction: Reduction, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match reduction {
        #[cfg(feature = "parallel")]
        Reduction::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Sequential left-to-right sum.
pub(crate) fn ordered_sum(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v)
}
