//! Execution mode for embarrassingly parallel loops (width scans, difference
//! probes, surface cells). The `parallel` feature enables the rayon backend;
//! without it every mode runs sequentially.

use serde::{Deserialize, Serialize};

/// How independent evaluations are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// True when the rayon backend is compiled in and selected.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let a = map(ExecMode::Sequential, &xs, |x| x * x);
        let b = map(ExecMode::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(map_range(ExecMode::Parallel, 5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
