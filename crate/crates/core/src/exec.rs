//! Data-parallel map over index ranges, with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon global pool. Without it, every request runs sequentially. Both
//! paths return results in index order, so callers that reduce in index order
//! get bit-identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_indices<T, F>(len: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree_and_keep_order() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let seq = map_indices(1000, Execution::Sequential, f);
        let par = map_indices(1000, Execution::Parallel, f);
        assert_eq!(seq, par);
        assert_eq!(seq[10], f(10));
    }

    #[test]
    fn default_tracks_feature() {
        assert_eq!(Execution::default().is_parallel(), cfg!(feature = "parallel"));
        assert!(!Execution::Sequential.is_parallel());
    }
}
