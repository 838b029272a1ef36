//! Sequential or data-parallel execution of the per-segment and
//! per-instance loops.
//!
//! Every helper preserves input order in its output, so results do not
//! depend on the execution mode or the number of worker threads. Without
//! the `parallel` feature, [`Exec::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn try_map<T, U, E, F>(self, items: &[T], f: F) -> Result<Vec<U>, E>
    where
        T: Sync,
        U: Send,
        E: Send,
        F: Fn(&T) -> Result<U, E> + Sync + Send,
    {
        // Collect everything first so the reported error is always the
        // earliest one, as in the sequential path.
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            let results: Vec<Result<U, E>> = items.par_iter().map(f).collect();
            return results.into_iter().collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..n`.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps every item and folds the results with an associative `reduce`.
    pub fn map_reduce<T, A, M, R, I>(self, items: &[T], identity: I, map: M, reduce: R) -> A
    where
        T: Sync,
        A: Send,
        I: Fn() -> A + Sync + Send,
        M: Fn(&T) -> A + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(map).reduce(identity, reduce);
        }
        items.iter().map(map).fold(identity(), reduce)
    }
}
