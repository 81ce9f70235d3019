//! Execution mode for the data-parallel loops (Monte Carlo hypervolume,
//! non-dominated filtering, FLASH acquisition, experiment plans).
//!
//! With the `parallel` feature (default) `Exec::Parallel` runs on rayon;
//! without it every mode runs sequentially. Results are identical in both
//! modes: work is split into fixed chunks with their own RNG streams and
//! merged in index order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this mode actually fans out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..n`, preserving index order in the output.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Runs `f` inside a pool of `jobs` worker threads when parallel.
    /// `jobs = None` uses rayon's global pool.
    pub fn install<R, F>(self, jobs: Option<usize>, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            if let Some(n) = jobs {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                {
                    return pool.install(f);
                }
            }
        }
        let _ = jobs;
        f()
    }
}
