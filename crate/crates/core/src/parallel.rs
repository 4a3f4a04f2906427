//! Data-parallel helpers. With the `parallel` feature the per-cell loops run on
//! rayon; without it every helper is a plain sequential loop.
//!
//! Results are always collected in input order, so downstream reductions are
//! deterministic regardless of the worker count.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn from_threads(threads: usize) -> Self {
        if threads == 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel
        }
    }
}

#[cfg(feature = "parallel")]
mod imp {
    use super::Parallelism;
    use rayon::prelude::*;

    pub fn par_map<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match par {
            Parallelism::Sequential => items.iter().map(f).collect(),
            Parallelism::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Runs `op` on a pool of `threads` workers (0 means the rayon default).
    pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
        if threads == 0 {
            return op();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }

    pub const ENABLED: bool = true;
}

#[cfg(not(feature = "parallel"))]
mod imp {
    use super::Parallelism;

    pub fn par_map<T, R, F>(_par: Parallelism, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }

    pub fn with_threads<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
        op()
    }

    pub const ENABLED: bool = false;
}

pub use imp::{par_map, with_threads, ENABLED};
