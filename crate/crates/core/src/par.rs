//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the map runs on a rayon pool; without it, or
//! when [`Parallelism::Sequential`] is requested, it is a plain iterator.
//! Output order always matches input order.

/// How independent work items are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Global rayon pool.
    #[default]
    Parallel,
    /// Dedicated pool with this many workers.
    Jobs(usize),
}

impl Parallelism {
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => Self::Sequential,
            Some(j) => Self::Jobs(j),
            None => Self::Parallel,
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(mode: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match mode {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Parallelism::Jobs(jobs) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
                Err(_) => items.into_iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        _ => items.into_iter().map(f).collect(),
    }
}
