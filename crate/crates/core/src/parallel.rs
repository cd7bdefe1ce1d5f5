//! Trial-level parallelism for Monte Carlo campaigns.
//!
//! Trials are independent, so they are mapped over a rayon pool when the
//! `parallel` feature is enabled. Results always come back in trial order and
//! each trial derives its own seed, so output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when compiled with the `parallel` feature.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..trials).map(f)`, collected in index order.
///
/// Without the `parallel` feature `Execution::Parallel` runs sequentially.
pub fn map_trials<T, F>(trials: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(f).collect()
        }
        _ => (0..trials).map(f).collect(),
    }
}
