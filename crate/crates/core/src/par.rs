//! Data-parallel helpers.
//!
//! With the `parallel` feature every helper fans out over rayon; without it,
//! or when [`Execution::Sequential`] is selected at runtime, the same closures
//! run on the calling thread. Results are always collected in index order, so
//! both paths produce identical output.

use std::sync::atomic::{AtomicU8, Ordering};

/// Runtime execution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

/// Selects the execution strategy for subsequent calls in this process.
///
/// `Parallel` is a no-op request when the crate is built without the
/// `parallel` feature.
pub fn set_execution(mode: Execution) {
    MODE.store(matches!(mode, Execution::Parallel) as u8, Ordering::SeqCst);
}

pub fn execution() -> Execution {
    if cfg!(feature = "parallel") && MODE.load(Ordering::SeqCst) == 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Evaluates `f(n)` for `n` in `1..=len` and collects in order.
pub fn map_indices<T, F>(len: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        use rayon::prelude::*;
        return (1..=len).into_par_iter().map(f).collect();
    }
    (1..=len).map(f).collect()
}

/// Like [`map_indices`] for fallible closures; the first error in index order wins.
pub fn try_map_indices<T, E, F>(len: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_indices(len, f).into_iter().collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<'a, S, T, F>(items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}
