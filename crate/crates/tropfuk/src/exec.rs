//! Data-parallel helpers. With the `parallel` feature these run on rayon;
//! without it they are plain iterator loops. Output order always matches
//! input order, so both paths give identical results.

use std::sync::OnceLock;

/// Execution mode for the enumeration-heavy entry points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Auto,
    Sequential,
}

static THREADS: OnceLock<usize> = OnceLock::new();

/// Caps the worker count (the CLI reads `TF_THREADS`). Only the first call
/// has any effect.
pub fn set_threads(n: usize) {
    let n = n.max(1);
    if THREADS.set(n).is_ok() {
        #[cfg(feature = "parallel")]
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn threads() -> usize {
    *THREADS.get().unwrap_or(&0)
}

/// Ordered map over a slice.
pub fn map<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        Mode::Sequential => items.iter().map(f).collect(),
        Mode::Auto => par_map(items, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if threads() == 1 {
        return items.iter().map(f).collect();
    }
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Ordered flat-map over a slice.
pub fn flat_map<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    map(mode, items, f).into_iter().flatten().collect()
}
