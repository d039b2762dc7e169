//! Indexed map helpers that run on rayon when the `parallel` feature is on.
//!
//! Only independent per-index work goes through here; nothing reduces
//! floating-point values across indices, so both code paths produce
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the fine-grained helpers stay sequential: the
/// per-item work in the inner loops (a column division, a row sum) is far
/// too small to amortize task dispatch.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 128;

#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 64;

pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if len >= MIN_PARALLEL_LEN {
        return (0..len)
            .into_par_iter()
            .with_min_len(MIN_CHUNK)
            .map(f)
            .collect();
    }
    (0..len).map(f).collect()
}

pub(crate) fn try_map_indexed<T, E, F>(len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if len >= MIN_PARALLEL_LEN {
        return (0..len)
            .into_par_iter()
            .with_min_len(MIN_CHUNK)
            .map(f)
            .collect();
    }
    (0..len).map(f).collect()
}

/// For coarse work items (a whole verification run per index) that are
/// worth a task each.
pub(crate) fn map_tasks<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if len > 1 {
        return (0..len).into_par_iter().with_min_len(1).map(f).collect();
    }
    (0..len).map(f).collect()
}
