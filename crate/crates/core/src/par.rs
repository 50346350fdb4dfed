//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` mode runs on the rayon pool;
//! without it every mode runs sequentially. Both paths return results in
//! input order, so callers see identical output either way.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

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

pub fn map_range<R, F>(mode: ExecMode, range: std::ops::Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = mode;
    range.map(f).collect()
}
