//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, [`ExecMode::Parallel`] runs on the rayon
//! global pool. Without it, every mode runs sequentially. Results are
//! always returned in input order, so both modes produce identical output
//! when each item derives its own randomness from its index.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Counts indices in `0..n` for which `pred` holds.
pub fn count_range<F>(mode: ExecMode, n: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().filter(|&i| pred(i)).count()
        }
        _ => (0..n).filter(|&i| pred(i)).count(),
    }
}

/// Per-item seed derived from a base seed, independent of scheduling.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_range(ExecMode::Sequential, 1000, |i| derive_seed(7, i as u64));
        let b = map_range(ExecMode::Parallel, 1000, |i| derive_seed(7, i as u64));
        assert_eq!(a, b);
        let c = count_range(ExecMode::Parallel, 1000, |i| i % 3 == 0);
        assert_eq!(c, 334);
    }
}
