//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled, [`Execution::Parallel`] fans work
//! out over the rayon global pool. Without it, every call runs
//! sequentially. Either way the output order matches the input order, so
//! any reduction performed over the results is bit-reproducible.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving map over fixed-size chunks of a slice.
///
/// Chunk boundaries depend only on `chunk_len`, never on the thread count.
pub fn map_chunks<T, R, F>(exec: Execution, items: &[T], chunk_len: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_chunks(chunk_len).map(f).collect();
    }
    let _ = exec;
    items.chunks(chunk_len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let v: Vec<u64> = (0..1000).collect();
        let a = map_slice(Execution::Sequential, &v, |x| x * x);
        let b = map_slice(Execution::Parallel, &v, |x| x * x);
        assert_eq!(a, b);
        let a = map_chunks(Execution::Sequential, &v, 7, |c| c.iter().sum::<u64>());
        let b = map_chunks(Execution::Parallel, &v, 7, |c| c.iter().sum::<u64>());
        assert_eq!(a, b);
        assert_eq!(a.len(), 143);
    }
}
