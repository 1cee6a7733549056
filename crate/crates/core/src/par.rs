//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature (on by default) block work is spread over the
//! rayon pool. Results are always combined in block order, so floating-point
//! reductions do not depend on the thread count.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

/// Splits `0..len` into blocks of `block` indices, maps each, and returns the
/// results in block order.
pub fn map_blocks<T, F>(exec: Execution, len: usize, block: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let block = block.max(1);
    let n = len.div_ceil(block);
    let range = move |i: usize| i * block..((i + 1) * block).min(len);
    match exec {
        Execution::Sequential => (0..n).map(|i| f(range(i))).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(|i| f(range(i))).collect()
        }
    }
}

/// Runs `f(offset, chunk)` over consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], block: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let block = block.max(1);
    match exec {
        Execution::Sequential => {
            for (i, chunk) in data.chunks_mut(block).enumerate() {
                f(i * block, chunk);
            }
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            data.par_chunks_mut(block)
                .enumerate()
                .for_each(|(i, chunk)| f(i * block, chunk));
        }
    }
}

/// Maps a slice of inputs, preserving order.
pub fn map_items<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}
