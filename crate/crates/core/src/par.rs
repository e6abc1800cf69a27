//! Thin switch between rayon and sequential iteration.
//!
//! Work items never share accumulators, so the result is the same for any
//! worker count.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Nodes per work item in pointwise loops.
pub const NODE_CHUNK: usize = 4096;

/// Calls `f(chunk_index, chunk)` for consecutive chunks of `data`.
pub fn for_each_chunk<F>(data: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Splits every output buffer into aligned chunks of `chunk` nodes and calls
/// `f(first_node, chunks)` once per chunk index.
pub fn zip_chunks<F>(outputs: Vec<&mut [f64]>, chunk: usize, f: F)
where
    F: Fn(usize, &mut [&mut [f64]]) + Sync + Send,
{
    let len = outputs.first().map_or(0, |o| o.len());
    let count = len.div_ceil(chunk);
    let mut groups: Vec<Vec<&mut [f64]>> = (0..count)
        .map(|_| Vec::with_capacity(outputs.len()))
        .collect();
    for o in outputs {
        debug_assert_eq!(o.len(), len);
        for (g, c) in groups.iter_mut().zip(o.chunks_mut(chunk)) {
            g.push(c);
        }
    }
    #[cfg(feature = "parallel")]
    groups
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, g)| f(i * chunk, g));
    #[cfg(not(feature = "parallel"))]
    groups
        .iter_mut()
        .enumerate()
        .for_each(|(i, g)| f(i * chunk, g));
}

/// Like [`zip_chunks`] with chunks holding whole grid rows along `x1`;
/// `f(first_row, chunks)` receives the global index of the first row.
pub fn zip_rows<F>(outputs: Vec<&mut [f64]>, row_len: usize, f: F)
where
    F: Fn(usize, &mut [&mut [f64]]) + Sync + Send,
{
    let rows = (NODE_CHUNK / row_len).max(1);
    zip_chunks(outputs, rows * row_len, |start, c| f(start / row_len, c));
}
