//! Discretization stack: compact derivatives, compact filtering, banded
//! solves and time integration.
//!
//! Derivatives and filters sweep independent grid lines. Lines along `x1`
//! are contiguous and handled one at a time; lines along the other axes are
//! processed as interleaved batches so the inner loops run over contiguous
//! memory.

pub mod compact;
pub mod filter;
pub mod rk4;
pub mod tridiag;

pub use compact::{compact_d1, CompactScheme};
pub use filter::{compact_filter_apply, CompactFilter};
pub use rk4::{rk4_advance, OdeState};
pub use tridiag::{tridiagonal_solve, Tridiagonal, TridiagonalLu};

pub(crate) use rk4::rk4_step;

use crate::grid::Grid;
use crate::par;

/// Lines along `x1` gathered per interleaved tile.
const TILE: usize = 16;

/// Runs `kernel(input_block, output_block, width)` on every block of lines
/// along `axis`.
///
/// A block holds `n(axis)` rows of `width` interleaved lines. Lines along
/// `x1` are transposed into tiles first; every line still sees the same
/// sequence of operations, so tiling does not change results.
pub(crate) fn sweep_axis<K>(grid: &Grid, axis: usize, input: &[f64], out: &mut [f64], kernel: K)
where
    K: Fn(&[f64], &mut [f64], usize) + Sync + Send,
{
    debug_assert_eq!(input.len(), grid.len());
    debug_assert_eq!(out.len(), grid.len());
    let n = grid.n(axis);
    if axis == 0 {
        par::for_each_chunk(out, n * TILE, |b, chunk| {
            let lines = chunk.len() / n;
            let src = &input[b * n * TILE..b * n * TILE + chunk.len()];
            let mut tin = alloc::vec![0.0; n * lines];
            let mut tout = alloc::vec![0.0; n * lines];
            for (t, line) in src.chunks_exact(n).enumerate() {
                for (i, v) in line.iter().enumerate() {
                    tin[i * lines + t] = *v;
                }
            }
            kernel(&tin, &mut tout, lines);
            for (t, line) in chunk.chunks_exact_mut(n).enumerate() {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = tout[i * lines + t];
                }
            }
        });
        return;
    }
    let width = grid.stride(axis);
    let block = n * width;
    par::for_each_chunk(out, block, |b, chunk| {
        kernel(&input[b * block..(b + 1) * block], chunk, width)
    });
}
