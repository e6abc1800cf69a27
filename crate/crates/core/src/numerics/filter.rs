//! Tridiagonal compact low-pass filter of up to tenth order.

use super::sweep_axis;
use super::tridiag::{Tridiagonal, TridiagonalLu};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub const DEFAULT_ALPHA: f64 = 0.49;

/// Right-hand side weights `a_0..a_m` of the order-`2m` filter.
fn weights(order_half: usize, a: f64) -> [f64; 6] {
    let mut w = [0.0; 6];
    match order_half {
        1 => {
            w[0] = 0.5 + a;
            w[1] = 0.5 + a;
        }
        2 => {
            w[0] = (5.0 + 6.0 * a) / 8.0;
            w[1] = (1.0 + 2.0 * a) / 2.0;
            w[2] = (-1.0 + 2.0 * a) / 8.0;
        }
        3 => {
            w[0] = (11.0 + 10.0 * a) / 16.0;
            w[1] = (15.0 + 34.0 * a) / 32.0;
            w[2] = (-3.0 + 6.0 * a) / 16.0;
            w[3] = (1.0 - 2.0 * a) / 32.0;
        }
        4 => {
            w[0] = (93.0 + 70.0 * a) / 128.0;
            w[1] = (7.0 + 18.0 * a) / 16.0;
            w[2] = (-7.0 + 14.0 * a) / 32.0;
            w[3] = (1.0 - 2.0 * a) / 16.0;
            w[4] = (-1.0 + 2.0 * a) / 128.0;
        }
        _ => {
            w[0] = (193.0 + 126.0 * a) / 256.0;
            w[1] = (105.0 + 302.0 * a) / 256.0;
            w[2] = 15.0 * (-1.0 + 2.0 * a) / 64.0;
            w[3] = 45.0 * (1.0 - 2.0 * a) / 512.0;
            w[4] = 5.0 * (-1.0 + 2.0 * a) / 256.0;
            w[5] = (1.0 - 2.0 * a) / 512.0;
        }
    }
    // Stored as a_n / 2 for n >= 1.
    for v in &mut w[1..] {
        *v *= 0.5;
    }
    w
}

/// Filter operator with factors cached per line length.
///
/// The end nodes are left untouched; the stencil order drops towards the
/// ends so that every row stays centered.
#[derive(Clone, Debug)]
pub struct CompactFilter {
    alpha: f64,
    weights: [[f64; 6]; 6],
    factors: Vec<(usize, TridiagonalLu)>,
}

impl CompactFilter {
    pub fn new(alpha: f64, lengths: &[usize]) -> Result<Self> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::config(format!(
                "filter parameter {alpha} outside [0, 0.5)"
            )));
        }
        let mut w = [[0.0; 6]; 6];
        w[0][0] = 1.0;
        for (m, row) in w.iter_mut().enumerate().skip(1) {
            *row = weights(m, alpha);
        }
        let mut factors: Vec<(usize, TridiagonalLu)> = Vec::new();
        for &n in lengths {
            if factors.iter().all(|(m, _)| *m != n) {
                factors.push((n, Self::lhs(n, alpha).factor()?));
            }
        }
        Ok(CompactFilter {
            alpha,
            weights: w,
            factors,
        })
    }

    pub fn for_grid(grid: &Grid, alpha: f64) -> Result<Self> {
        Self::new(alpha, grid.counts())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lhs(n: usize, alpha: f64) -> Tridiagonal {
        let mut lower = vec![alpha; n];
        let mut upper = vec![alpha; n];
        lower[0] = 0.0;
        upper[0] = 0.0;
        lower[n - 1] = 0.0;
        upper[n - 1] = 0.0;
        Tridiagonal {
            lower,
            diag: vec![1.0; n],
            upper,
        }
    }

    /// Filters raw node values along `axis` into `out`.
    pub fn apply_into(&self, grid: &Grid, axis: usize, input: &[f64], out: &mut [f64]) -> Result<()> {
        grid.check_axis(axis)?;
        let n = grid.n(axis);
        let owned;
        let lu = match self.factors.iter().find(|(m, _)| *m == n) {
            Some((_, lu)) => lu,
            None => {
                owned = Self::lhs(n, self.alpha).factor()?;
                &owned
            }
        };
        let weights = &self.weights;
        sweep_axis(grid, axis, input, out, |f, d, w| {
            explicit_rhs(weights, f, d, n, w);
            lu.solve_batched(d, w);
        });
        Ok(())
    }

    /// Filters `data` in place along every axis in turn.
    pub fn apply_all_axes(&self, grid: &Grid, data: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        scratch.resize(data.len(), 0.0);
        for axis in 0..grid.dim() {
            self.apply_into(grid, axis, data, scratch)?;
            data.copy_from_slice(scratch);
        }
        Ok(())
    }
}

fn explicit_rhs(weights: &[[f64; 6]; 6], f: &[f64], d: &mut [f64], n: usize, w: usize) {
    if w == 1 {
        explicit_rhs_line(weights, &f[..n], &mut d[..n]);
        return;
    }
    for i in 0..n {
        let m = i.min(n - 1 - i).min(5);
        let a = &weights[m];
        let o = i * w;
        for c in 0..w {
            d[o + c] = a[0] * f[o + c];
        }
        for k in 1..=m {
            let (lo, hi) = ((i - k) * w, (i + k) * w);
            for c in 0..w {
                d[o + c] += a[k] * (f[hi + c] + f[lo + c]);
            }
        }
    }
}

/// Same arithmetic as the batched form, specialised to one contiguous line.
fn explicit_rhs_line(weights: &[[f64; 6]; 6], f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let a = &weights[5];
    for i in 0..n {
        let m = i.min(n - 1 - i);
        if m >= 5 {
            let mut v = a[0] * f[i];
            v += a[1] * (f[i + 1] + f[i - 1]);
            v += a[2] * (f[i + 2] + f[i - 2]);
            v += a[3] * (f[i + 3] + f[i - 3]);
            v += a[4] * (f[i + 4] + f[i - 4]);
            v += a[5] * (f[i + 5] + f[i - 5]);
            d[i] = v;
        } else {
            let a = &weights[m];
            let mut v = a[0] * f[i];
            for k in 1..=m {
                v += a[k] * (f[i + k] + f[i - k]);
            }
            d[i] = v;
        }
    }
}

/// Filters `field` along `axis`.
pub fn compact_filter_apply(
    field: &ScalarField,
    axis: usize,
    filter: &CompactFilter,
) -> Result<ScalarField> {
    let g = *field.grid();
    let mut out = vec![0.0; g.len()];
    filter.apply_into(&g, axis, field.values(), &mut out)?;
    ScalarField::from_values(&g, out)
}
