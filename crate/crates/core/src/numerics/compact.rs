//! Sixth-order tridiagonal compact first derivative.

use super::sweep_axis;
use super::tridiag::{Tridiagonal, TridiagonalLu};
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::{Grid, MIN_NODES};
use alloc::vec;
use alloc::vec::Vec;

/// Interior left-hand side weight.
pub const ALPHA: f64 = 1.0 / 3.0;
/// Interior right-hand side weights.
pub const A: f64 = 14.0 / 9.0;
pub const B: f64 = 1.0 / 9.0;

const HALF_A: f64 = A / 2.0;
const QUARTER_B: f64 = B / 4.0;

/// Compact derivative operator with factors cached per line length.
///
/// Closures: third order one-sided at the end nodes, fourth order compact
/// at their neighbours.
#[derive(Clone, Debug)]
pub struct CompactScheme {
    factors: Vec<(usize, TridiagonalLu)>,
}

impl CompactScheme {
    /// Factors for every axis length of `grid`.
    pub fn for_grid(grid: &Grid) -> Result<Self> {
        Self::for_lengths(grid.counts())
    }

    pub fn for_lengths(lengths: &[usize]) -> Result<Self> {
        let mut factors: Vec<(usize, TridiagonalLu)> = Vec::new();
        for &n in lengths {
            if factors.iter().all(|(m, _)| *m != n) {
                factors.push((n, Self::lhs(n).factor()?));
            }
        }
        Ok(CompactScheme { factors })
    }

    /// Left-hand side matrix for a line of `n` nodes.
    pub fn lhs(n: usize) -> Tridiagonal {
        let mut lower = vec![ALPHA; n];
        let diag = vec![1.0; n];
        let mut upper = vec![ALPHA; n];
        lower[0] = 0.0;
        upper[0] = 2.0;
        lower[1] = 0.25;
        upper[1] = 0.25;
        lower[n - 2] = 0.25;
        upper[n - 2] = 0.25;
        lower[n - 1] = 2.0;
        upper[n - 1] = 0.0;
        Tridiagonal {
            lower,
            diag,
            upper,
        }
    }

    fn factors(&self, n: usize) -> Option<&TridiagonalLu> {
        self.factors.iter().find(|(m, _)| *m == n).map(|(_, f)| f)
    }

    /// Derivative of raw node values along `axis`, written into `out`.
    pub fn d1_into(&self, grid: &Grid, axis: usize, input: &[f64], out: &mut [f64]) -> Result<()> {
        grid.check_axis(axis)?;
        let n = grid.n(axis);
        let owned;
        let lu = match self.factors(n) {
            Some(lu) => lu,
            None => {
                owned = Self::lhs(n).factor()?;
                &owned
            }
        };
        let inv_h = 1.0 / grid.spacing(axis);
        sweep_axis(grid, axis, input, out, |f, d, w| {
            explicit_rhs(f, d, n, w, inv_h);
            lu.solve_batched(d, w);
        });
        Ok(())
    }

    pub fn d1(&self, grid: &Grid, axis: usize, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; input.len()];
        self.d1_into(grid, axis, input, &mut out)?;
        Ok(out)
    }
}

fn explicit_rhs(f: &[f64], d: &mut [f64], n: usize, w: usize, inv_h: f64) {
    debug_assert!(n >= MIN_NODES);
    if w == 1 {
        explicit_rhs_line(&f[..n], &mut d[..n], inv_h);
        return;
    }
    let row = |i: usize| i * w;
    let (a, b) = (HALF_A * inv_h, QUARTER_B * inv_h);
    for c in 0..w {
        d[c] = (-2.5 * f[c] + 2.0 * f[row(1) + c] + 0.5 * f[row(2) + c]) * inv_h;
        d[row(1) + c] = 0.75 * (f[row(2) + c] - f[c]) * inv_h;
    }
    for i in 2..n - 2 {
        let (m2, m1, p1, p2) = (row(i - 2), row(i - 1), row(i + 1), row(i + 2));
        let o = row(i);
        for c in 0..w {
            d[o + c] = a * (f[p1 + c] - f[m1 + c]) + b * (f[p2 + c] - f[m2 + c]);
        }
    }
    let (l, l1, l2) = (row(n - 1), row(n - 2), row(n - 3));
    for c in 0..w {
        d[l1 + c] = 0.75 * (f[l + c] - f[l2 + c]) * inv_h;
        d[l + c] = (2.5 * f[l + c] - 2.0 * f[l1 + c] - 0.5 * f[l2 + c]) * inv_h;
    }
}

fn explicit_rhs_line(f: &[f64], d: &mut [f64], inv_h: f64) {
    let n = f.len();
    let (a, b) = (HALF_A * inv_h, QUARTER_B * inv_h);
    d[0] = (-2.5 * f[0] + 2.0 * f[1] + 0.5 * f[2]) * inv_h;
    d[1] = 0.75 * (f[2] - f[0]) * inv_h;
    for i in 2..n - 2 {
        d[i] = a * (f[i + 1] - f[i - 1]) + b * (f[i + 2] - f[i - 2]);
    }
    d[n - 2] = 0.75 * (f[n - 1] - f[n - 3]) * inv_h;
    d[n - 1] = (2.5 * f[n - 1] - 2.0 * f[n - 2] - 0.5 * f[n - 3]) * inv_h;
}

/// Derivative of `field` along `axis`.
pub fn compact_d1(field: &ScalarField, axis: usize, scheme: &CompactScheme) -> Result<ScalarField> {
    let g = *field.grid();
    let d = scheme.d1(&g, axis, field.values())?;
    ScalarField::from_values(&g, d)
}
