//! Tridiagonal systems: factor once, solve many right-hand sides.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

/// Rows `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1]`.
///
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != diag.len() || upper.len() != diag.len() || diag.is_empty() {
            return Err(Error::shape(format!(
                "band lengths {}/{}/{}",
                lower.len(),
                diag.len(),
                upper.len()
            )));
        }
        Ok(Tridiagonal { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        Tridiagonal {
            lower: alloc::vec![0.0; n],
            diag: alloc::vec![1.0; n],
            upper: alloc::vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A·x`
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas elimination without pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut lower = self.lower.clone();
        lower[0] = 0.0;
        let mut inv_diag = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let d = self.diag[i] - lower[i] * prev;
            if d == 0.0 || !d.is_finite() {
                return Err(Error::ZeroPivot(i));
            }
            let inv = 1.0 / d;
            let u = if i + 1 < n { self.upper[i] * inv } else { 0.0 };
            inv_diag.push(inv);
            upper_scaled.push(u);
            prev = u;
        }
        Ok(TridiagonalLu {
            lower,
            inv_diag,
            upper_scaled,
        })
    }
}

/// Precomputed elimination factors of a [`Tridiagonal`] matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    inv_diag: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl TridiagonalLu {
    pub fn len(&self) -> usize {
        self.inv_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_diag.is_empty()
    }

    /// Solves in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.solve_batched(x, 1);
    }

    /// Solves `width` interleaved systems stored row-major as `[n][width]`.
    ///
    /// Each column is eliminated with the same sequence of operations as a
    /// single solve, so batching does not change results.
    pub fn solve_batched(&self, x: &mut [f64], width: usize) {
        let n = self.len();
        debug_assert_eq!(x.len(), n * width);
        if width == 1 {
            self.solve_line(x);
            return;
        }
        let d0 = self.inv_diag[0];
        for v in &mut x[..width] {
            *v *= d0;
        }
        for i in 1..n {
            let (l, d) = (self.lower[i], self.inv_diag[i]);
            let (head, tail) = x.split_at_mut(i * width);
            let prev = &head[(i - 1) * width..];
            for (v, p) in tail[..width].iter_mut().zip(prev) {
                *v = (*v - l * p) * d;
            }
        }
        for i in (0..n - 1).rev() {
            let u = self.upper_scaled[i];
            let (head, tail) = x.split_at_mut((i + 1) * width);
            let row = &mut head[i * width..];
            for (v, nx) in row.iter_mut().zip(&tail[..width]) {
                *v -= u * nx;
            }
        }
    }
}

impl TridiagonalLu {
    fn solve_line(&self, x: &mut [f64]) {
        let n = self.len();
        let (l, d, u) = (&self.lower[..n], &self.inv_diag[..n], &self.upper_scaled[..n]);
        let x = &mut x[..n];
        let mut prev = x[0] * d[0];
        x[0] = prev;
        for i in 1..n {
            prev = (x[i] - l[i] * prev) * d[i];
            x[i] = prev;
        }
        let mut next = x[n - 1];
        for i in (0..n - 1).rev() {
            next = x[i] - u[i] * next;
            x[i] = next;
        }
    }
}

/// Solves `A·x = rhs` with precomputed factors.
pub fn tridiagonal_solve(lu: &TridiagonalLu, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != lu.len() {
        return Err(Error::shape(format!(
            "rhs of length {} for a {}-row system",
            rhs.len(),
            lu.len()
        )));
    }
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}
