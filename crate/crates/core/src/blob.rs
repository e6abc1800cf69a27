//! Truncated Gaussian supports for sources and microphone weights.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{pad3, Grid};
use crate::math;
use alloc::vec::Vec;

/// Blobs vanish beyond this many half-widths.
pub const TRUNCATION: f64 = 4.0;

/// `exp(-ln2 (r/h)^2)` for `r <= 4h`, zero beyond.
#[inline]
pub fn blob_profile(r: f64, half_width: f64) -> f64 {
    let q = r / half_width;
    if q > TRUNCATION {
        0.0
    } else {
        math::exp(-math::LN_2 * q * q)
    }
}

/// Gaussian bump stored as the list of nodes where it is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseBlob {
    pub center: [f64; 3],
    pub half_width: f64,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SparseBlob {
    pub fn new(grid: &Grid, center: &[f64], half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::config("blob half-width must be > 0"));
        }
        if center.len() < grid.dim() || !grid.contains(center) {
            return Err(Error::OutsideDomain {
                position: pad3(center),
            });
        }
        let c = pad3(center);
        let reach = TRUNCATION * half_width;
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..grid.dim() {
            let h = grid.spacing(a);
            let first = math::floor((c[a] - reach - grid.origin(a)) / h).max(0.0) as usize;
            let last = (math::floor((c[a] + reach - grid.origin(a)) / h) + 1.0).max(0.0) as usize;
            lo[a] = first.min(grid.n(a) - 1);
            hi[a] = last.min(grid.n(a) - 1);
        }
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let idx = grid.index(i, j, k);
                    let x = grid.position(idx);
                    let r2: f64 = (0..grid.dim()).map(|a| (x[a] - c[a]) * (x[a] - c[a])).sum();
                    let w = blob_profile(math::sqrt(r2), half_width);
                    if w > 0.0 {
                        indices.push(idx);
                        weights.push(w);
                    }
                }
            }
        }
        Ok(SparseBlob {
            center: c,
            half_width,
            indices,
            weights,
        })
    }

    /// Sum of nodal weights (without the cell volume).
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `out += scale * blob`
    #[inline]
    pub fn scatter_add(&self, out: &mut [f64], scale: f64) {
        for (&i, &w) in self.indices.iter().zip(&self.weights) {
            out[i] += scale * w;
        }
    }

    /// `Σ field · blob` over the support, in index order.
    #[inline]
    pub fn project(&self, field: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| field[i] * w)
            .sum()
    }

    pub fn to_field(&self, grid: &Grid) -> ScalarField {
        let mut f = ScalarField::zeros(grid);
        self.scatter_add(f.values_mut(), 1.0);
        f
    }
}

/// Dense version of [`SparseBlob`].
pub fn gaussian_blob(grid: &Grid, center: &[f64], half_width: f64) -> Result<ScalarField> {
    Ok(SparseBlob::new(grid, center, half_width)?.to_field(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn grid64() -> Grid {
        build_grid(&[1.0, 1.0], &[64, 64]).unwrap()
    }

    #[test]
    fn peak_and_half_width() {
        assert_eq!(blob_profile(0.0, 0.3), 1.0);
        assert!((blob_profile(0.3, 0.3) - 0.5).abs() < 1e-15);
        assert_eq!(blob_profile(1.21, 0.3), 0.0);
        assert!(blob_profile(4.0 * 0.3, 0.3) < 1.6e-5);
        assert!(blob_profile(4.0 * 0.3, 0.3) > 0.0);
    }

    #[test]
    fn node_centered_blob() {
        let g = grid64();
        let h = g.spacing(0);
        let c = g.position(g.index(20, 30, 0));
        let f = gaussian_blob(&g, &c, 2.0 * h).unwrap();
        assert_eq!(f.values()[g.index(20, 30, 0)], 1.0);
        assert!((f.values()[g.index(22, 30, 0)] - 0.5).abs() < 1e-12);
        assert_eq!(f.values()[g.index(29, 30, 0)], 0.0);
    }

    #[test]
    fn outside_rejected() {
        let g = grid64();
        assert!(gaussian_blob(&g, &[1.5, 0.5], 0.05).is_err());
        assert!(gaussian_blob(&g, &[0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn integral_regression() {
        // Brute-force quadrature: evaluate the profile at every node of the
        // 64^2 grid independently of the sparse construction.
        let g = grid64();
        let h = g.spacing(0);
        let c = [0.5, 0.5];
        let hw = 2.0 * h;
        let mut brute = 0.0;
        for j in 0..64 {
            for i in 0..64 {
                let x = i as f64 * h - c[0];
                let y = j as f64 * h - c[1];
                brute += blob_profile((x * x + y * y).sqrt(), hw) * h * h;
            }
        }
        let f = gaussian_blob(&g, &c, hw).unwrap();
        assert!((f.integral() - brute).abs() < 1e-15);
        // Frozen value of the direct summation.
        assert!((brute - 4.567_718_070_680_6e-3).abs() < 1e-15, "{brute:e}");
    }

    #[test]
    fn translation_by_whole_cells() {
        let g = grid64();
        let h = g.spacing(0);
        let a = gaussian_blob(&g, &[0.3, 0.41], 2.0 * h).unwrap();
        let b = gaussian_blob(&g, &[0.3 + 3.0 * h, 0.41 - 2.0 * h], 2.0 * h).unwrap();
        for j in 10..50 {
            for i in 5..50 {
                let va = a.values()[g.index(i, j, 0)];
                let vb = b.values()[g.index(i + 3, j - 2, 0)];
                assert!((va - vb).abs() < 1e-12);
            }
        }
    }
}
