//! Structured Cartesian grids and the gas model.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

/// Minimum node count per axis; the compact boundary closures need interior
/// width.
pub const MIN_NODES: usize = 8;

/// Uniform Cartesian grid in two or three dimensions.
///
/// Nodes are ordered with `x1` fastest. In 2D the third axis is inert:
/// `n[2] == 1` and it does not contribute to the cell volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

/// Builds a grid with `counts` nodes spanning `extents` meters per axis,
/// origin at zero.
pub fn build_grid(extents: &[f64], counts: &[usize]) -> Result<Grid> {
    if extents.len() != counts.len() {
        return Err(Error::config(format!(
            "{} extents given for {} axes",
            extents.len(),
            counts.len()
        )));
    }
    for (axis, &c) in counts.iter().enumerate() {
        if c < MIN_NODES {
            return Err(Error::TooFewNodes {
                axis,
                count: c,
                min: MIN_NODES,
            });
        }
    }
    let mut spacing = [1.0; 3];
    for (axis, (&e, &c)) in extents.iter().zip(counts).enumerate() {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::config(format!("extent of axis {axis} must be > 0")));
        }
        spacing[axis] = e / (c - 1) as f64;
    }
    Grid::new(counts, &spacing[..counts.len()], &[0.0; 3][..counts.len()])
}

impl Grid {
    pub fn new(counts: &[usize], spacing: &[f64], origin: &[f64]) -> Result<Self> {
        let dim = counts.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::config(format!("grids are 2D or 3D, got {dim} axes")));
        }
        if spacing.len() != dim || origin.len() != dim {
            return Err(Error::config("spacing/origin length differs from axis count"));
        }
        let mut g = Grid {
            dim,
            n: [1; 3],
            spacing: [1.0; 3],
            origin: [0.0; 3],
        };
        for axis in 0..dim {
            if counts[axis] < MIN_NODES {
                return Err(Error::TooFewNodes {
                    axis,
                    count: counts[axis],
                    min: MIN_NODES,
                });
            }
            if !(spacing[axis] > 0.0) || !spacing[axis].is_finite() {
                return Err(Error::config(format!("spacing of axis {axis} must be > 0")));
            }
            g.n[axis] = counts[axis];
            g.spacing[axis] = spacing[axis];
            g.origin[axis] = origin[axis];
        }
        Ok(g)
    }

    pub fn with_origin(mut self, origin: &[f64]) -> Self {
        for (axis, &o) in origin.iter().take(self.dim).enumerate() {
            self.origin[axis] = o;
        }
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn counts(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn origin(&self, axis: usize) -> f64 {
        self.origin[axis]
    }

    pub fn origins(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    /// Distance between the first and last node along `axis`.
    pub fn extent(&self, axis: usize) -> f64 {
        self.spacing[axis] * (self.n[axis] - 1) as f64
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Number of nodes; the length of every field on this grid.
    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of the active spacings.
    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// Memory stride between neighbours along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        }
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            })
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let r = idx / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    /// Physical position of a node; unused axes read as zero.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.origin[axis] + c[axis] as f64 * self.spacing[axis];
        }
        x
    }

    /// Whether `x` lies in the closed bounding box of the nodes.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-9;
        (0..self.dim).all(|a| {
            let lo = self.origin[a];
            let hi = lo + self.extent(a);
            x[a] >= lo - tol * self.spacing[a] && x[a] <= hi + tol * self.spacing[a]
        })
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: &[f64]) -> Result<usize> {
        if x.len() < self.dim || !self.contains(x) {
            return Err(Error::OutsideDomain {
                position: pad3(x),
            });
        }
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let f = math::round((x[a] - self.origin[a]) / self.spacing[a]);
            c[a] = (f.max(0.0) as usize).min(self.n[a] - 1);
        }
        Ok(self.index(c[0], c[1], c[2]))
    }

    /// Distance in nodes from `idx` to the nearest face along `axis`.
    pub fn face_distance(&self, idx: usize, axis: usize) -> usize {
        let c = self.coords(idx)[axis];
        c.min(self.n[axis] - 1 - c)
    }

    /// Node position along one axis.
    #[inline]
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }
}

pub(crate) fn pad3(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (d, v) in p.iter_mut().zip(x) {
        *d = *v;
    }
    p
}

/// Ideal-gas constants of the quiescent medium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    /// Heat capacity ratio.
    pub gamma: f64,
    /// Reference density in kg/m³.
    pub rho_ref: f64,
    /// Reference pressure in Pa.
    pub p_ref: f64,
}

impl GasModel {
    pub const DEFAULT_GAMMA: f64 = 1.4;
    pub const DEFAULT_RHO: f64 = 1.2;
    pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

    /// Chooses `p_ref` so the reference sound speed is `c`.
    pub fn from_sound_speed(gamma: f64, rho_ref: f64, c: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::config(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(rho_ref > 0.0) || !(c > 0.0) {
            return Err(Error::config("reference density and sound speed must be > 0"));
        }
        Ok(GasModel {
            gamma,
            rho_ref,
            p_ref: rho_ref * c * c / gamma,
        })
    }

    /// Dry air at 343 m/s.
    pub fn air() -> Self {
        GasModel::from_sound_speed(
            Self::DEFAULT_GAMMA,
            Self::DEFAULT_RHO,
            Self::DEFAULT_SOUND_SPEED,
        )
        .expect("default gas constants are valid")
    }

    pub fn sound_speed(&self) -> f64 {
        math::sqrt(self.gamma * self.p_ref / self.rho_ref)
    }

    /// Characteristic impedance ρc.
    pub fn impedance(&self) -> f64 {
        self.rho_ref * self.sound_speed()
    }
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel::air()
    }
}
