//! Boundary-adjacent damping towards the reference state.

use crate::error::{Error, Result};
use crate::field::{Packed, StateField};
use crate::grid::{GasModel, Grid};
use crate::math;
use alloc::vec::Vec;

/// Damping zone of `width` nodes on every face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpongeLayer {
    pub width: usize,
    /// Coefficient at the outermost node, 1/s.
    pub strength: f64,
    /// Exponent of the ramp `((width - d) / width)^degree`.
    pub degree: i32,
}

impl SpongeLayer {
    pub const DEFAULT_WIDTH: usize = 16;
    pub const DEFAULT_DEGREE: i32 = 3;

    /// Strength `2c / L` for a layer of thickness `L = width·Δx`.
    pub fn with_width(grid: &Grid, gas: &GasModel, width: usize) -> Self {
        SpongeLayer {
            width,
            strength: 2.0 * gas.sound_speed() / (width as f64 * grid.min_spacing()),
            degree: Self::DEFAULT_DEGREE,
        }
    }

    pub fn default_for(grid: &Grid, gas: &GasModel) -> Self {
        Self::with_width(grid, gas, Self::DEFAULT_WIDTH)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || !(self.strength >= 0.0) || self.degree < 1 {
            return Err(Error::config(
                "sponge needs width >= 1, strength >= 0 and degree >= 1",
            ));
        }
        Ok(())
    }

    /// Coefficient at node `idx`: largest ramp value over all axes.
    pub fn coefficient(&self, grid: &Grid, idx: usize) -> f64 {
        let w = self.width as f64;
        (0..grid.dim())
            .map(|a| grid.face_distance(idx, a))
            .filter(|&d| d < self.width)
            .map(|d| self.strength * math::powi((w - d as f64) / w, self.degree))
            .fold(0.0, f64::max)
    }

    pub fn profile(&self, grid: &Grid) -> SpongeProfile {
        let mut nodes = Vec::new();
        let mut coeff = Vec::new();
        for idx in 0..grid.len() {
            let c = self.coefficient(grid, idx);
            if c > 0.0 {
                nodes.push(idx);
                coeff.push(c);
            }
        }
        SpongeProfile { nodes, coeff }
    }
}

/// Nonzero sponge coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpongeProfile {
    pub nodes: Vec<usize>,
    pub coeff: Vec<f64>,
}

impl SpongeProfile {
    /// `rate_c += sign · coeff · (state_c − reference_c)` for every component.
    pub fn relax<P: Packed>(&self, rate: &mut P, state: &P, reference: Option<&P>, sign: f64) {
        for c in 0..rate.num_components() {
            let s = state.component(c);
            let r = reference.map(|r| r.component(c));
            let out = rate.component_mut(c);
            for (&i, &k) in self.nodes.iter().zip(&self.coeff) {
                let dev = match r {
                    Some(r) => s[i] - r[i],
                    None => s[i],
                };
                out[i] += sign * k * dev;
            }
        }
    }
}

/// `rate −= coeff(x)·(state − reference)`.
pub fn apply_sponge(rate: &mut StateField, state: &StateField, reference: &StateField, sponge: &SpongeLayer) {
    sponge
        .profile(state.grid())
        .relax(rate, state, Some(reference), -1.0);
}
