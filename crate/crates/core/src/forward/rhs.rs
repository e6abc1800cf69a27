//! Semi-discrete Euler right-hand side in pressure form.

use super::boundary::{characteristic_rates, interior_rates, Face, FluxDerivs, Prim};
use super::source::SourceSet;
use super::sponge::{SpongeLayer, SpongeProfile};
use crate::error::Result;
use crate::field::{Packed, StateField};
use crate::grid::{GasModel, Grid};
use crate::numerics::CompactScheme;
use crate::par::{self, NODE_CHUNK};
use alloc::vec;
use alloc::vec::Vec;

/// Derivatives along one axis of the flux arrays, packed as
/// `[mass, mom_1.., enthalpy, p]`.
pub(crate) struct AxisDerivs {
    dim: usize,
    pub data: Vec<Vec<f64>>,
}

impl AxisDerivs {
    #[inline]
    pub fn at(&self, node: usize) -> FluxDerivs<f64> {
        let d = &self.data;
        let mut mom = [0.0; 3];
        for (j, m) in mom.iter_mut().enumerate().take(self.dim) {
            *m = d[1 + j][node];
        }
        FluxDerivs {
            mass: d[0][node],
            mom,
            enthalpy: d[self.dim + 1][node],
            p: d[self.dim + 2][node],
        }
    }
}

#[inline]
pub(crate) fn prim_at(comps: &[&[f64]], dim: usize, node: usize) -> Prim<f64> {
    let mut u = [0.0; 3];
    for (j, v) in u.iter_mut().enumerate().take(dim) {
        *v = comps[1 + j][node];
    }
    Prim {
        rho: comps[0][node],
        u,
        p: comps[dim + 1][node],
    }
}

/// Flux arrays along `axis` for the state given as component slices.
pub(crate) fn flux_arrays(grid: &Grid, comps: &[&[f64]], axis: usize, gamma: f64) -> Vec<Vec<f64>> {
    let dim = grid.dim();
    let n = grid.len();
    let mut out: Vec<Vec<f64>> = (0..dim + 2).map(|_| vec![0.0; n]).collect();
    let ratio = gamma / (gamma - 1.0);
    let (rho, un, p) = (comps[0], comps[1 + axis], comps[dim + 1]);
    par::zip_chunks(out.iter_mut().map(|v| v.as_mut_slice()).collect(), NODE_CHUNK, |start, o| {
        let len = o[0].len();
        let r = start..start + len;
        let (rho, un, p) = (&rho[r.clone()], &un[r.clone()], &p[r.clone()]);
        for i in 0..len {
            o[0][i] = rho[i] * un[i];
        }
        for j in 0..dim {
            let uj = &comps[1 + j][r.clone()];
            let (head, tail) = o.split_at_mut(1 + j);
            let (m, dst) = (&head[0][..len], &mut tail[0][..len]);
            if j == axis {
                for i in 0..len {
                    dst[i] = m[i] * uj[i] + p[i];
                }
            } else {
                for i in 0..len {
                    dst[i] = m[i] * uj[i];
                }
            }
        }
        let e = &mut o[dim + 1][..len];
        for i in 0..len {
            e[i] = ratio * un[i] * p[i];
        }
    });
    out
}

/// Compact derivatives along `axis` of the fluxes and of `p`.
pub(crate) fn axis_derivatives(
    grid: &Grid,
    scheme: &CompactScheme,
    comps: &[&[f64]],
    axis: usize,
    gamma: f64,
) -> Result<AxisDerivs> {
    let dim = grid.dim();
    let fluxes = flux_arrays(grid, comps, axis, gamma);
    let mut data = Vec::with_capacity(dim + 3);
    for f in fluxes.iter().map(|v| v.as_slice()).chain(core::iter::once(comps[dim + 1])) {
        data.push(scheme.d1(grid, axis, f)?);
    }
    Ok(AxisDerivs { dim, data })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AxisMode {
    /// Interior formula everywhere.
    Interior,
    /// Characteristic formula on the two boundary planes of the axis.
    Characteristic,
    /// Swap interior for characteristic on boundary planes only.
    Patch,
}

/// Calls `f(node, local, face, outputs)` for every node, where `face` is the
/// boundary face of `node` along `axis` and `local` indexes the output
/// chunks.
#[inline]
pub(crate) fn for_each_node<F>(grid: &Grid, axis: usize, outputs: Vec<&mut [f64]>, f: F)
where
    F: Fn(usize, usize, Option<Face>, &mut [&mut [f64]]) + Sync + Send,
{
    let (n0, n1, n_axis) = (grid.n(0), grid.n(1), grid.n(axis));
    par::zip_rows(outputs, n0, |row0, out| {
        let rows = out[0].len() / n0;
        for r in 0..rows {
            let row = row0 + r;
            let line_face = match axis {
                0 => None,
                1 => Face::of(row % n1, n_axis),
                _ => Face::of(row / n1, n_axis),
            };
            for i in 0..n0 {
                let face = if axis == 0 { Face::of(i, n_axis) } else { line_face };
                f(row * n0 + i, r * n0 + i, face, out);
            }
        }
    });
}

fn accumulate_axis(
    grid: &Grid,
    comps: &[&[f64]],
    d: &AxisDerivs,
    axis: usize,
    gamma: f64,
    mode: AxisMode,
    rate: &mut StateField,
) {
    let dim = grid.dim();
    for_each_node(grid, axis, rate.components_mut(), |node, local, face, out| {
        let rates = match (mode, face) {
            (AxisMode::Patch, None) => return,
            (AxisMode::Interior, _) | (AxisMode::Characteristic, None) => {
                interior_rates(&prim_at(comps, dim, node), &d.at(node), axis, dim, gamma)
            }
            (AxisMode::Characteristic, Some(f)) => {
                characteristic_rates(&prim_at(comps, dim, node), &d.at(node), axis, dim, gamma, f)
            }
            (AxisMode::Patch, Some(f)) => {
                let q = prim_at(comps, dim, node);
                let fd = d.at(node);
                let a = characteristic_rates(&q, &fd, axis, dim, gamma, f);
                let b = interior_rates(&q, &fd, axis, dim, gamma);
                [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4]]
            }
        };
        for (c, o) in out.iter_mut().enumerate() {
            o[local] += rates[c];
        }
    });
}

/// Assembled forward operator: interior fluxes, optional characteristic
/// faces, optional sponge.
#[derive(Clone, Debug)]
pub struct ForwardOperator {
    grid: Grid,
    gas: GasModel,
    scheme: CompactScheme,
    characteristic: bool,
    sponge: Option<SpongeProfile>,
    reference: StateField,
}

impl ForwardOperator {
    pub fn new(grid: &Grid, gas: &GasModel, characteristic: bool, sponge: Option<&SpongeLayer>) -> Result<Self> {
        if let Some(s) = sponge {
            s.validate()?;
        }
        Ok(ForwardOperator {
            grid: *grid,
            gas: *gas,
            scheme: CompactScheme::for_grid(grid)?,
            characteristic,
            sponge: sponge.map(|s| s.profile(grid)),
            reference: StateField::quiescent(grid, gas),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn scheme(&self) -> &CompactScheme {
        &self.scheme
    }

    pub fn reference(&self) -> &StateField {
        &self.reference
    }

    pub(crate) fn sponge(&self) -> Option<&SpongeProfile> {
        self.sponge.as_ref()
    }

    pub(crate) fn characteristic(&self) -> bool {
        self.characteristic
    }

    /// Time derivative of `[ρ, u, p]` at fractional time level `level`.
    pub fn rate(&self, q: &StateField, sources: &SourceSet, level: f64) -> Result<StateField> {
        let g = &self.grid;
        let comps = q.components();
        let mut rate = StateField::zeros(g);
        let mode = if self.characteristic {
            AxisMode::Characteristic
        } else {
            AxisMode::Interior
        };
        for axis in 0..g.dim() {
            let d = axis_derivatives(g, &self.scheme, &comps, axis, self.gas.gamma)?;
            accumulate_axis(g, &comps, &d, axis, self.gas.gamma, mode, &mut rate);
        }
        sources.scatter(g, level, self.gas.gamma - 1.0, rate.p_mut())?;
        if let Some(s) = &self.sponge {
            s.relax(&mut rate, q, Some(&self.reference), -1.0);
        }
        Ok(rate)
    }
}

/// Interior Euler rates (no boundary treatment, no sponge).
///
/// `level` is the fractional time level at which source signals are read.
pub fn euler_rhs(
    state: &StateField,
    sources: &SourceSet,
    level: f64,
    gas: &GasModel,
    scheme: &CompactScheme,
) -> Result<StateField> {
    state.check_admissible(0)?;
    let g = state.grid();
    let comps = state.components();
    let mut rate = StateField::zeros(g);
    for axis in 0..g.dim() {
        let d = axis_derivatives(g, scheme, &comps, axis, gas.gamma)?;
        accumulate_axis(g, &comps, &d, axis, gas.gamma, AxisMode::Interior, &mut rate);
    }
    sources.scatter(g, level, gas.gamma - 1.0, rate.p_mut())?;
    Ok(rate)
}

/// Replaces the boundary-normal contribution on every face by its
/// characteristic form with incoming waves removed.
pub fn apply_characteristic_bcs(
    rate: &mut StateField,
    state: &StateField,
    gas: &GasModel,
    scheme: &CompactScheme,
) -> Result<()> {
    let g = *state.grid();
    let comps = state.components();
    for axis in 0..g.dim() {
        let d = axis_derivatives(&g, scheme, &comps, axis, gas.gamma)?;
        accumulate_axis(&g, &comps, &d, axis, gas.gamma, AxisMode::Patch, rate);
    }
    Ok(())
}
