//! Semi-discrete adjoint Euler operator.
//!
//! `∂t q* = Ã [ −Σ_i B_iᵀ ∂_i q* − Σ_i ∂_i(C_iᵀ q*) + resorting − g ] + σ q*`
//! with `Ã = (Aᵀ)⁻¹`. On boundary planes the adjoint waves that enter the
//! domain in backward time are removed, mirroring the forward faces.

use super::matrices::{a_tilde_mul, bt_mul};
use super::objective::AdjointForcing;
use crate::error::{Error, Result};
use crate::field::{AdjointStateField, Packed, ScalarField, StateField};
use crate::forward::rhs::for_each_node;
use crate::forward::{Face, ForwardOperator, SpongeLayer, SpongeProfile};
use crate::grid::{GasModel, Grid};
use crate::math;
use crate::numerics::CompactScheme;
use crate::par::{self, NODE_CHUNK};
use alloc::vec;
use alloc::vec::Vec;

/// Forward state at one (possibly fractional) level together with its
/// pressure gradient.
#[derive(Clone, Debug)]
pub struct BaseState {
    state: StateField,
    dp: Vec<Vec<f64>>,
    at_rest: bool,
}

impl BaseState {
    pub fn new(state: StateField, scheme: &CompactScheme) -> Result<Self> {
        let g = *state.grid();
        let dim = g.dim();
        let at_rest = (0..dim).all(|a| state.u(a).iter().all(|v| *v == 0.0));
        let p0 = state.p()[0];
        let dp = if at_rest && state.p().iter().all(|v| *v == p0) {
            vec![vec![0.0; g.len()]; dim]
        } else {
            (0..dim)
                .map(|a| scheme.d1(&g, a, state.p()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(BaseState { state, dp, at_rest })
    }

    /// Mean of two levels, used at half steps.
    pub fn midpoint(a: &BaseState, b: &BaseState) -> Self {
        let mut state = a.state.clone();
        for (x, y) in state.data_mut().iter_mut().zip(b.state.data()) {
            *x = 0.5 * (*x + *y);
        }
        let dp = a
            .dp
            .iter()
            .zip(&b.dp)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| 0.5 * (x + y)).collect())
            .collect();
        BaseState {
            state,
            dp,
            at_rest: a.at_rest && b.at_rest,
        }
    }

    pub fn state(&self) -> &StateField {
        &self.state
    }

    /// `∂p/∂x_axis` of the base state.
    pub fn pressure_gradient(&self, axis: usize) -> &[f64] {
        &self.dp[axis]
    }
}

/// Adjoint right-hand side with optional characteristic faces and sponge.
#[derive(Clone, Debug)]
pub struct AdjointOperator {
    grid: Grid,
    gas: GasModel,
    scheme: CompactScheme,
    characteristic: bool,
    sponge: Option<SpongeProfile>,
}

impl AdjointOperator {
    pub fn new(grid: &Grid, gas: &GasModel, characteristic: bool, sponge: Option<&SpongeLayer>) -> Result<Self> {
        if let Some(s) = sponge {
            s.validate()?;
        }
        Ok(AdjointOperator {
            grid: *grid,
            gas: *gas,
            scheme: CompactScheme::for_grid(grid)?,
            characteristic,
            sponge: sponge.map(|s| s.profile(grid)),
        })
    }

    /// Same grid, boundaries and sponge as a forward operator.
    pub fn from_forward(op: &ForwardOperator) -> Self {
        AdjointOperator {
            grid: *op.grid(),
            gas: *op.gas(),
            scheme: op.scheme().clone(),
            characteristic: op.characteristic(),
            sponge: op.sponge().cloned(),
        }
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn scheme(&self) -> &CompactScheme {
        &self.scheme
    }

    pub fn base(&self, state: StateField) -> Result<BaseState> {
        BaseState::new(state, &self.scheme)
    }

    /// Adjoint rate at fractional level `level`.
    pub fn rate(&self, w: &AdjointStateField, base: &BaseState, forcing: &AdjointForcing, level: f64) -> Result<AdjointStateField> {
        let mut y = self.flux_terms(w, base)?;
        forcing.add_to(&self.grid, level, -1.0, y.p_star_mut())?;
        let mut rate = self.apply_a_tilde(&y, base);
        if let Some(s) = &self.sponge {
            s.relax(&mut rate, w, None, 1.0);
        }
        Ok(rate)
    }

    /// `Σ_i [−B_iᵀ ∂_i q* − ∂_i(C_iᵀ q*) + resorting]` plus the boundary
    /// corrections, before `Ã`.
    fn flux_terms(&self, w: &AdjointStateField, base: &BaseState) -> Result<AdjointStateField> {
        let g = &self.grid;
        if w.grid() != g || base.state.grid() != g {
            return Err(Error::shape("adjoint state, base state and operator grids differ"));
        }
        let dim = g.dim();
        let gamma = self.gas.gamma;
        let wc = w.components();
        let q = base.state.components();
        let mut y = AdjointStateField::zeros(g);
        for axis in 0..dim {
            let dw = wc
                .iter()
                .map(|c| self.scheme.d1(g, axis, c))
                .collect::<Result<Vec<_>>>()?;
            let duw = if base.at_rest {
                None
            } else {
                let mut up = vec![0.0; g.len()];
                let (u, ps) = (q[1 + axis], wc[dim + 1]);
                par::for_each_chunk(&mut up, NODE_CHUNK, |start, c| {
                    for (k, v) in c.iter_mut().enumerate() {
                        *v = u[start + k] * ps[start + k];
                    }
                });
                Some(self.scheme.d1(g, axis, &up)?)
            };
            let dp0 = &base.dp[axis];
            let characteristic = self.characteristic;
            for_each_node(g, axis, y.components_mut(), |node, local, face, out| {
                let (rho, u, p) = prim(&q, dim, node);
                let mut d = [0.0; 5];
                for (c, dc) in dw.iter().enumerate() {
                    d[c] = dc[node];
                }
                let mut r = bt_mul(dim, rho, &u, p, gamma, axis, &d);
                for v in r.iter_mut() {
                    *v = -*v;
                }
                if let Some(duw) = &duw {
                    r[dim + 1] += duw[node];
                    r[1 + axis] -= wc[dim + 1][node] * dp0[node];
                }
                if characteristic {
                    if let Some(f) = face {
                        let c = boundary_correction(dim, rho, &u, p, gamma, axis, f, &d);
                        for k in 0..dim + 2 {
                            r[k] += c[k];
                        }
                    }
                }
                for (c, o) in out.iter_mut().enumerate() {
                    o[local] += r[c];
                }
            });
        }
        Ok(y)
    }

    fn apply_a_tilde(&self, y: &AdjointStateField, base: &BaseState) -> AdjointStateField {
        let g = &self.grid;
        let dim = g.dim();
        let gamma = self.gas.gamma;
        let yc = y.components();
        let q = base.state.components();
        let mut out = AdjointStateField::zeros(g);
        par::zip_chunks(out.components_mut(), NODE_CHUNK, |start, o| {
            for k in 0..o[0].len() {
                let node = start + k;
                let (rho, u, _) = prim(&q, dim, node);
                let mut v = [0.0; 5];
                for (c, yc) in yc.iter().enumerate() {
                    v[c] = yc[node];
                }
                let x = a_tilde_mul(dim, rho, &u, gamma, &v);
                for (c, oc) in o.iter_mut().enumerate() {
                    oc[k] = x[c];
                }
            }
        });
        out
    }
}

#[inline]
fn prim(q: &[&[f64]], dim: usize, node: usize) -> (f64, [f64; 3], f64) {
    let mut u = [0.0; 3];
    for j in 0..dim {
        u[j] = q[1 + j][node];
    }
    (q[0][node], u, q[dim + 1][node])
}

/// Adds back the adjoint waves that travel into the domain in backward time.
///
/// With `v = Aᵀ ∂q*` the interior term carries `−Σ_k λ_k l_k (r_k·v)` over
/// the primitive eigenpairs; a mode enters in backward time when
/// `λ_k · outward > 0`.
#[inline]
#[allow(clippy::too_many_arguments)]
fn boundary_correction(dim: usize, rho: f64, u: &[f64; 3], p: f64, gamma: f64, axis: usize, face: Face, d: &[f64; 5]) -> [f64; 5] {
    let ip = dim + 1;
    let n = 1 + axis;
    let out_sign = face.outward();
    let c2 = gamma * p / rho;
    let c = math::sqrt(c2);
    let rc = rho * c;
    let mut v = [0.0; 5];
    let mut uw = 0.0;
    for j in 0..dim {
        uw += u[j] * d[1 + j];
        v[1 + j] = rho * d[1 + j];
    }
    v[0] = d[0] + uw;
    v[ip] = d[ip] / (gamma - 1.0);
    let un = u[axis];
    let mut r = [0.0; 5];
    let lam1 = un - c;
    if lam1 * out_sign > 0.0 {
        let psi = v[0] / (2.0 * c2) - v[n] / (2.0 * rc) + 0.5 * v[ip];
        r[n] += lam1 * psi * -rc;
        r[ip] += lam1 * psi;
    }
    let lam5 = un + c;
    if lam5 * out_sign > 0.0 {
        let psi = v[0] / (2.0 * c2) + v[n] / (2.0 * rc) + 0.5 * v[ip];
        r[n] += lam5 * psi * rc;
        r[ip] += lam5 * psi;
    }
    if un * out_sign > 0.0 {
        let psi = v[0] / c2;
        r[0] += un * psi * c2;
        r[ip] -= un * psi;
        for j in (0..dim).filter(|&j| j != axis) {
            r[1 + j] += un * v[1 + j];
        }
    }
    r
}

/// Interior adjoint rate without boundary treatment or sponge, for a base
/// state and a dense pressure-row forcing `g`.
pub fn adjoint_rhs(
    w: &AdjointStateField,
    base: &StateField,
    g: &ScalarField,
    gas: &GasModel,
    scheme: &CompactScheme,
) -> Result<AdjointStateField> {
    let grid = *w.grid();
    if g.grid() != &grid {
        return Err(Error::shape("forcing on a different grid"));
    }
    let op = AdjointOperator {
        grid,
        gas: *gas,
        scheme: scheme.clone(),
        characteristic: false,
        sponge: None,
    };
    let base = BaseState::new(base.clone(), scheme)?;
    let mut y = op.flux_terms(w, &base)?;
    for (v, gv) in y.p_star_mut().iter_mut().zip(g.values()) {
        *v -= gv;
    }
    Ok(op.apply_a_tilde(&y, &base))
}
