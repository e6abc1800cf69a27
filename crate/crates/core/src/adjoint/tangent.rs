//! Tangent-linear forward operator, used to verify the adjoint.
//!
//! The rate is the exact directional derivative of the discrete forward
//! right-hand side, including characteristic faces and sponge, obtained by
//! evaluating the pointwise formulas on dual numbers.

use crate::dual::{Dual, Real};
use crate::error::{Error, Result};
use crate::field::{Packed, StateField};
use crate::forward::boundary::{characteristic_rates, interior_rates, FluxDerivs, Prim};
use crate::forward::rhs::for_each_node;
use crate::forward::solver::{filter_state, stage_level};
use crate::forward::{ForwardOperator, ForwardSolver, SourceSet};
use crate::numerics::rk4_step;
use crate::trajectory::Trajectory;
use alloc::vec;
use alloc::vec::Vec;

#[inline]
fn dual_prim(base: &[&[f64]], dq: &[&[f64]], dim: usize, node: usize) -> Prim<Dual> {
    let mut u = [Dual::cst(0.0); 3];
    for j in 0..dim {
        u[j] = Dual::new(base[1 + j][node], dq[1 + j][node]);
    }
    Prim {
        rho: Dual::new(base[0][node], dq[0][node]),
        u,
        p: Dual::new(base[dim + 1][node], dq[dim + 1][node]),
    }
}

/// Fluxes `[mass, mom.., enthalpy, p]` along `axis`, padded to six slots.
#[inline]
fn fluxes<T: Real>(q: &Prim<T>, axis: usize, dim: usize, gamma: f64) -> [T; 6] {
    let z = T::cst(0.0);
    let mut f = [z; 6];
    let un = q.u[axis];
    let mass = q.rho * un;
    f[0] = mass;
    for j in 0..dim {
        f[1 + j] = mass * q.u[j];
    }
    f[1 + axis] = f[1 + axis] + q.p;
    f[dim + 1] = T::cst(gamma / (gamma - 1.0)) * un * q.p;
    f[dim + 2] = q.p;
    f
}

/// `δq̇` for perturbation `dq` about `base` with perturbed sources `ds`.
pub fn tangent_linear_rhs(dq: &StateField, base: &StateField, ds: &SourceSet, level: f64, op: &ForwardOperator) -> Result<StateField> {
    let g = *op.grid();
    if dq.grid() != &g || base.grid() != &g {
        return Err(Error::shape("perturbation, base state and operator grids differ"));
    }
    let dim = g.dim();
    let gamma = op.gas().gamma;
    let bc = base.components();
    let dc = dq.components();
    let nf = dim + 3;
    let mut rate = StateField::zeros(&g);
    for axis in 0..dim {
        let mut re = vec![vec![0.0; g.len()]; nf];
        let mut du = vec![vec![0.0; g.len()]; nf];
        for node in 0..g.len() {
            let f = fluxes(&dual_prim(&bc, &dc, dim, node), axis, dim, gamma);
            for k in 0..nf {
                re[k][node] = f[k].re;
                du[k][node] = f[k].du;
            }
        }
        let d_re = re.iter().map(|v| op.scheme().d1(&g, axis, v)).collect::<Result<Vec<_>>>()?;
        let d_du = du.iter().map(|v| op.scheme().d1(&g, axis, v)).collect::<Result<Vec<_>>>()?;
        let characteristic = op.characteristic();
        for_each_node(&g, axis, rate.components_mut(), |node, local, face, out| {
            let at = |k: usize| Dual::new(d_re[k][node], d_du[k][node]);
            let mut mom = [Dual::cst(0.0); 3];
            for (j, m) in mom.iter_mut().enumerate().take(dim) {
                *m = at(1 + j);
            }
            let d = FluxDerivs {
                mass: at(0),
                mom,
                enthalpy: at(dim + 1),
                p: at(dim + 2),
            };
            let q = dual_prim(&bc, &dc, dim, node);
            let r = match face {
                Some(f) if characteristic => characteristic_rates(&q, &d, axis, dim, gamma, f),
                _ => interior_rates(&q, &d, axis, dim, gamma),
            };
            for (c, o) in out.iter_mut().enumerate() {
                o[local] += r[c].du;
            }
        });
    }
    ds.scatter(&g, level, gamma - 1.0, rate.p_mut())?;
    if let Some(s) = op.sponge() {
        s.relax(&mut rate, dq, None, -1.0);
    }
    Ok(rate)
}

/// Integrates the tangent-linear system from `δq = 0` with the forward
/// solver's time step and filter.
///
/// `base` supplies the linearization state per level (recomputed from its
/// checkpoints through `solver` when needed); `None` linearizes about the
/// quiescent medium. Half levels use the mean of neighbouring levels.
pub fn run_tangent<F>(solver: &ForwardSolver, mut base: Option<&mut Trajectory>, ds: &SourceSet, mut visitor: F) -> Result<()>
where
    F: FnMut(usize, &StateField) -> Result<()>,
{
    let cfg = solver.config();
    let op = solver.operator();
    let dt = cfg.dt;
    let mut level_state = |n: usize| -> Result<StateField> {
        match base.as_deref_mut() {
            Some(t) => Ok(t.state(n, solver)?.clone()),
            None => Ok(op.reference().clone()),
        }
    };
    let mut dq = StateField::zeros(&cfg.grid);
    visitor(0, &dq)?;
    let mut lo = level_state(0)?;
    for n in 0..cfg.steps {
        let hi = level_state(n + 1)?;
        let mut mid = lo.clone();
        for (m, h) in mid.data_mut().iter_mut().zip(hi.data()) {
            *m = 0.5 * (*m + *h);
        }
        dq = rk4_step(&dq, n as f64 * dt, dt, |s, t| {
            let level = stage_level(t, dt);
            let b = if level <= n as f64 {
                &lo
            } else if level >= (n + 1) as f64 {
                &hi
            } else {
                &mid
            };
            tangent_linear_rhs(s, b, ds, level, op)
        })
        .map_err(|e| e.at_step(n + 1))?;
        if let Some(f) = solver.filter() {
            filter_state(f, &mut dq, None)?;
        }
        dq.check_finite(n + 1)?;
        visitor(n + 1, &dq)?;
        lo = hi;
    }
    Ok(())
}
