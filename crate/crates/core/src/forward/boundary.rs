//! Pointwise per-axis rate contributions, interior and characteristic.
//!
//! Both forms consume the same derivatives along one axis: of the mass flux
//! `ρu_a`, the momentum fluxes `ρu_a u_j + p δ_aj`, the enthalpy flux
//! `γ/(γ−1)·u_a p`, and of `p` itself.

use crate::dual::Real;

/// Face of an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    Min,
    Max,
}

impl Face {
    /// Face holding coordinate `i` of a line of `n` nodes.
    #[inline]
    pub fn of(i: usize, n: usize) -> Option<Face> {
        if i == 0 {
            Some(Face::Min)
        } else if i + 1 == n {
            Some(Face::Max)
        } else {
            None
        }
    }

    /// Outward normal sign.
    #[inline]
    pub fn outward(self) -> f64 {
        match self {
            Face::Min => -1.0,
            Face::Max => 1.0,
        }
    }
}

/// Primitive variables at one node; unused velocity slots are zero.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Prim<T> {
    pub rho: T,
    pub u: [T; 3],
    pub p: T,
}

/// Flux derivatives along one axis at one node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FluxDerivs<T> {
    pub mass: T,
    pub mom: [T; 3],
    pub enthalpy: T,
    pub p: T,
}

/// Rates in storage order `[ρ, u_1.., p]`, padded to five entries.
pub(crate) type Rates<T> = [T; 5];

/// Axis contribution of the conservative interior discretization.
#[inline]
pub(crate) fn interior_rates<T: Real>(q: &Prim<T>, d: &FluxDerivs<T>, axis: usize, dim: usize, gamma: f64) -> Rates<T> {
    let z = T::cst(0.0);
    let mut r = [z; 5];
    r[0] = -d.mass;
    for j in 0..dim {
        r[1 + j] = (q.u[j] * d.mass - d.mom[j]) / q.rho;
    }
    r[dim + 1] = T::cst(gamma - 1.0) * (q.u[axis] * d.p - d.enthalpy);
    r
}

/// Axis contribution with incoming wave amplitudes removed.
///
/// Waves are classified by the sign of their speed relative to the outward
/// normal; entropy and shear waves follow the normal velocity.
#[inline]
pub(crate) fn characteristic_rates<T: Real>(
    q: &Prim<T>,
    d: &FluxDerivs<T>,
    axis: usize,
    dim: usize,
    gamma: f64,
    face: Face,
) -> Rates<T> {
    let z = T::cst(0.0);
    let half = T::cst(0.5);
    let un = q.u[axis];
    let c2 = T::cst(gamma) * q.p / q.rho;
    let c = c2.sqrt();
    let rc = q.rho * c;
    let du = (T::cst((gamma - 1.0) / gamma) * d.enthalpy - un * d.p) / q.p;

    let mut l1 = (un - c) * (d.p - rc * du);
    let mut l5 = (un + c) * (d.p + rc * du);
    let mut l2 = c2 * (d.mass - q.rho * du) - un * d.p;
    let mut l3 = [z; 3];
    for j in (0..dim).filter(|&j| j != axis) {
        l3[j] = (d.mom[j] - q.u[j] * d.mass) / q.rho;
    }
    let convected_in = match face {
        Face::Min => {
            l5 = z;
            un.value() > 0.0
        }
        Face::Max => {
            l1 = z;
            un.value() < 0.0
        }
    };
    if convected_in {
        l2 = z;
        l3 = [z; 3];
    }

    let mut r = [z; 5];
    r[0] = -(l2 + half * (l5 + l1)) / c2;
    for j in 0..dim {
        r[1 + j] = if j == axis { -(l5 - l1) / (T::cst(2.0) * rc) } else { -l3[j] };
    }
    r[dim + 1] = -half * (l5 + l1);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GasModel;

    fn flux_derivs(q: &Prim<f64>, dq: &Prim<f64>, axis: usize, dim: usize, gamma: f64) -> FluxDerivs<f64> {
        // Product rule applied to the flux definitions.
        let un = q.u[axis];
        let dun = dq.u[axis];
        let mass = un * dq.rho + q.rho * dun;
        let mut mom = [0.0; 3];
        for j in 0..dim {
            mom[j] = mass * q.u[j] + q.rho * un * dq.u[j] + if j == axis { dq.p } else { 0.0 };
        }
        let enthalpy = gamma / (gamma - 1.0) * (dun * q.p + un * dq.p);
        FluxDerivs {
            mass,
            mom,
            enthalpy,
            p: dq.p,
        }
    }

    #[test]
    fn all_waves_kept_reproduces_interior() {
        let gas = GasModel::air();
        let q = Prim {
            rho: 1.1,
            u: [12.0, 7.0, 3.0],
            p: 0.97 * gas.p_ref,
        };
        let dq = Prim {
            rho: 0.3,
            u: [5.0, 2.0, -1.5],
            p: 4.0e3,
        };
        for axis in 0..3 {
            let d = flux_derivs(&q, &dq, axis, 3, gas.gamma);
            let a = interior_rates(&q, &d, axis, 3, gas.gamma);
            // With u_a > 0 the max face removes only L1; adding it back must
            // give the interior rates.
            let c = (gas.gamma * q.p / q.rho).sqrt();
            let du = dq.u[axis];
            let l1 = (q.u[axis] - c) * (dq.p - q.rho * c * du);
            let b = characteristic_rates(&q, &d, axis, 3, gas.gamma, Face::Max);
            let mut restored = b;
            restored[0] += -0.5 * l1 / (c * c);
            restored[1 + axis] += l1 / (2.0 * q.rho * c);
            restored[4] += -0.5 * l1;
            for k in 0..5 {
                assert!(
                    (restored[k] - a[k]).abs() <= 1e-9 * a[k].abs().max(1.0),
                    "axis {axis} comp {k}: {} vs {}",
                    restored[k],
                    a[k]
                );
            }
        }
    }

    #[test]
    fn pure_incoming_wave_gives_zero_rate() {
        let gas = GasModel::air();
        let q = Prim {
            rho: gas.rho_ref,
            u: [0.0; 3],
            p: gas.p_ref,
        };
        let c = gas.sound_speed();
        // Right-running acoustic wave: dp = ρc·du; entering through x_min.
        let dp = 250.0;
        let dq = Prim {
            rho: dp / (c * c),
            u: [dp / (q.rho * c), 0.0, 0.0],
            p: dp,
        };
        let d = flux_derivs(&q, &dq, 0, 2, gas.gamma);
        let r = characteristic_rates(&q, &d, 0, 2, gas.gamma, Face::Min);
        for v in &r[..4] {
            assert!(v.abs() < 1e-10, "{r:?}");
        }
        // The same wave leaves through x_max untouched.
        let out = characteristic_rates(&q, &d, 0, 2, gas.gamma, Face::Max);
        let inner = interior_rates(&q, &d, 0, 2, gas.gamma);
        for k in 0..4 {
            assert!((out[k] - inner[k]).abs() < 1e-9 * inner[k].abs().max(1.0));
        }
    }
}
