//! Classical four-stage Runge-Kutta.

use crate::error::{Error, Result};
use crate::field::Packed;
use alloc::format;
use alloc::vec::Vec;

/// A state vector the integrator can combine linearly.
pub trait OdeState: Clone {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    /// Name of the component holding flat index `i`.
    fn name_of(&self, i: usize) -> &'static str;
}

impl<T: Packed> OdeState for T {
    fn values(&self) -> &[f64] {
        self.data()
    }
    fn values_mut(&mut self) -> &mut [f64] {
        self.data_mut()
    }
    fn name_of(&self, i: usize) -> &'static str {
        self.component_name(i / self.grid().len())
    }
}

impl OdeState for Vec<f64> {
    fn values(&self) -> &[f64] {
        self
    }
    fn values_mut(&mut self) -> &mut [f64] {
        self
    }
    fn name_of(&self, _: usize) -> &'static str {
        "y"
    }
}

fn check_stage<S: OdeState>(rate: &S) -> Result<()> {
    match rate.values().iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::NonFinite {
            step: 0,
            field: rate.name_of(i),
        }),
    }
}

fn combine<S: OdeState>(base: &S, a: f64, k: &S) -> S {
    let mut out = base.clone();
    for (o, v) in out.values_mut().iter_mut().zip(k.values()) {
        *o += a * v;
    }
    out
}

/// One step of signed length `dt`; negative `dt` integrates backwards.
///
/// Stage times are `t`, `t + dt/2` (twice) and `t + dt`.
pub(crate) fn rk4_step<S, F>(state: &S, t: f64, dt: f64, mut rhs: F) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S, f64) -> Result<S>,
{
    let half = 0.5 * dt;
    let k1 = rhs(state, t)?;
    check_stage(&k1)?;
    let k2 = rhs(&combine(state, half, &k1), t + half)?;
    check_stage(&k2)?;
    let k3 = rhs(&combine(state, half, &k2), t + half)?;
    check_stage(&k3)?;
    let k4 = rhs(&combine(state, dt, &k3), t + dt)?;
    check_stage(&k4)?;
    let mut out = state.clone();
    let w = dt / 6.0;
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        *o += w * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
    }
    Ok(out)
}

/// Advances `state` from `t` to `t + dt`.
///
/// A non-finite stage rate aborts with [`Error::NonFinite`] naming the
/// component; callers attach the step index with [`Error::at_step`].
pub fn rk4_advance<S, F>(state: &S, t: f64, dt: f64, rhs: F) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S, f64) -> Result<S>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config(format!("time step must be > 0, got {dt}")));
    }
    rk4_step(state, t, dt, rhs)
}
