//! Pointwise linearization of the pressure-form Euler system.
//!
//! The linearized system reads
//! `∂t(A δq) + ∂_i(B_i δq) + C_i ∂_i δq + δC_i ∂_i p = δs`
//! with `δq = [δρ, δu_1.., δp]`. Matrices are stored in the storage order
//! of the state, so 2D uses the leading 4×4 block with `p` in slot 3.

use crate::error::{Error, Result};
use crate::grid::GasModel;

/// Square matrix padded to the 3D size.
pub type Mat5 = [[f64; 5]; 5];

/// `A`, `B_i` and `C_i` at one base state.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationMatrices {
    dim: usize,
    gamma: f64,
    rho: f64,
    u: [f64; 3],
    p: f64,
    pub a: Mat5,
    pub b: [Mat5; 3],
    /// The only nonzero entry of `C_i`, in the `(p, p)` slot.
    pub c: [f64; 3],
}

/// Builds the matrices for base state `(rho, u, p)`; unused velocity slots
/// must be zero.
pub fn assemble_matrices(dim: usize, rho: f64, u: [f64; 3], p: f64, gas: &GasModel) -> Result<LinearizationMatrices> {
    if !(rho > 0.0) {
        return Err(Error::NotAdmissible {
            step: 0,
            field: "rho",
            node: 0,
            value: rho,
        });
    }
    if !(2..=3).contains(&dim) {
        return Err(Error::config("linearization is defined for 2D and 3D"));
    }
    let g = gas.gamma;
    let ip = dim + 1;
    let mut a = [[0.0; 5]; 5];
    a[0][0] = 1.0;
    for j in 0..dim {
        a[1 + j][0] = u[j];
        a[1 + j][1 + j] = rho;
    }
    a[ip][ip] = 1.0 / (g - 1.0);

    let mut b = [[[0.0; 5]; 5]; 3];
    let mut c = [0.0; 3];
    for (axis, m) in b.iter_mut().enumerate().take(dim) {
        let ua = u[axis];
        m[0][0] = ua;
        m[0][1 + axis] = rho;
        for j in 0..dim {
            let row = &mut m[1 + j];
            row[0] = ua * u[j];
            row[1 + j] += rho * ua;
            row[1 + axis] += rho * u[j];
        }
        m[1 + axis][ip] = 1.0;
        m[ip][1 + axis] = g * p / (g - 1.0);
        m[ip][ip] = g * ua / (g - 1.0);
        c[axis] = -ua;
    }
    Ok(LinearizationMatrices {
        dim,
        gamma: g,
        rho,
        u,
        p,
        a,
        b,
        c,
    })
}

impl LinearizationMatrices {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rows and columns in use.
    pub fn size(&self) -> usize {
        self.dim + 2
    }

    /// `det A = ρ^dim / (γ − 1)`.
    pub fn det_a(&self) -> f64 {
        crate::math::powi(self.rho, self.dim as i32) / (self.gamma - 1.0)
    }

    /// `(Aᵀ)⁻¹ y` in closed form.
    #[inline]
    pub fn a_tilde_mul(&self, y: &[f64; 5]) -> [f64; 5] {
        a_tilde_mul(self.dim, self.rho, &self.u, self.gamma, y)
    }

    /// `(Aᵀ)⁻¹` as a matrix.
    pub fn a_tilde(&self) -> Mat5 {
        let mut m = [[0.0; 5]; 5];
        for col in 0..self.size() {
            let mut e = [0.0; 5];
            e[col] = 1.0;
            let x = self.a_tilde_mul(&e);
            for (row, v) in x.iter().enumerate() {
                m[row][col] = *v;
            }
        }
        m
    }

    /// `B_axisᵀ w`.
    #[inline]
    pub fn bt_mul(&self, axis: usize, w: &[f64; 5]) -> [f64; 5] {
        bt_mul(self.dim, self.rho, &self.u, self.p, self.gamma, axis, w)
    }

    /// `B_axis v`.
    pub fn b_mul(&self, axis: usize, v: &[f64; 5]) -> [f64; 5] {
        let n = self.size();
        let mut out = [0.0; 5];
        for (r, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|k| self.b[axis][r][k] * v[k]).sum();
        }
        out
    }

    /// `δC_axis ∂_axis p` acting on `δq`: only the pressure row,
    /// `−δu_axis ∂_axis p`.
    pub fn delta_c_term(&self, axis: usize, dq: &[f64; 5], dp_axis: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        out[self.dim + 1] = -dq[1 + axis] * dp_axis;
        out
    }

    /// Adjoint resorting of the `δC` term: `−p* ∂_axis p` in the `u_axis`
    /// row.
    pub fn resorting(&self, axis: usize, p_star: f64, dp_axis: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        out[1 + axis] = -p_star * dp_axis;
        out
    }
}

#[inline]
pub(crate) fn a_tilde_mul(dim: usize, rho: f64, u: &[f64; 3], gamma: f64, y: &[f64; 5]) -> [f64; 5] {
    let mut x = [0.0; 5];
    let inv = 1.0 / rho;
    let mut acc = y[0];
    for j in 0..dim {
        x[1 + j] = y[1 + j] * inv;
        acc -= u[j] * x[1 + j];
    }
    x[0] = acc;
    x[dim + 1] = (gamma - 1.0) * y[dim + 1];
    x
}

#[inline]
pub(crate) fn bt_mul(dim: usize, rho: f64, u: &[f64; 3], p: f64, gamma: f64, axis: usize, w: &[f64; 5]) -> [f64; 5] {
    let ip = dim + 1;
    let ua = u[axis];
    let mut uw = 0.0;
    for j in 0..dim {
        uw += u[j] * w[1 + j];
    }
    let mut out = [0.0; 5];
    out[0] = ua * w[0] + ua * uw;
    for k in 0..dim {
        out[1 + k] = rho * ua * w[1 + k];
    }
    out[1 + axis] += rho * w[0] + rho * uw + gamma * p / (gamma - 1.0) * w[ip];
    out[ip] = w[1 + axis] + gamma * ua / (gamma - 1.0) * w[ip];
    out
}
