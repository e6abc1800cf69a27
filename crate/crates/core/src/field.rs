//! Field containers and the discrete space-time inner product.

use crate::error::{Error, Result};
use crate::grid::{GasModel, Grid};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// One real value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::shape(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    /// Samples `f` at every node position.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of values times the cell volume.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn check_finite(&self, step: usize, name: &'static str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { step, field: name })
        }
    }
}

/// Fields stored as one contiguous buffer of equally sized components.
///
/// Lets the time integrator and filters treat flow and adjoint states
/// uniformly.
pub trait Packed: Clone + Send + Sync {
    fn grid(&self) -> &Grid;
    fn data(&self) -> &[f64];
    fn data_mut(&mut self) -> &mut [f64];
    fn component_name(&self, c: usize) -> &'static str;

    fn num_components(&self) -> usize {
        self.grid().dim() + 2
    }

    fn component(&self, c: usize) -> &[f64] {
        let n = self.grid().len();
        &self.data()[c * n..(c + 1) * n]
    }

    fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid().len();
        &mut self.data_mut()[c * n..(c + 1) * n]
    }

    /// Same shape, all zeros.
    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.data_mut().iter_mut().for_each(|v| *v = 0.0);
        z
    }

    /// `self += a * other`
    fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.data_mut().iter_mut().zip(other.data()) {
            *s += a * o;
        }
    }

    fn scale(&mut self, a: f64) {
        self.data_mut().iter_mut().for_each(|v| *v *= a);
    }

    /// Errors with the offending component name when any value is NaN/Inf.
    fn check_finite(&self, step: usize) -> Result<()> {
        for c in 0..self.num_components() {
            if !self.component(c).iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    step,
                    field: self.component_name(c),
                });
            }
        }
        Ok(())
    }
}

const NAMES_2D: [&str; 4] = ["rho", "u1", "u2", "p"];
const NAMES_3D: [&str; 5] = ["rho", "u1", "u2", "u3", "p"];
const ADJ_NAMES_2D: [&str; 4] = ["adj_rho", "adj_u1", "adj_u2", "adj_p"];
const ADJ_NAMES_3D: [&str; 5] = ["adj_rho", "adj_u1", "adj_u2", "adj_u3", "adj_p"];

macro_rules! packed_field {
    ($name:ident, $names2:ident, $names3:ident) => {
        impl $name {
            pub fn zeros(grid: &Grid) -> Self {
                $name {
                    grid: *grid,
                    data: vec![0.0; grid.len() * (grid.dim() + 2)],
                }
            }

            pub fn from_data(grid: &Grid, data: Vec<f64>) -> Result<Self> {
                if data.len() != grid.len() * (grid.dim() + 2) {
                    return Err(Error::shape(format!(
                        "{} values for {} components of {} nodes",
                        data.len(),
                        grid.dim() + 2,
                        grid.len()
                    )));
                }
                Ok($name { grid: *grid, data })
            }

            /// Component names in storage order.
            pub fn names(&self) -> &'static [&'static str] {
                if self.grid.dim() == 2 {
                    &$names2
                } else {
                    &$names3
                }
            }

            /// Component buffers as separate mutable slices.
            pub fn components_mut(&mut self) -> Vec<&mut [f64]> {
                let n = self.grid.len();
                self.data.chunks_mut(n).collect()
            }

            pub fn components(&self) -> Vec<&[f64]> {
                let n = self.grid.len();
                self.data.chunks(n).collect()
            }

            pub fn into_data(self) -> Vec<f64> {
                self.data
            }

            pub fn to_scalar(&self, c: usize) -> ScalarField {
                ScalarField {
                    grid: self.grid,
                    values: self.component(c).to_vec(),
                }
            }
        }

        impl Packed for $name {
            fn grid(&self) -> &Grid {
                &self.grid
            }
            fn data(&self) -> &[f64] {
                &self.data
            }
            fn data_mut(&mut self) -> &mut [f64] {
                &mut self.data
            }
            fn component_name(&self, c: usize) -> &'static str {
                self.names()[c]
            }
        }
    };
}

/// Flow state `[rho, u_1 .. u_dim, p]` at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    grid: Grid,
    data: Vec<f64>,
}

packed_field!(StateField, NAMES_2D, NAMES_3D);

impl StateField {
    /// Uniform medium at rest.
    pub fn quiescent(grid: &Grid, gas: &GasModel) -> Self {
        let mut s = StateField::zeros(grid);
        s.rho_mut().iter_mut().for_each(|v| *v = gas.rho_ref);
        s.p_mut().iter_mut().for_each(|v| *v = gas.p_ref);
        s
    }

    pub fn rho(&self) -> &[f64] {
        self.component(0)
    }
    pub fn rho_mut(&mut self) -> &mut [f64] {
        self.component_mut(0)
    }
    pub fn u(&self, axis: usize) -> &[f64] {
        self.component(1 + axis)
    }
    pub fn u_mut(&mut self, axis: usize) -> &mut [f64] {
        self.component_mut(1 + axis)
    }
    pub fn p(&self) -> &[f64] {
        self.component(self.grid.dim() + 1)
    }
    pub fn p_mut(&mut self) -> &mut [f64] {
        let d = self.grid.dim();
        self.component_mut(d + 1)
    }

    /// Density and pressure must stay positive and every value finite.
    pub fn check_admissible(&self, step: usize) -> Result<()> {
        self.check_finite(step)?;
        let d = self.grid.dim();
        for (c, name) in [(0usize, "rho"), (d + 1, "p")] {
            if let Some((node, &v)) = self
                .component(c)
                .iter()
                .enumerate()
                .find(|(_, v)| !(**v > 0.0))
            {
                return Err(Error::NotAdmissible {
                    step,
                    field: name,
                    node,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// Adjoint state `[rho*, u*_1 .. u*_dim, p*]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointStateField {
    grid: Grid,
    data: Vec<f64>,
}

packed_field!(AdjointStateField, ADJ_NAMES_2D, ADJ_NAMES_3D);

impl AdjointStateField {
    pub fn rho_star(&self) -> &[f64] {
        self.component(0)
    }
    pub fn u_star(&self, axis: usize) -> &[f64] {
        self.component(1 + axis)
    }
    pub fn p_star(&self) -> &[f64] {
        self.component(self.grid.dim() + 1)
    }
    pub fn p_star_mut(&mut self) -> &mut [f64] {
        let d = self.grid.dim();
        self.component_mut(d + 1)
    }
}

/// Discrete `∬ a·b dx dt` over nodes and time levels.
///
/// Each level is summed over nodes in storage order, then levels are summed
/// in time order, so the result is reproducible bit for bit.
pub fn inner_product<A, B>(a: &[A], b: &[B], grid: &Grid, dt: f64) -> Result<f64>
where
    A: AsRef<[f64]>,
    B: AsRef<[f64]>,
{
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "{} vs {} time levels",
            a.len(),
            b.len()
        )));
    }
    let mut total = 0.0;
    for (n, (x, y)) in a.iter().zip(b).enumerate() {
        let (x, y) = (x.as_ref(), y.as_ref());
        if x.len() != y.len() || x.len() % grid.len() != 0 {
            return Err(Error::shape(format!(
                "level {n}: {} vs {} values on {} nodes",
                x.len(),
                y.len(),
                grid.len()
            )));
        }
        let level: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        total += level;
    }
    Ok(total * grid.cell_volume() * dt)
}

impl AsRef<[f64]> for ScalarField {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for StateField {
    fn as_ref(&self) -> &[f64] {
        &self.data
    }
}

impl AsRef<[f64]> for AdjointStateField {
    fn as_ref(&self) -> &[f64] {
        &self.data
    }
}
