//! Pressure-mismatch objective, its adjoint forcing and space-time forcing
//! terms.

use crate::blob::SparseBlob;
use crate::error::{Error, Result};
use crate::field::{Packed, ScalarField, StateField};
use crate::forward::{MicrophoneArray, MonopoleSource, Recording, SourceSet};
use crate::grid::Grid;
use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

/// Target traces at microphones and the weight that selects them.
///
/// The weight is a sum of Gaussian blobs centred on the microphone nodes.
/// Mismatches are read at the microphone node and weighted by each blob's
/// node sum, so `J = ½ Σ_m Σ_n r_m(n)² · mass_m · ΔV · dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveSpec {
    grid: Grid,
    nodes: Vec<usize>,
    weights: Vec<SparseBlob>,
    targets: Vec<Vec<f64>>,
    window: Range<usize>,
    regularization: f64,
}

impl ObjectiveSpec {
    /// Weight blobs of half-width `2·Δx_min`, window covering all target
    /// samples.
    pub fn new(grid: &Grid, mics: &MicrophoneArray, targets: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_half_width(grid, mics, targets, 2.0 * grid.min_spacing())
    }

    pub fn with_half_width(grid: &Grid, mics: &MicrophoneArray, targets: Vec<Vec<f64>>, half_width: f64) -> Result<Self> {
        if targets.len() != mics.len() {
            return Err(Error::shape(format!(
                "{} target traces for {} microphones",
                targets.len(),
                mics.len()
            )));
        }
        let nodes = mics.snap(grid)?;
        let weights = nodes
            .iter()
            .map(|&i| SparseBlob::new(grid, &grid.position(i)[..grid.dim()], half_width))
            .collect::<Result<Vec<_>>>()?;
        let levels = targets.iter().map(Vec::len).max().unwrap_or(0);
        Ok(ObjectiveSpec {
            grid: *grid,
            nodes,
            weights,
            targets,
            window: 0..levels,
            regularization: 0.0,
        })
    }

    /// Restricts the evaluation to levels in `window`.
    pub fn with_window(mut self, window: Range<usize>) -> Result<Self> {
        if window.start >= window.end {
            return Err(Error::EmptyWindow);
        }
        self.window = window;
        Ok(self)
    }

    /// Adds `λ Σ s² dt` to the objective and `2λ s` to signal gradients.
    pub fn with_regularization(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::config("regularization weight must be >= 0"));
        }
        self.regularization = lambda;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mic_nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    /// Node sum of microphone `m`'s weight blob.
    pub fn sigma_mass(&self, m: usize) -> f64 {
        self.weights[m].mass()
    }

    /// The weight field `σ`.
    pub fn sigma(&self) -> ScalarField {
        let mut s = ScalarField::zeros(&self.grid);
        for w in &self.weights {
            w.scatter_add(s.values_mut(), 1.0);
        }
        s
    }

    fn target(&self, m: usize, n: usize) -> Result<f64> {
        self.targets[m]
            .get(n)
            .copied()
            .ok_or(Error::MissingTarget { mic: m, step: n })
    }

    /// `recording − target` per microphone and level, zero outside the
    /// window.
    pub fn residuals(&self, recording: &Recording) -> Result<Vec<Vec<f64>>> {
        if recording.mics() != self.nodes.len() {
            return Err(Error::shape(format!(
                "recording has {} microphones, objective {}",
                recording.mics(),
                self.nodes.len()
            )));
        }
        let levels = recording.levels();
        if self.window.end > levels {
            return Err(Error::shape(format!(
                "window ends at level {} but the recording has {levels} levels",
                self.window.end
            )));
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        for (m, rec) in recording.samples.iter().enumerate() {
            let mut r = alloc::vec![0.0; levels];
            for n in self.window.clone() {
                r[n] = rec[n] - self.target(m, n)?;
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Adjoint forcing built from the residual traces of `recording`.
    pub fn forcing(&self, recording: &Recording) -> Result<AdjointForcing> {
        let residuals = self.residuals(recording)?;
        Ok(self.forcing_from_residuals(residuals))
    }

    pub(crate) fn forcing_from_residuals(&self, residuals: Vec<Vec<f64>>) -> AdjointForcing {
        let terms = self
            .weights
            .iter()
            .zip(residuals)
            .map(|(w, r)| MonopoleSource::from_blob(w.clone(), r))
            .collect();
        AdjointForcing(SourceSet::new(terms))
    }

    /// `λ Σ_k Σ_n s_k(n)² dt`.
    pub fn regularization_term(&self, sources: &SourceSet, dt: f64) -> f64 {
        if self.regularization == 0.0 {
            return 0.0;
        }
        let sum: f64 = sources
            .fixed
            .iter()
            .map(|s| s.signal().iter().map(|v| v * v).sum::<f64>())
            .sum();
        self.regularization * sum * dt
    }
}

/// Pressure-row forcing `g(x, t) = Σ_k blob_k(x) · amplitude_k(t)` of the
/// adjoint equations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdjointForcing(pub SourceSet);

impl AdjointForcing {
    pub fn new(terms: Vec<MonopoleSource>) -> Self {
        AdjointForcing(SourceSet::new(terms))
    }

    pub fn is_empty(&self) -> bool {
        self.0.fixed.iter().all(|t| t.signal().iter().all(|v| *v == 0.0))
    }

    /// `out += scale · g(level)`.
    pub fn add_to(&self, grid: &Grid, level: f64, scale: f64, out: &mut [f64]) -> Result<()> {
        self.0.scatter(grid, level, scale, out)
    }

    /// Dense `g` at an integer level.
    pub fn field(&self, grid: &Grid, level: usize) -> Result<ScalarField> {
        let mut g = ScalarField::zeros(grid);
        self.add_to(grid, level as f64, 1.0, g.values_mut())?;
        Ok(g)
    }
}

/// `g_p = (p − p_ref − p_target)·σ` at `step`, from a state on the
/// objective's grid.
pub fn adjoint_forcing_g(state: &StateField, p_ref: f64, objective: &ObjectiveSpec, step: usize) -> Result<ScalarField> {
    if state.grid() != objective.grid() {
        return Err(Error::shape("state and objective on different grids"));
    }
    let mut g = ScalarField::zeros(objective.grid());
    if !objective.window.contains(&step) {
        return Ok(g);
    }
    let p = state.p();
    for (m, (&node, w)) in objective.nodes.iter().zip(&objective.weights).enumerate() {
        let r = p[node] - p_ref - objective.target(m, step)?;
        w.scatter_add(g.values_mut(), r);
    }
    Ok(g)
}

/// Data term `½ Σ_m Σ_n r_m(n)² · mass_m · ΔV · dt`.
pub fn evaluate_objective(recording: &Recording, objective: &ObjectiveSpec, grid: &Grid, dt: f64) -> Result<f64> {
    if grid != objective.grid() {
        return Err(Error::shape("objective defined on a different grid"));
    }
    let residuals = objective.residuals(recording)?;
    let mut total = 0.0;
    for (m, r) in residuals.iter().enumerate() {
        let sum: f64 = r.iter().map(|v| v * v).sum();
        total += sum * objective.sigma_mass(m);
    }
    Ok(0.5 * total * grid.cell_volume() * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GasModel};
    use alloc::vec;

    fn setup() -> (Grid, MicrophoneArray) {
        let g = build_grid(&[1.0, 1.0], &[33, 33]).unwrap();
        let mics = MicrophoneArray::new(vec![[0.5, 0.5, 0.0], [0.25, 0.75, 0.0]]);
        (g, mics)
    }

    fn recording(samples: Vec<Vec<f64>>) -> Recording {
        Recording {
            sample_rate: 1000.0,
            samples,
        }
    }

    #[test]
    fn perfect_match_is_zero() {
        let (g, mics) = setup();
        let t = vec![vec![1.0, 2.0, 3.0], vec![0.0, -1.0, 0.5]];
        let obj = ObjectiveSpec::new(&g, &mics, t.clone()).unwrap();
        assert_eq!(evaluate_objective(&recording(t.clone()), &obj, &g, 1e-3).unwrap(), 0.0);
        assert!(obj.forcing(&recording(t)).unwrap().is_empty());
    }

    #[test]
    fn single_term_and_quadratic_scaling() {
        let (g, mics) = setup();
        let obj = ObjectiveSpec::new(&g, &mics, vec![vec![0.0; 4]; 2]).unwrap();
        let mut rec = vec![vec![0.0; 4]; 2];
        rec[0][2] = 1.0;
        let dt = 1e-3;
        let j = evaluate_objective(&recording(rec.clone()), &obj, &g, dt).unwrap();
        assert_eq!(j, 0.5 * obj.sigma_mass(0) * g.cell_volume() * dt);
        rec[0][2] = 2.0;
        rec[1][1] = 0.7;
        let j1 = evaluate_objective(&recording(rec.clone()), &obj, &g, dt).unwrap();
        rec[0][2] = 4.0;
        rec[1][1] = 1.4;
        let j2 = evaluate_objective(&recording(rec), &obj, &g, dt).unwrap();
        assert_eq!(j2, 4.0 * j1);
    }

    #[test]
    fn forcing_is_scaled_blob() {
        let (g, mics) = setup();
        let gas = GasModel::air();
        let obj = ObjectiveSpec::new(&g, &mics, vec![vec![0.0; 3]; 2]).unwrap();
        let mut q = StateField::quiescent(&g, &gas);
        let node = obj.mic_nodes()[0];
        q.p_mut()[node] += 1.0;
        let f = adjoint_forcing_g(&q, gas.p_ref, &obj, 1).unwrap();
        let blob = obj.weights[0].to_field(&g);
        for (a, b) in f.values().iter().zip(blob.values()) {
            assert_eq!(*a, *b);
        }
        let sigma = obj.sigma();
        for (v, s) in f.values().iter().zip(sigma.values()) {
            if *s == 0.0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(sigma.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn missing_target_and_window() {
        let (g, mics) = setup();
        let obj = ObjectiveSpec::new(&g, &mics, vec![vec![0.0; 3], vec![0.0; 2]]).unwrap();
        let rec = recording(vec![vec![1.0; 3]; 2]);
        assert_eq!(obj.residuals(&rec).unwrap_err(), Error::MissingTarget { mic: 1, step: 2 });
        let obj = obj.with_window(0..2).unwrap();
        let r = obj.residuals(&rec).unwrap();
        assert_eq!(r[0], vec![1.0, 1.0, 0.0]);
        assert!(obj.clone().with_window(2..2).is_err());
    }
}
