//! Backward adjoint sweep and source-signal gradients.

use super::objective::{AdjointForcing, ObjectiveSpec};
use super::rhs::{AdjointOperator, BaseState};
use crate::error::{Error, Result};
use crate::field::{AdjointStateField, Packed, StateField};
use crate::forward::solver::{filter_state, stage_level};
use crate::forward::{ForwardRun, ForwardSolver, MonopoleSource, SolverConfig, SourceSet};
use crate::grid::Grid;
use crate::numerics::{rk4_step, CompactFilter};
use crate::trajectory::{Replay, Trajectory};
use alloc::format;
use alloc::vec::Vec;

/// Integrates the adjoint system backward from `q*(t_N) = 0` with the same
/// step, boundaries, sponge and filter as a forward solver.
#[derive(Clone, Debug)]
pub struct AdjointSolver {
    grid: Grid,
    dt: f64,
    steps: usize,
    op: AdjointOperator,
    filter: Option<CompactFilter>,
}

impl AdjointSolver {
    pub fn from_forward(solver: &ForwardSolver) -> Self {
        let cfg = solver.config();
        AdjointSolver {
            grid: cfg.grid,
            dt: cfg.dt,
            steps: cfg.steps,
            op: AdjointOperator::from_forward(solver.operator()),
            filter: solver.filter().cloned(),
        }
    }

    /// Solver for `cfg` without a forward run.
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        Ok(Self::from_forward(&ForwardSolver::new(cfg, &SourceSet::default())?))
    }

    pub fn operator(&self) -> &AdjointOperator {
        &self.op
    }

    /// Runs the sweep, calling `visitor(n, q*)` for `n = N, N−1, .., 0`.
    ///
    /// Base states come from `trajectory`, recomputed through `replay`
    /// where only checkpoints are stored; half levels use the mean of the
    /// neighbouring levels.
    pub fn run<F>(&self, trajectory: &mut Trajectory, replay: &dyn Replay, forcing: &AdjointForcing, visitor: F) -> Result<()>
    where
        F: FnMut(usize, &AdjointStateField) -> Result<()>,
    {
        if trajectory.grid() != &self.grid || trajectory.steps() != self.steps {
            return Err(Error::shape(format!(
                "trajectory of {} steps on a different grid or step count than the adjoint ({} steps)",
                trajectory.steps(),
                self.steps
            )));
        }
        if !trajectory.is_complete() {
            return Err(Error::TimeLevel {
                requested: self.steps,
                available: trajectory.len(),
            });
        }
        self.sweep(|n| self.op.base(trajectory.state(n, replay)?.clone()), forcing, visitor)
    }

    /// Sweep about the quiescent medium, as for a first gradient from
    /// silent sources; no forward trajectory is needed.
    pub fn run_quiescent<F>(&self, forcing: &AdjointForcing, visitor: F) -> Result<()>
    where
        F: FnMut(usize, &AdjointStateField) -> Result<()>,
    {
        let base = self.op.base(StateField::quiescent(&self.grid, self.op.gas()))?;
        self.sweep(|_| Ok(base.clone()), forcing, visitor)
    }

    fn sweep<B, F>(&self, mut base_at: B, forcing: &AdjointForcing, mut visitor: F) -> Result<()>
    where
        B: FnMut(usize) -> Result<BaseState>,
        F: FnMut(usize, &AdjointStateField) -> Result<()>,
    {
        let dt = self.dt;
        let mut w = AdjointStateField::zeros(&self.grid);
        visitor(self.steps, &w)?;
        let mut hi = base_at(self.steps)?;
        for n in (0..self.steps).rev() {
            let lo = base_at(n)?;
            let mid = BaseState::midpoint(&lo, &hi);
            w = rk4_step(&w, (n + 1) as f64 * dt, -dt, |s, t| {
                let level = stage_level(t, dt);
                let b = if level <= n as f64 {
                    &lo
                } else if level >= (n + 1) as f64 {
                    &hi
                } else {
                    &mid
                };
                self.op.rate(s, b, forcing, level)
            })
            .map_err(|e| e.at_step(n))?;
            if let Some(f) = &self.filter {
                filter_state(f, &mut w, None)?;
            }
            w.check_finite(n)?;
            visitor(n, &w)?;
            hi = lo;
        }
        Ok(())
    }
}

/// Adjoint pressure `p*` at every level.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointTrajectory {
    grid: Grid,
    dt: f64,
    p_star: Vec<Vec<f64>>,
}

impl AdjointTrajectory {
    pub fn new(grid: &Grid, dt: f64, p_star: Vec<Vec<f64>>) -> Result<Self> {
        if p_star.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::shape("adjoint level with wrong node count"));
        }
        Ok(AdjointTrajectory {
            grid: *grid,
            dt,
            p_star,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.p_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_star.is_empty()
    }

    pub fn p_star(&self, n: usize) -> &[f64] {
        &self.p_star[n]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.p_star
    }
}

/// Backward sweep for the mismatch of `forward`'s recording against
/// `objective`, keeping `p*` at every level.
pub fn run_adjoint(forward: &mut ForwardRun, objective: &ObjectiveSpec) -> Result<AdjointTrajectory> {
    let forcing = objective.forcing(&forward.recording)?;
    run_adjoint_forced(forward, &forcing)
}

/// Backward sweep for an arbitrary pressure-row forcing.
pub fn run_adjoint_forced(forward: &mut ForwardRun, forcing: &AdjointForcing) -> Result<AdjointTrajectory> {
    let solver = AdjointSolver::from_forward(&forward.solver);
    let levels = forward.trajectory.len();
    let mut p_star = alloc::vec![Vec::new(); levels];
    solver.run(&mut forward.trajectory, &forward.solver, forcing, |n, w| {
        p_star[n] = w.p_star().to_vec();
        Ok(())
    })?;
    AdjointTrajectory::new(&forward.solver.config().grid, forward.solver.config().dt, p_star)
}

/// `grad(n) = Σ_x p*(x, t_n) · blob(x) · ΔV`; `grad(n)·dt` approximates
/// `∂J/∂s(n)`.
pub fn gradient_wrt_source_signal(adjoint: &AdjointTrajectory, source: &MonopoleSource) -> Vec<f64> {
    let v = adjoint.grid.cell_volume();
    adjoint.p_star.iter().map(|p| source.blob().project(p) * v).collect()
}

/// Streaming gradient accumulation for every fixed source of a set, to be
/// fed from [`AdjointSolver::run`].
#[derive(Clone, Debug)]
pub struct GradientAccumulator {
    sources: SourceSet,
    volume: f64,
    grads: Vec<Vec<f64>>,
}

impl GradientAccumulator {
    pub fn new(grid: &Grid, sources: &SourceSet, levels: usize) -> Self {
        GradientAccumulator {
            sources: sources.clone(),
            volume: grid.cell_volume(),
            grads: alloc::vec![alloc::vec![0.0; levels]; sources.fixed.len()],
        }
    }

    pub fn visit(&mut self, n: usize, w: &AdjointStateField) {
        let p = w.p_star();
        for (g, s) in self.grads.iter_mut().zip(&self.sources.fixed) {
            g[n] = s.blob().project(p) * self.volume;
        }
    }

    /// Per-source gradients, with `2λ s` added for a regularized objective.
    pub fn finish(mut self, regularization: f64) -> Vec<Vec<f64>> {
        if regularization != 0.0 {
            for (g, s) in self.grads.iter_mut().zip(&self.sources.fixed) {
                for (gv, sv) in g.iter_mut().zip(s.signal()) {
                    *gv += 2.0 * regularization * sv;
                }
            }
        }
        self.grads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{run_forward, MicrophoneArray, SolverConfig, SpongeLayer};
    use crate::grid::{build_grid, GasModel};
    use alloc::vec;

    fn small_run() -> ForwardRun {
        let g = build_grid(&[0.3, 0.3], &[24, 24]).unwrap();
        let gas = GasModel::air();
        let mut cfg = SolverConfig::new(&g, &gas, 80_000.0, 30.0 / 80_000.0).unwrap();
        cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 5));
        let mics = MicrophoneArray::new(vec![[0.15, 0.15, 0.0]]);
        run_forward(&cfg, &SourceSet::default(), &mics).unwrap()
    }

    #[test]
    fn perfect_match_gives_zero_adjoint() {
        let mut run = small_run();
        let mics = MicrophoneArray::new(vec![[0.15, 0.15, 0.0]]);
        let g = run.solver.config().grid;
        let obj = ObjectiveSpec::new(&g, &mics, vec![vec![0.0; 31]]).unwrap();
        let adj = run_adjoint(&mut run, &obj).unwrap();
        assert_eq!(adj.len(), 31);
        assert!(adj.levels().iter().flatten().all(|v| *v == 0.0));
        let s = MonopoleSource::new(&g, &[0.1, 0.1], 0.03, vec![0.0; 31]).unwrap();
        assert!(gradient_wrt_source_signal(&adj, &s).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn terminal_level_is_zero_and_signal_propagates() {
        let mut run = small_run();
        let g = run.solver.config().grid;
        let mics = MicrophoneArray::new(vec![[0.15, 0.15, 0.0]]);
        let mut target = vec![0.0; 31];
        target[20] = 1.0;
        let obj = ObjectiveSpec::new(&g, &mics, vec![target]).unwrap();
        let adj = run_adjoint(&mut run, &obj).unwrap();
        assert!(adj.p_star(30).iter().all(|v| *v == 0.0));
        assert!(adj.p_star(10).iter().any(|v| *v != 0.0));
    }

    #[test]
    fn quiescent_sweep_matches_silent_trajectory() {
        let mut run = small_run();
        let g = run.solver.config().grid;
        let mics = MicrophoneArray::new(vec![[0.15, 0.15, 0.0]]);
        let mut target = vec![0.0; 31];
        target[25] = 2.0;
        let obj = ObjectiveSpec::new(&g, &mics, vec![target]).unwrap();
        let forcing = obj.forcing(&run.recording).unwrap();
        let adj = run_adjoint(&mut run, &obj).unwrap();
        let solver = AdjointSolver::new(run.solver.config()).unwrap();
        solver
            .run_quiescent(&forcing, |n, w| {
                assert_eq!(w.p_star(), adj.p_star(n));
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn incomplete_trajectory_rejected() {
        let run = small_run();
        let solver = AdjointSolver::from_forward(&run.solver);
        let cfg = run.solver.config();
        let mut t = Trajectory::new(&cfg.grid, cfg.dt, cfg.steps, cfg.storage);
        t.push(run.solver.operator().reference()).unwrap();
        let err = solver
            .run(&mut t, &run.solver, &AdjointForcing::default(), |_, _| Ok(()))
            .unwrap_err();
        assert!(matches!(err, Error::TimeLevel { .. }));
    }

    #[test]
    fn disjoint_blobs_are_independent() {
        let g = build_grid(&[1.0, 1.0], &[32, 32]).unwrap();
        let mut levels = vec![vec![0.0; g.len()]; 3];
        for (n, l) in levels.iter_mut().enumerate() {
            for (i, v) in l.iter_mut().enumerate() {
                *v = (i as f64 * 0.37 + n as f64).sin();
            }
        }
        let adj = AdjointTrajectory::new(&g, 1e-4, levels).unwrap();
        let s1 = MonopoleSource::new(&g, &[0.2, 0.2], 0.03, vec![0.0; 3]).unwrap();
        let a = MonopoleSource::new(&g, &[0.7, 0.7], 0.03, vec![0.0; 3]).unwrap();
        let b = MonopoleSource::new(&g, &[0.75, 0.6], 0.03, vec![0.0; 3]).unwrap();
        let set_a = SourceSet::new(vec![s1.clone(), a]);
        let set_b = SourceSet::new(vec![s1.clone(), b]);
        let mut ga = GradientAccumulator::new(&g, &set_a, 3);
        let mut gb = GradientAccumulator::new(&g, &set_b, 3);
        for n in 0..3 {
            let mut w = AdjointStateField::zeros(&g);
            w.p_star_mut().copy_from_slice(adj.p_star(n));
            ga.visit(n, &w);
            gb.visit(n, &w);
        }
        let (ga, gb) = (ga.finish(0.0), gb.finish(0.0));
        assert_eq!(ga[0], gb[0]);
        assert_eq!(ga[0], gradient_wrt_source_signal(&adj, &s1));
    }
}
