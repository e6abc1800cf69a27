//! Forward time loop.

use super::mic::{sample_microphones, MicrophoneArray, Recording};
use super::rhs::ForwardOperator;
use super::source::SourceSet;
use super::sponge::SpongeLayer;
use crate::error::{Error, Result};
use crate::field::{Packed, StateField};
use crate::grid::{GasModel, Grid};
use crate::math;
use crate::numerics::{filter::DEFAULT_ALPHA, rk4_step, CompactFilter};
use crate::trajectory::{Replay, StoragePolicy, Trajectory};
use alloc::format;
use alloc::vec::Vec;

/// Discretization and boundary settings shared by forward and adjoint runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub gas: GasModel,
    /// Seconds per step.
    pub dt: f64,
    pub steps: usize,
    /// `None` disables filtering.
    pub filter_alpha: Option<f64>,
    pub sponge: Option<SpongeLayer>,
    pub characteristic: bool,
    pub storage: StoragePolicy,
}

impl SolverConfig {
    /// Default numerics for a run of `duration` seconds sampled at
    /// `sample_rate` Hz.
    pub fn new(grid: &Grid, gas: &GasModel, sample_rate: f64, duration: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !(duration > 0.0) {
            return Err(Error::config("sample rate and duration must be > 0"));
        }
        let steps = math::round(duration * sample_rate) as usize;
        if steps == 0 {
            return Err(Error::config("run shorter than one step"));
        }
        Ok(SolverConfig {
            grid: *grid,
            gas: *gas,
            dt: 1.0 / sample_rate,
            steps,
            filter_alpha: Some(DEFAULT_ALPHA),
            sponge: Some(SpongeLayer::default_for(grid, gas)),
            characteristic: true,
            storage: StoragePolicy::Full,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// `c·dt / min(Δx)`.
    pub fn cfl(&self) -> f64 {
        self.gas.sound_speed() * self.dt / self.grid.min_spacing()
    }

    /// Rejects CFL numbers above one, reporting the largest admissible step.
    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("time step must be > 0, got {}", self.dt)));
        }
        let cfl = self.cfl();
        if cfl > 1.0 {
            return Err(Error::Cfl {
                cfl,
                max_dt: self.grid.min_spacing() / self.gas.sound_speed(),
            });
        }
        Ok(())
    }

    pub(crate) fn filter(&self) -> Result<Option<CompactFilter>> {
        self.filter_alpha
            .map(|a| CompactFilter::for_grid(&self.grid, a))
            .transpose()
    }
}

/// Stage time in seconds to a level rounded to the nearest half step.
#[inline]
pub(crate) fn stage_level(t: f64, dt: f64) -> f64 {
    math::round(2.0 * t / dt) * 0.5
}

/// Filters every component's deviation from `reference` along all axes.
pub(crate) fn filter_state<P: Packed>(filter: &CompactFilter, state: &mut P, reference: Option<&P>) -> Result<()> {
    let g = *state.grid();
    let mut scratch = Vec::new();
    for c in 0..state.num_components() {
        let r = reference.map(|r| r.component(c)[0]).unwrap_or(0.0);
        let comp = state.component_mut(c);
        if r != 0.0 {
            comp.iter_mut().for_each(|v| *v -= r);
        }
        filter.apply_all_axes(&g, comp, &mut scratch)?;
        if r != 0.0 {
            comp.iter_mut().for_each(|v| *v += r);
        }
    }
    Ok(())
}

/// Steps the Euler system for a fixed source set.
#[derive(Clone, Debug)]
pub struct ForwardSolver {
    cfg: SolverConfig,
    op: ForwardOperator,
    filter: Option<CompactFilter>,
    sources: SourceSet,
}

impl ForwardSolver {
    pub fn new(cfg: &SolverConfig, sources: &SourceSet) -> Result<Self> {
        cfg.check()?;
        Ok(ForwardSolver {
            op: ForwardOperator::new(&cfg.grid, &cfg.gas, cfg.characteristic, cfg.sponge.as_ref())?,
            filter: cfg.filter()?,
            cfg: cfg.clone(),
            sources: sources.clone(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.op
    }

    pub fn sources(&self) -> &SourceSet {
        &self.sources
    }

    pub(crate) fn filter(&self) -> Option<&CompactFilter> {
        self.filter.as_ref()
    }

    /// Level `n + 1` from level `n`: RK4, then one filter pass.
    pub fn step(&self, state: &StateField, n: usize) -> Result<StateField> {
        let dt = self.cfg.dt;
        let mut next = rk4_step(state, n as f64 * dt, dt, |s, t| {
            self.op.rate(s, &self.sources, stage_level(t, dt))
        })
        .map_err(|e| e.at_step(n + 1))?;
        if let Some(f) = &self.filter {
            filter_state(f, &mut next, Some(self.op.reference()))?;
        }
        next.check_admissible(n + 1)?;
        Ok(next)
    }

    /// Runs all steps from `initial` (quiescent if `None`), recording the
    /// pressure fluctuation at `mic_nodes` on every level.
    pub fn run<F>(&self, initial: Option<StateField>, mic_nodes: &[usize], mut observer: F) -> Result<(Trajectory, Recording)>
    where
        F: FnMut(usize, &StateField),
    {
        let cfg = &self.cfg;
        let mut state = match initial {
            Some(s) => {
                if s.grid() != &cfg.grid {
                    return Err(Error::shape("initial state on a different grid"));
                }
                s.check_admissible(0)?;
                s
            }
            None => self.op.reference().clone(),
        };
        let mut traj = Trajectory::new(&cfg.grid, cfg.dt, cfg.steps, cfg.storage);
        let mut rec = Recording::new(cfg.sample_rate(), mic_nodes.len());
        traj.push(&state)?;
        rec.push(&sample_microphones(&state, mic_nodes, cfg.gas.p_ref));
        observer(0, &state);
        for n in 0..cfg.steps {
            state = self.step(&state, n)?;
            traj.push(&state)?;
            rec.push(&sample_microphones(&state, mic_nodes, cfg.gas.p_ref));
            observer(n + 1, &state);
        }
        Ok((traj, rec))
    }
}

impl Replay for ForwardSolver {
    fn replay(&self, state: &StateField, step: usize) -> Result<StateField> {
        self.step(state, step)
    }
}

/// Result of a forward run; the solver is kept for trajectory replay.
#[derive(Clone, Debug)]
pub struct ForwardRun {
    pub trajectory: Trajectory,
    pub recording: Recording,
    pub solver: ForwardSolver,
}

/// Forward run from the quiescent state.
pub fn run_forward(cfg: &SolverConfig, sources: &SourceSet, mics: &MicrophoneArray) -> Result<ForwardRun> {
    let nodes = mics.snap(&cfg.grid)?;
    let solver = ForwardSolver::new(cfg, sources)?;
    let (trajectory, recording) = solver.run(None, &nodes, |_, _| {})?;
    Ok(ForwardRun {
        trajectory,
        recording,
        solver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use alloc::vec;

    #[test]
    fn step_counts_from_rates() {
        let g = build_grid(&[1.6, 1.6, 1.6], &[197, 197, 99]).unwrap();
        let gas = GasModel::air();
        let c = SolverConfig::new(&g, &gas, 48_000.0, 31.25e-3).unwrap();
        assert_eq!(c.steps, 1500);
        assert!(c.check().is_ok());
        let g = build_grid(&[1.7, 1.7, 1.25], &[240, 240, 176]).unwrap();
        let c = SolverConfig::new(&g, &gas, 53_330.0, 14.06e-3).unwrap();
        assert_eq!(c.steps, 750);
    }

    #[test]
    fn cfl_violation_reports_admissible_dt() {
        let g = build_grid(&[1.0, 1.0], &[101, 101]).unwrap();
        let gas = GasModel::air();
        let c = SolverConfig::new(&g, &gas, 20_000.0, 1e-3).unwrap();
        match c.check() {
            Err(Error::Cfl { cfl, max_dt }) => {
                assert!(cfl > 1.0);
                assert!((max_dt - 0.01 / 343.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_sources_record_silence() {
        let g = build_grid(&[0.2, 0.2], &[24, 24]).unwrap();
        let gas = GasModel::air();
        let mut c = SolverConfig::new(&g, &gas, 96_000.0, 2e-4).unwrap();
        c.sponge = Some(SpongeLayer::with_width(&g, &gas, 6));
        let mics = MicrophoneArray::new(vec![[0.1, 0.1, 0.0], [0.0, 0.2, 0.0]]);
        let run = run_forward(&c, &SourceSet::default(), &mics).unwrap();
        assert_eq!(run.recording.levels(), c.steps + 1);
        assert!(run.recording.samples.iter().flatten().all(|v| *v == 0.0));
    }
}
