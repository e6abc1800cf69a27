//! Steepest-descent optimization of source signals.
//!
//! Each loop runs forward, evaluates the objective, runs the adjoint for the
//! gradient and moves the signals against it with a backtracking step size.

use crate::adjoint::{AdjointSolver, GradientAccumulator, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::forward::{run_forward, ForwardRun, MicrophoneArray, SolverConfig, SourceSet};
use alloc::vec::Vec;

pub use crate::adjoint::evaluate_objective;

/// An objective over source signals with an adjoint gradient.
pub trait Problem {
    /// Whatever the gradient needs from an objective evaluation.
    type Eval;

    /// Objective at `sources`.
    fn evaluate(&mut self, sources: &SourceSet) -> Result<(f64, Self::Eval)>;

    /// `∂J/∂s` per fixed source and time level at the evaluated point.
    fn gradient(&mut self, sources: &SourceSet, eval: Self::Eval) -> Result<Vec<Vec<f64>>>;
}

/// Matching recorded microphone pressures with fixed-support sources.
#[derive(Clone, Debug)]
pub struct SignalProblem {
    pub config: SolverConfig,
    pub mics: MicrophoneArray,
    pub objective: ObjectiveSpec,
}

impl SignalProblem {
    pub fn new(config: SolverConfig, mics: MicrophoneArray, objective: ObjectiveSpec) -> Self {
        SignalProblem { config, mics, objective }
    }
}

impl Problem for SignalProblem {
    type Eval = ForwardRun;

    fn evaluate(&mut self, sources: &SourceSet) -> Result<(f64, ForwardRun)> {
        let run = run_forward(&self.config, sources, &self.mics)?;
        let dt = self.config.dt;
        let j = evaluate_objective(&run.recording, &self.objective, &self.config.grid, dt)?
            + self.objective.regularization_term(sources, dt);
        Ok((j, run))
    }

    fn gradient(&mut self, sources: &SourceSet, mut run: ForwardRun) -> Result<Vec<Vec<f64>>> {
        let forcing = self.objective.forcing(&run.recording)?;
        let solver = AdjointSolver::from_forward(&run.solver);
        let mut acc = GradientAccumulator::new(&self.config.grid, sources, run.trajectory.len());
        solver.run(&mut run.trajectory, &run.solver, &forcing, |n, w| {
            acc.visit(n, w);
            Ok(())
        })?;
        let dt = self.config.dt;
        let mut g = acc.finish(self.objective.regularization());
        g.iter_mut().flatten().for_each(|v| *v *= dt);
        Ok(g)
    }
}

/// `signal_k − α·grad_k` for every fixed source; supports are unchanged.
pub fn descent_step(sources: &SourceSet, gradients: &[Vec<f64>], alpha: f64) -> Result<SourceSet> {
    let mut signals = sources.signals();
    if gradients.len() != signals.len() {
        return Err(Error::shape("one gradient per fixed source is required"));
    }
    for (s, g) in signals.iter_mut().zip(gradients) {
        if s.len() != g.len() {
            return Err(Error::shape("gradient and signal lengths differ"));
        }
        for (v, d) in s.iter_mut().zip(g) {
            *v -= alpha * d;
        }
    }
    sources.with_signals(&signals)
}

/// Squared Euclidean norm over all sources and levels.
pub fn squared_norm(gradients: &[Vec<f64>]) -> f64 {
    gradients.iter().flatten().map(|v| v * v).sum()
}

/// Outcome of a line search.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSize<E> {
    Accepted { alpha: f64, objective: f64, eval: E },
    /// No trial decreased the objective, or the gradient vanished.
    Stagnated,
}

/// Backtracking along `−grad` from `J(0) = j0`.
///
/// Trials start at `alpha0` and halve until the objective decreases, at
/// most `max_trials` times. The accepted trial is refined once by the
/// minimizer of the parabola through `J(0)`, the slope `−‖grad‖²` and the
/// trial, kept only if it is lower still.
pub fn select_step_size<E, F>(j0: f64, grad_sq: f64, alpha0: f64, max_trials: usize, mut trial: F) -> Result<StepSize<E>>
where
    F: FnMut(f64) -> Result<(f64, E)>,
{
    if !(grad_sq > 0.0) || !(alpha0 > 0.0) {
        return Ok(StepSize::Stagnated);
    }
    let mut alpha = alpha0;
    for _ in 0..max_trials {
        let (j, eval) = trial(alpha)?;
        if j < j0 {
            let curvature = j - j0 + alpha * grad_sq;
            if curvature > 0.0 {
                let best = 0.5 * grad_sq * alpha * alpha / curvature;
                if best.is_finite() && (best - alpha).abs() > 1e-3 * alpha {
                    let (jb, eb) = trial(best)?;
                    if jb < j {
                        return Ok(StepSize::Accepted {
                            alpha: best,
                            objective: jb,
                            eval: eb,
                        });
                    }
                }
            }
            return Ok(StepSize::Accepted {
                alpha,
                objective: j,
                eval,
            });
        }
        alpha *= 0.5;
    }
    Ok(StepSize::Stagnated)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSettings {
    pub max_loops: usize,
    /// Relative objective change below which a loop counts as stalled.
    pub tolerance: f64,
    /// Consecutive stalled loops that end the run.
    pub patience: usize,
    pub max_trials: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            max_loops: 20,
            tolerance: 1e-3,
            patience: 2,
            max_trials: 8,
        }
    }
}

/// One optimization loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective at the start of the loop.
    pub objective: f64,
    /// Accepted step size; zero when the loop made no step.
    pub alpha: f64,
    pub grad_norm: f64,
    pub wall_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Objective changes stayed below the tolerance.
    Converged,
    MaxLoops,
    /// Zero gradient or no decreasing step.
    Stagnated,
}

/// History and current state of an optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationRun {
    pub records: Vec<IterationRecord>,
    pub sources: SourceSet,
    /// Objective at `sources`.
    pub objective: Option<f64>,
    pub termination: Option<Termination>,
}

impl OptimizationRun {
    pub fn start(sources: SourceSet) -> Self {
        OptimizationRun {
            records: Vec::new(),
            sources,
            objective: None,
            termination: None,
        }
    }

    /// Objective values of the loops so far.
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// Trailing loops whose relative objective change stayed within
    /// `tolerance`, counting the step to `current`.
    fn stalled_loops(&self, current: f64, tolerance: f64) -> usize {
        let mut j = self.objectives();
        j.push(current);
        let mut count = 0;
        for w in j.windows(2).rev() {
            if (w[0] - w[1]).abs() <= tolerance * w[0].abs() {
                count += 1;
            } else {
                break;
            }
        }
        count
    }
}

/// Runs loops until convergence from `run`'s current sources, which makes
/// a persisted run resumable. `clock` returns seconds for the wall-time
/// column; `observer` sees the run after every loop.
pub fn optimize<P, C, O>(problem: &mut P, mut run: OptimizationRun, settings: &ConvergenceSettings, clock: C, mut observer: O) -> Result<OptimizationRun>
where
    P: Problem,
    C: Fn() -> f64,
    O: FnMut(&OptimizationRun) -> Result<()>,
{
    run.termination = None;
    let (mut j, mut eval) = problem.evaluate(&run.sources).map_err(|e| e.in_loop(run.records.len()))?;
    loop {
        let iteration = run.records.len();
        let started = clock();
        run.objective = Some(j);
        if run.stalled_loops(j, settings.tolerance) >= settings.patience {
            run.termination = Some(Termination::Converged);
            break;
        }
        if iteration >= settings.max_loops {
            run.termination = Some(Termination::MaxLoops);
            break;
        }
        let grad = problem.gradient(&run.sources, eval).map_err(|e| e.in_loop(iteration))?;
        let grad_sq = squared_norm(&grad);
        let mut record = IterationRecord {
            iteration,
            objective: j,
            alpha: 0.0,
            grad_norm: crate::math::sqrt(grad_sq),
            wall_s: 0.0,
        };
        let alpha0 = if grad_sq > 0.0 { 2.0 * j / grad_sq } else { 0.0 };
        let step = select_step_size(j, grad_sq, alpha0, settings.max_trials, |alpha| {
            let trial = descent_step(&run.sources, &grad, alpha)?;
            problem.evaluate(&trial).map(|(jt, et)| (jt, (et, trial)))
        })
        .map_err(|e| e.in_loop(iteration))?;
        match step {
            StepSize::Accepted {
                alpha,
                objective,
                eval: (next_eval, next_sources),
            } => {
                record.alpha = alpha;
                record.wall_s = clock() - started;
                run.records.push(record);
                run.sources = next_sources;
                j = objective;
                eval = next_eval;
                observer(&run)?;
            }
            StepSize::Stagnated => {
                record.wall_s = clock() - started;
                run.records.push(record);
                run.termination = Some(Termination::Stagnated);
                observer(&run)?;
                break;
            }
        }
    }
    Ok(run)
}
