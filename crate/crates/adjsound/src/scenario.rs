//! Scenario pipelines: synthesis of twin data, signal optimization, static
//! localization, tracking and plain forward runs.
//!
//! Synthesis is the only stage that reads the configured source signals.
//! It writes microphone targets to `targets.csv` and everything else that
//! depends on the signals under `reference/`. The inverse stages read the
//! targets and the source sites, never `reference/`.

use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};
use crate::io::{self, SnapshotMeta};
use crate::spectra::{band_deviation, BinDeviation};
use adjsound_core::adjoint::{AdjointSolver, AdjointTrajectory, ObjectiveSpec};
use adjsound_core::forward::{run_forward, ForwardSolver, MicrophoneArray, Recording, SolverConfig};
use adjsound_core::localize::{detect_peaks, track_moving, PeakSet, SensitivityMap, Track};
use adjsound_core::optimize::{optimize as descend, OptimizationRun, SignalProblem};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// File names inside an output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn targets(&self) -> PathBuf {
        self.root.join("targets.csv")
    }

    pub fn reference_dir(&self) -> PathBuf {
        self.root.join("reference")
    }

    pub fn reference_signal(&self, i: usize) -> PathBuf {
        self.reference_dir().join(format!("source_{i:02}.csv"))
    }

    pub fn reference_probes(&self) -> PathBuf {
        self.reference_dir().join("probes.csv")
    }

    pub fn iterations(&self) -> PathBuf {
        self.root.join("iterations.csv")
    }

    pub fn signal(&self, i: usize) -> PathBuf {
        self.root.join("signals").join(format!("source_{i:02}.csv"))
    }

    pub fn probes(&self) -> PathBuf {
        self.root.join("probes.csv")
    }

    pub fn spectra(&self) -> PathBuf {
        self.root.join("spectra.csv")
    }

    pub fn peaks(&self) -> PathBuf {
        self.root.join("peaks.csv")
    }

    pub fn sensitivity(&self) -> PathBuf {
        self.root.join("sensitivity.f64")
    }

    pub fn track(&self) -> PathBuf {
        self.root.join("track.csv")
    }

    pub fn recording(&self) -> PathBuf {
        self.root.join("recording.csv")
    }

    /// Raw snapshot of state component `field` after `step` steps.
    pub fn snapshot(&self, field: &str, step: usize) -> PathBuf {
        self.root.join("snapshots").join(format!("{field}_{step:06}.f64"))
    }
}

/// Microphone and probe recordings of the configured sources.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub targets: Recording,
    pub probes: Recording,
}

fn split(rec: Recording, at: usize) -> (Recording, Recording) {
    let mut samples = rec.samples;
    let tail = samples.split_off(at);
    (
        Recording {
            sample_rate: rec.sample_rate,
            samples,
        },
        Recording {
            sample_rate: rec.sample_rate,
            samples: tail,
        },
    )
}

/// Runs the configured sources once, recording microphones and probes
/// together, and writes targets, reference signals and probe references.
pub fn synthesize(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Synthesis> {
    let solver = cfg.solver_config()?;
    let sources = cfg.reference_sources()?;
    let mics = cfg.microphones()?;
    let probes = cfg.probes()?;
    let mut all = mics.positions().to_vec();
    all.extend_from_slice(probes.positions());
    let started = Instant::now();
    let rec = run_forward(&solver, &sources, &MicrophoneArray::new(all))?.recording;
    log::info!("synthesized {} levels in {:.1} s", solver.steps + 1, started.elapsed().as_secs_f64());
    let (targets, probe_rec) = split(rec, mics.len());
    io::write_recording(&layout.targets(), &targets)?;
    for i in 0..cfg.sources.len() {
        io::write_signal_csv(&layout.reference_signal(i), solver.dt, &cfg.reference_signal(i)?)?;
    }
    if !probe_rec.samples.is_empty() {
        io::write_recording(&layout.reference_probes(), &probe_rec)?;
    }
    Ok(Synthesis {
        targets,
        probes: probe_rec,
    })
}

/// Target recording for the inverse stages.
pub fn load_targets(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Recording> {
    let path = match &cfg.objective.targets_csv {
        Some(p) => cfg.base_dir.join(p),
        None => layout.targets(),
    };
    if !path.exists() {
        return Err(AppError::Config(format!(
            "{}: target recording missing; run `synthesize` first or set objective.targets_csv",
            path.display()
        )));
    }
    let rec = io::read_recording(&path)?;
    let (mics, levels) = (cfg.microphones()?.len(), cfg.levels());
    if rec.mics() != mics || rec.levels() != levels {
        return Err(AppError::format(
            &path,
            format!("{} microphones by {} levels, scenario needs {mics} by {levels}", rec.mics(), rec.levels()),
        ));
    }
    Ok(rec)
}

fn objective(cfg: &ScenarioConfig, solver: &SolverConfig, mics: &MicrophoneArray, targets: Recording) -> AppResult<ObjectiveSpec> {
    let mut spec = ObjectiveSpec::new(&solver.grid, mics, targets.samples)?;
    if cfg.objective.regularization > 0.0 {
        spec = spec.with_regularization(cfg.objective.regularization)?;
    }
    Ok(spec)
}

/// Result of [`optimize`].
#[derive(Clone, Debug)]
pub struct Optimization {
    pub run: OptimizationRun,
    /// Probe recordings of the optimized sources.
    pub probes: Recording,
}

/// Steepest descent on the source signals from zero, writing the iteration
/// table after every loop, then the optimized signals and probe recordings.
pub fn optimize(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Optimization> {
    let solver = cfg.solver_config()?;
    let mics = cfg.microphones()?;
    let targets = load_targets(cfg, layout)?;
    let spec = objective(cfg, &solver, &mics, targets)?;
    let sites = cfg.source_sites()?;
    if sites.fixed.is_empty() {
        return Err(AppError::Config("sources: optimization needs at least one fixed source".into()));
    }
    let mut problem = SignalProblem::new(solver.clone(), mics, spec);
    let clock = Instant::now();
    let iterations = layout.iterations();
    let mut failure = None;
    let run = descend(
        &mut problem,
        OptimizationRun::start(sites),
        &cfg.convergence(),
        || clock.elapsed().as_secs_f64(),
        |run| {
            if let Some(r) = run.records.last() {
                log::info!("loop {} J {:.6e} alpha {:.3e}", r.iteration, r.objective, r.alpha);
            }
            if failure.is_none() {
                failure = io::write_iterations(&iterations, &run.records).err();
            }
            Ok(())
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    io::write_iterations(&iterations, &run.records)?;
    for (i, s) in run.sources.fixed.iter().enumerate() {
        io::write_signal_csv(&layout.signal(i), solver.dt, s.signal())?;
    }
    let probes = cfg.probes()?;
    let probe_rec = if probes.is_empty() {
        Recording::new(solver.sample_rate(), 0)
    } else {
        let rec = run_forward(&solver, &run.sources, &probes)?.recording;
        io::write_recording(&layout.probes(), &rec)?;
        rec
    };
    Ok(Optimization { run, probes: probe_rec })
}

/// Per-bin deviations of each optimized probe recording from its
/// reference over the configured band. Needs `reference/probes.csv`.
pub fn compare_probes(cfg: &ScenarioConfig, layout: &Layout, optimized: &Recording) -> AppResult<Vec<Vec<BinDeviation>>> {
    let [low, high] = cfg
        .objective
        .band_hz
        .ok_or_else(|| AppError::Config("objective.band_hz: needed for the spectral comparison".into()))?;
    let reference = io::read_recording(&layout.reference_probes())?;
    if reference.mics() != optimized.mics() || reference.levels() != optimized.levels() {
        return Err(AppError::format(&layout.reference_probes(), "shape differs from the optimized probe recording"));
    }
    let bins: Vec<Vec<BinDeviation>> = reference
        .samples
        .iter()
        .zip(&optimized.samples)
        .map(|(a, b)| band_deviation(a, b, reference.sample_rate, low, high))
        .collect();
    io::write_table(
        &layout.spectra(),
        &["probe", "freq_hz", "amplitude_db", "phase_cycles"].map(String::from),
        bins.iter().enumerate().flat_map(|(m, list)| {
            list.iter().map(move |b| {
                vec![
                    m.to_string(),
                    format!("{:?}", b.freq_hz),
                    format!("{:?}", b.amplitude_db),
                    format!("{:?}", b.phase_cycles),
                ]
            })
        }),
    )?;
    Ok(bins)
}

/// Visits `p*` at every level of the first adjoint sweep, which starts from
/// zero source signals and therefore runs on the quiescent base state.
fn first_adjoint<F>(cfg: &ScenarioConfig, layout: &Layout, mut visit: F) -> AppResult<SolverConfig>
where
    F: FnMut(usize, &[f64]),
{
    let solver = cfg.solver_config()?;
    let mics = cfg.microphones()?;
    let targets = load_targets(cfg, layout)?;
    let spec = objective(cfg, &solver, &mics, targets)?;
    let silent = Recording {
        sample_rate: solver.sample_rate(),
        samples: vec![vec![0.0; solver.steps + 1]; mics.len()],
    };
    let forcing = spec.forcing(&silent)?;
    let started = Instant::now();
    AdjointSolver::new(&solver)?.run_quiescent(&forcing, |k, w| {
        visit(k, w.p_star());
        Ok(())
    })?;
    log::info!("adjoint sweep {:.1} s", started.elapsed().as_secs_f64());
    Ok(solver)
}

/// Result of [`localize`].
#[derive(Clone, Debug)]
pub struct Localization {
    pub peaks: PeakSet,
    pub map: SensitivityMap,
}

/// Sums `|p*|` of the first gradient over the whole run and picks the
/// strongest separated peaks in the search region.
pub fn localize(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Localization> {
    let grid = cfg.grid()?;
    let mut map = SensitivityMap::new(&grid, 0..cfg.levels())?;
    first_adjoint(cfg, layout, |k, p| map.accumulate(k, p))?;
    let radius = cfg.localize.exclusion_cells * grid.min_spacing();
    let peaks = detect_peaks(&map, cfg.localize.peaks, radius, &cfg.region()?)?;
    io::write_peaks(&layout.peaks(), &peaks)?;
    let raw = layout.sensitivity();
    io::write_snapshot(&raw, map.values(), SnapshotMeta::for_grid(&grid, "sensitivity"))?;
    render(&raw)?;
    Ok(Localization { peaks, map })
}

/// Result of [`track`].
#[derive(Clone, Debug)]
pub struct Tracking {
    pub track: Track,
    pub adjoint: AdjointTrajectory,
}

/// Per-level windowed argmax of `|p*|` of the first gradient over the
/// search region.
pub fn track(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Tracking> {
    let window = cfg.track_window()?;
    let mut levels = vec![Vec::new(); cfg.levels()];
    let solver = first_adjoint(cfg, layout, |k, p| levels[k] = p.to_vec())?;
    let adjoint = AdjointTrajectory::new(&solver.grid, solver.dt, levels)?;
    let track = track_moving(&adjoint, &cfg.region()?, window)?;
    io::write_track(&layout.track(), &track)?;
    Ok(Tracking { track, adjoint })
}

/// Forward run of the configured sources with microphone recording and
/// optional snapshots of every state component. Density and pressure are
/// stored as deviations from the quiescent reference.
pub fn forward(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<Recording> {
    let solver_cfg = cfg.solver_config()?;
    let grid = solver_cfg.grid;
    let gas = solver_cfg.gas;
    let nodes = cfg.microphones()?.snap(&grid)?;
    let every = cfg.output.snapshot_every_steps.filter(|n| *n > 0);
    let solver = ForwardSolver::new(&solver_cfg, &cfg.reference_sources()?)?;
    let mut failure = None;
    let (_, rec) = solver.run(None, &nodes, |n, state| {
        if failure.is_some() || every.is_none_or(|e| n % e != 0) {
            return;
        }
        for (name, values) in state.names().iter().zip(state.components()) {
            let mut meta = SnapshotMeta::for_grid(&grid, name);
            meta.step = Some(n);
            meta.time_s = Some(n as f64 * solver_cfg.dt);
            meta.reference = match *name {
                "rho" => Some(gas.rho_ref),
                "p" => Some(gas.p_ref),
                _ => None,
            };
            let offset = meta.reference.unwrap_or(0.0);
            let stored: Vec<f64> = values.iter().map(|v| v - offset).collect();
            if let Err(e) = io::write_snapshot(&layout.snapshot(name, n), &stored, meta) {
                failure = Some(e);
                return;
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    io::write_recording(&layout.recording(), &rec)?;
    Ok(rec)
}

/// Writes a PGM image of the middle `x1`–`x2` plane next to a raw snapshot.
pub fn render(raw: &Path) -> AppResult<PathBuf> {
    let (values, meta) = io::read_snapshot(raw)?;
    let (plane, nx, ny) = io::middle_plane(&values, &meta);
    let out = raw.with_extension("pgm");
    io::write_pgm(&out, &plane, nx, ny)?;
    Ok(out)
}

/// Renders every raw snapshot under `dir`, recursively.
pub fn render_all(dir: &Path) -> AppResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut pending = vec![dir.to_path_buf()];
    while let Some(d) = pending.pop() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&d)
            .map_err(|e| AppError::io(&d, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| AppError::io(&d, err)))
            .collect::<AppResult<_>>()?;
        entries.sort();
        for path in entries {
            if path.is_dir() {
                pending.push(path);
            } else if path.extension().is_some_and(|x| x == "f64") {
                out.push(render(&path)?);
            }
        }
    }
    Ok(out)
}
