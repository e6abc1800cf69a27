//! Scenario configuration files.
//!
//! A scenario is a TOML document. Every dimensional key carries its unit in
//! the name (`extent_m`, `rate_hz`, ...). Built-in presets are available by
//! name through [`preset`] and [`ScenarioConfig::load`].

use crate::error::{AppError, AppResult};
use adjsound_core::array::{build_array, ArraySpec, SpiralSpec};
use adjsound_core::forward::{MicrophoneArray, MonopoleSource, MovingSource, SolverConfig, SourceSet, SpongeLayer};
use adjsound_core::localize::{Region, EXCLUSION_CELLS};
use adjsound_core::optimize::ConvergenceSettings;
use adjsound_core::signal::{generate_signal, Gate, SignalKind, SignalSpec};
use adjsound_core::{GasModel, Grid, StoragePolicy};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Forward,
    Optimize,
    Localize,
    Track,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    /// Base seed; band-noise sources without their own seed use
    /// `seed + source index`.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub gas: GasSection,
    pub time: TimeSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub sources: Vec<SourceSection>,
    pub array: ArraySection,
    #[serde(default)]
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub localize: LocalizeSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extent_m: Vec<f64>,
    pub nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_m: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    pub density_kg_m3: f64,
    pub sound_speed_m_s: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        GasSection {
            gamma: GasModel::DEFAULT_GAMMA,
            density_kg_m3: GasModel::DEFAULT_RHO,
            sound_speed_m_s: GasModel::DEFAULT_SOUND_SPEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub rate_hz: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    /// Compact filter coefficient; `None` disables filtering.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_alpha: Option<f64>,
    /// Sponge width in nodes; 0 disables the sponge.
    pub sponge_cells: usize,
    pub characteristic: bool,
    /// Keep every `sqrt(steps)`-th forward level and recompute the rest
    /// during backward sweeps.
    pub checkpointing: bool,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            filter_alpha: Some(adjsound_core::numerics::filter::DEFAULT_ALPHA),
            sponge_cells: SpongeLayer::DEFAULT_WIDTH,
            characteristic: true,
            checkpointing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub position_m: Vec<f64>,
    /// Gaussian support half-width; two grid spacings when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width_m: Option<f64>,
    pub signal: SignalSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateSection>,
    /// Moves the source from `position_m` to `end_m` over the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSection {
    LogSweep {
        start_hz: f64,
        end_hz: f64,
        amplitude_pa_s: f64,
    },
    BandNoise {
        low_hz: f64,
        high_hz: f64,
        amplitude_pa_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Harmonic {
        freq_hz: f64,
        amplitude_pa_s: f64,
    },
    /// Signal CSV with columns `time_s,s_value`.
    SamplesFromFile {
        file: PathBuf,
        #[serde(default = "unit")]
        amplitude_pa_s: f64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub start_step: usize,
    pub steps: usize,
    /// Fraction of the gate faded at each end.
    #[serde(default)]
    pub taper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSection {
    pub end_m: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArraySection {
    Spiral {
        center_m: Vec<f64>,
        #[serde(default = "spiral_count")]
        count: usize,
        #[serde(default = "spiral_r_min")]
        r_min_m: f64,
        #[serde(default = "spiral_r_max")]
        r_max_m: f64,
        #[serde(default = "spiral_turns")]
        turns: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    Line {
        start_m: Vec<f64>,
        end_m: Vec<f64>,
        count: usize,
    },
    /// Rectangular lattice of `counts` points spanning `min_m`..`max_m`.
    Area {
        min_m: Vec<f64>,
        max_m: Vec<f64>,
        counts: Vec<usize>,
    },
    Explicit {
        positions_m: Vec<Vec<f64>>,
    },
}

fn spiral_count() -> usize {
    64
}
fn spiral_r_min() -> f64 {
    0.03
}
fn spiral_r_max() -> f64 {
    0.5
}
fn spiral_turns() -> f64 {
    3.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub regularization: f64,
    /// Recording CSV used as target; `<output>/targets.csv` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets_csv: Option<PathBuf>,
    /// Positions recorded outside the objective for spectral comparison.
    pub probes_m: Vec<Vec<f64>>,
    /// Band of the spectral comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_hz: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub max_loops: usize,
    pub tolerance: f64,
    pub patience: usize,
    pub max_trials: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let d = ConvergenceSettings::default();
        OptimizeSection {
            max_loops: d.max_loops,
            tolerance: d.tolerance,
            patience: d.patience,
            max_trials: d.max_trials,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizeSection {
    pub peaks: usize,
    pub exclusion_cells: f64,
    pub region: RegionSection,
    /// Tracking window in steps; one period of `track_freq_hz` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_freq_hz: Option<f64>,
}

impl Default for LocalizeSection {
    fn default() -> Self {
        LocalizeSection {
            peaks: 1,
            exclusion_cells: EXCLUSION_CELLS,
            region: RegionSection::All,
            window_steps: None,
            track_freq_hz: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSection {
    All,
    Box { min_m: Vec<f64>, max_m: Vec<f64> },
    Plane { axis: usize, offset_m: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Pressure snapshots every this many steps during `forward`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every_steps: Option<usize>,
}

/// Names of the built-in presets.
pub const PRESETS: [&str; 6] = ["reinf_desk", "loc4_desk", "track_desk", "reinf_full", "loc4_full", "track_full"];

/// Text of a built-in preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "reinf_desk" => include_str!("../presets/reinf_desk.cfg"),
        "loc4_desk" => include_str!("../presets/loc4_desk.cfg"),
        "track_desk" => include_str!("../presets/track_desk.cfg"),
        "reinf_full" => include_str!("../presets/reinf_full.cfg"),
        "loc4_full" => include_str!("../presets/loc4_full.cfg"),
        "track_full" => include_str!("../presets/track_full.cfg"),
        _ => return None,
    })
}

/// Parsed built-in preset.
pub fn preset(name: &str) -> AppResult<ScenarioConfig> {
    let text = preset_text(name).ok_or_else(|| AppError::Config(format!("unknown preset `{name}`")))?;
    ScenarioConfig::parse(text)
}

fn point(v: &[f64], what: &str) -> AppResult<[f64; 3]> {
    if !(1..=3).contains(&v.len()) {
        return Err(AppError::Config(format!("{what}: expected 1 to 3 coordinates, got {}", v.len())));
    }
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    Ok(p)
}

fn core(e: adjsound_core::Error, what: &str) -> AppError {
    if e.is_numerical() {
        AppError::Numerical(e)
    } else {
        AppError::Config(format!("{what}: {e}"))
    }
}

impl ScenarioConfig {
    /// Parses TOML text. Schema violations name the offending key.
    pub fn parse(text: &str) -> AppResult<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().trim_end().to_string();
            AppError::Config(if path == "." { msg } else { format!("{path}: {msg}") })
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. A path that does not exist but names a preset,
    /// with or without the `.cfg` extension, loads that preset.
    pub fn load(path: &Path) -> AppResult<Self> {
        if !path.exists() {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if path.parent().is_none_or(|p| p.as_os_str().is_empty()) && preset_text(stem).is_some() {
                return preset(stem);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    fn validate(&self) -> AppResult<()> {
        let dim = self.grid.nodes.len();
        if self.grid.extent_m.len() != dim {
            return Err(AppError::Config(format!(
                "grid.extent_m: {} values for {dim} axes",
                self.grid.extent_m.len()
            )));
        }
        if self.time.steps == 0 || !(self.time.rate_hz > 0.0) {
            return Err(AppError::Config("time: steps and rate_hz must be > 0".into()));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if s.position_m.len() != dim {
                return Err(AppError::Config(format!("sources[{i}].position_m: expected {dim} coordinates")));
            }
            if let Some(m) = &s.motion {
                if m.end_m.len() != dim {
                    return Err(AppError::Config(format!("sources[{i}].motion.end_m: expected {dim} coordinates")));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> AppResult<Grid> {
        let dim = self.grid.nodes.len();
        let origin = self.grid.origin_m.clone().unwrap_or_else(|| vec![0.0; dim]);
        if origin.len() != dim {
            return Err(AppError::Config(format!("grid.origin_m: expected {dim} coordinates")));
        }
        let g = adjsound_core::build_grid(&self.grid.extent_m, &self.grid.nodes).map_err(|e| core(e, "grid"))?;
        Ok(g.with_origin(&origin))
    }

    pub fn gas(&self) -> AppResult<GasModel> {
        GasModel::from_sound_speed(self.gas.gamma, self.gas.density_kg_m3, self.gas.sound_speed_m_s).map_err(|e| core(e, "gas"))
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.time.rate_hz
    }

    pub fn levels(&self) -> usize {
        self.time.steps + 1
    }

    pub fn solver_config(&self) -> AppResult<SolverConfig> {
        let grid = self.grid()?;
        let gas = self.gas()?;
        let mut cfg = SolverConfig::new(&grid, &gas, self.time.rate_hz, self.time.steps as f64 / self.time.rate_hz)
            .map_err(|e| core(e, "time"))?;
        cfg.steps = self.time.steps;
        cfg.filter_alpha = self.numerics.filter_alpha;
        cfg.sponge = (self.numerics.sponge_cells > 0).then(|| SpongeLayer::with_width(&grid, &gas, self.numerics.sponge_cells));
        cfg.characteristic = self.numerics.characteristic;
        cfg.storage = if self.numerics.checkpointing {
            StoragePolicy::sqrt_checkpointing(cfg.steps)
        } else {
            StoragePolicy::Full
        };
        cfg.check().map_err(|e| core(e, "numerics"))?;
        Ok(cfg)
    }

    pub fn array_spec(&self) -> AppResult<ArraySpec> {
        Ok(match &self.array {
            ArraySection::Spiral {
                center_m,
                count,
                r_min_m,
                r_max_m,
                turns,
                scale,
            } => ArraySpec::Spiral(SpiralSpec {
                count: *count,
                r_min: *r_min_m,
                r_max: *r_max_m,
                turns: *turns,
                center: point(center_m, "array.center_m")?,
                scale: *scale,
            }),
            ArraySection::Line { start_m, end_m, count } => ArraySpec::Line {
                start: point(start_m, "array.start_m")?,
                end: point(end_m, "array.end_m")?,
                count: *count,
            },
            ArraySection::Area { min_m, max_m, counts } => {
                let (lo, hi) = (point(min_m, "array.min_m")?, point(max_m, "array.max_m")?);
                if counts.is_empty() || counts.len() > 3 || counts.contains(&0) {
                    return Err(AppError::Config("array.counts: 1 to 3 positive counts".into()));
                }
                let mut n = [1usize; 3];
                n[..counts.len()].copy_from_slice(counts);
                let at = |k: usize, i: usize| {
                    if n[k] > 1 {
                        lo[k] + (hi[k] - lo[k]) * i as f64 / (n[k] - 1) as f64
                    } else {
                        lo[k]
                    }
                };
                let mut positions = Vec::with_capacity(n[0] * n[1] * n[2]);
                for i in 0..n[0] {
                    for j in 0..n[1] {
                        for k in 0..n[2] {
                            positions.push([at(0, i), at(1, j), at(2, k)]);
                        }
                    }
                }
                ArraySpec::Explicit(positions)
            }
            ArraySection::Explicit { positions_m } => ArraySpec::Explicit(
                positions_m
                    .iter()
                    .enumerate()
                    .map(|(i, p)| point(p, &format!("array.positions_m[{i}]")))
                    .collect::<AppResult<_>>()?,
            ),
        })
    }

    pub fn microphones(&self) -> AppResult<MicrophoneArray> {
        build_array(&self.array_spec()?, &self.grid()?).map_err(|e| core(e, "array"))
    }

    pub fn probes(&self) -> AppResult<MicrophoneArray> {
        let positions = self
            .objective
            .probes_m
            .iter()
            .enumerate()
            .map(|(i, p)| point(p, &format!("objective.probes_m[{i}]")))
            .collect::<AppResult<Vec<_>>>()?;
        let probes = MicrophoneArray::new(positions);
        probes.snap(&self.grid()?).map_err(|e| core(e, "objective.probes_m"))?;
        Ok(probes)
    }

    fn half_width(&self, s: &SourceSection, grid: &Grid) -> f64 {
        s.half_width_m.unwrap_or(2.0 * grid.min_spacing())
    }

    /// Source supports with zero signals. This is all the inverse pipeline
    /// learns about the sources; signals are never read here.
    pub fn source_sites(&self) -> AppResult<SourceSet> {
        let grid = self.grid()?;
        let levels = self.levels();
        let fixed = self
            .sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.motion.is_none())
            .map(|(i, s)| {
                MonopoleSource::new(&grid, &s.position_m, self.half_width(s, &grid), vec![0.0; levels])
                    .map_err(|e| core(e, &format!("sources[{i}]")))
            })
            .collect::<AppResult<_>>()?;
        Ok(SourceSet::new(fixed))
    }

    /// Signal of source `i` as configured.
    pub fn reference_signal(&self, i: usize) -> AppResult<Vec<f64>> {
        let s = &self.sources[i];
        let what = format!("sources[{i}].signal");
        let (kind, amplitude) = match &s.signal {
            SignalSection::LogSweep {
                start_hz,
                end_hz,
                amplitude_pa_s,
            } => (
                SignalKind::LogSweep {
                    start_hz: *start_hz,
                    end_hz: *end_hz,
                },
                *amplitude_pa_s,
            ),
            SignalSection::BandNoise {
                low_hz,
                high_hz,
                amplitude_pa_s,
                seed,
            } => (
                SignalKind::BandNoise {
                    low_hz: *low_hz,
                    high_hz: *high_hz,
                    seed: seed.unwrap_or(self.seed.wrapping_add(i as u64)),
                },
                *amplitude_pa_s,
            ),
            SignalSection::Harmonic { freq_hz, amplitude_pa_s } => (SignalKind::Harmonic { freq_hz: *freq_hz }, *amplitude_pa_s),
            SignalSection::SamplesFromFile { file, amplitude_pa_s } => {
                let path = self.base_dir.join(file);
                let (_, values) = crate::io::read_signal_csv(&path)?;
                (SignalKind::Samples(values), *amplitude_pa_s)
            }
        };
        let mut spec = SignalSpec::new(kind, amplitude);
        if let Some(g) = s.gate {
            spec = spec.gated(Gate {
                start: g.start_step,
                length: g.steps,
                taper: g.taper,
            });
        }
        generate_signal(&spec, self.levels(), self.dt()).map_err(|e| core(e, &what))
    }

    /// Sources with their configured signals, used to synthesize targets.
    pub fn reference_sources(&self) -> AppResult<SourceSet> {
        let grid = self.grid()?;
        let levels = self.levels();
        let mut set = SourceSet::default();
        for (i, s) in self.sources.iter().enumerate() {
            let signal = self.reference_signal(i)?;
            let hw = self.half_width(s, &grid);
            let what = format!("sources[{i}]");
            match &s.motion {
                None => set.fixed.push(MonopoleSource::new(&grid, &s.position_m, hw, signal).map_err(|e| core(e, &what))?),
                Some(m) => {
                    let path = eased_path(&point(&s.position_m, &what)?, &point(&m.end_m, &what)?, levels);
                    set.moving.push(MovingSource::new(&grid, path, hw, signal).map_err(|e| core(e, &what))?);
                }
            }
        }
        Ok(set)
    }

    pub fn region(&self) -> AppResult<Region> {
        Ok(match &self.localize.region {
            RegionSection::All => Region::All,
            RegionSection::Box { min_m, max_m } => Region::Box {
                min: point(min_m, "localize.region.min_m")?,
                max: point(max_m, "localize.region.max_m")?,
            },
            RegionSection::Plane { axis, offset_m } => Region::Plane {
                axis: *axis,
                offset: *offset_m,
            },
        })
    }

    pub fn convergence(&self) -> ConvergenceSettings {
        ConvergenceSettings {
            max_loops: self.optimize.max_loops,
            tolerance: self.optimize.tolerance,
            patience: self.optimize.patience,
            max_trials: self.optimize.max_trials,
        }
    }

    /// Tracking window in steps.
    pub fn track_window(&self) -> AppResult<usize> {
        match (self.localize.window_steps, self.localize.track_freq_hz) {
            (Some(w), _) if w > 0 => Ok(w),
            (None, Some(f)) if f > 0.0 => Ok(adjsound_core::localize::period_in_steps(f, self.dt())),
            _ => Err(AppError::Config("localize: set window_steps or track_freq_hz".into())),
        }
    }
}

/// Path from `a` to `b` over `levels` levels that accelerates from rest and
/// decelerates to rest, fastest at mid-run.
pub fn eased_path(a: &[f64; 3], b: &[f64; 3], levels: usize) -> Vec<[f64; 3]> {
    let last = (levels.max(2) - 1) as f64;
    (0..levels)
        .map(|n| {
            let f = 0.5 * (1.0 - (std::f64::consts::PI * n as f64 / last).cos());
            [0, 1, 2].map(|k| a[k] + f * (b[k] - a[k]))
        })
        .collect()
}
