//! Command-line front end.

use crate::config::ScenarioConfig;
use crate::error::{AppError, AppResult};
use crate::scenario::{self, Layout};
use crate::{spectra, verify};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "adjsound", version, about = "Acoustic source reconstruction with adjoint Euler solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file, or the name of a built-in preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; `out/<scenario name>` when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for grid sweeps; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Forward run of the configured sources, with optional snapshots.
    Forward,
    /// Records the configured sources as twin targets.
    Synthesize,
    /// Recovers source signals from the targets.
    Optimize,
    /// Locates static sources from the first gradient.
    Localize,
    /// Tracks a moving source from the first gradient.
    Track,
    /// Runs the built-in verification suite.
    Verify,
    /// Writes PGM images of every raw snapshot in the output directory.
    Render,
}

impl Cli {
    fn scenario(&self) -> AppResult<ScenarioConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| AppError::Config("--config is required for this command".into()))?;
        let mut cfg = ScenarioConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn layout(&self, cfg: Option<&ScenarioConfig>) -> AppResult<Layout> {
        match (&self.output, cfg) {
            (Some(dir), _) => Ok(Layout::new(dir)),
            (None, Some(cfg)) => Ok(Layout::new(Path::new("out").join(&cfg.name))),
            (None, None) => Err(AppError::Config("--output is required for this command".into())),
        }
    }
}

/// Parses arguments, runs the command on the requested pool and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_with_threads(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_with_threads(cli: &Cli) -> AppResult<()> {
    match cli.threads {
        Some(0) => Err(AppError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Config(format!("--threads: {e}")))?
            .install(|| run(cli)),
        None => run(cli),
    }
}

fn ensure_targets(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<()> {
    if cfg.objective.targets_csv.is_none() && !layout.targets().exists() {
        println!("no targets in {}; synthesizing", layout.root().display());
        scenario::synthesize(cfg, layout)?;
    }
    Ok(())
}

fn save_config(cfg: &ScenarioConfig, layout: &Layout) -> AppResult<()> {
    let path = layout.root().join("scenario.toml");
    std::fs::create_dir_all(layout.root()).map_err(|e| AppError::io(layout.root(), e))?;
    std::fs::write(&path, cfg.to_toml()).map_err(|e| AppError::io(&path, e))
}

/// Runs one command.
pub fn run(cli: &Cli) -> AppResult<()> {
    match cli.command {
        Command::Verify => {
            let checks = verify::suite()?;
            let mut failed = Vec::new();
            for c in &checks {
                println!("{} {}: {} [{:.1} s]", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.seconds);
                if !c.passed {
                    failed.push(c.name);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(AppError::Verification(failed.join(", ")))
            }
        }
        Command::Render => {
            let cfg = cli.config.as_ref().map(|_| cli.scenario()).transpose()?;
            let layout = cli.layout(cfg.as_ref())?;
            for path in scenario::render_all(layout.root())? {
                println!("{}", path.display());
            }
            Ok(())
        }
        command => {
            let cfg = cli.scenario()?;
            let layout = cli.layout(Some(&cfg))?;
            save_config(&cfg, &layout)?;
            match command {
                Command::Forward => {
                    let rec = scenario::forward(&cfg, &layout)?;
                    println!("recorded {} microphones over {} levels", rec.mics(), rec.levels());
                }
                Command::Synthesize => {
                    let s = scenario::synthesize(&cfg, &layout)?;
                    println!("wrote {} ({} microphones)", layout.targets().display(), s.targets.mics());
                }
                Command::Optimize => {
                    ensure_targets(&cfg, &layout)?;
                    let out = scenario::optimize(&cfg, &layout)?;
                    let j = out.run.objectives();
                    let last = out.run.objective.unwrap_or(f64::NAN);
                    println!(
                        "{} loops, J/J0 = {:.3e}, {:?}",
                        j.len(),
                        last / j.first().copied().unwrap_or(last),
                        out.run.termination
                    );
                    if cfg.objective.band_hz.is_some() && layout.reference_probes().exists() && out.probes.mics() > 0 {
                        for (m, bins) in scenario::compare_probes(&cfg, &layout, &out.probes)?.iter().enumerate() {
                            let (db, cycles) = spectra::worst(bins);
                            println!("probe {m}: max |dB| {db:.3}, max |phase| {cycles:.4} cycles");
                        }
                    }
                }
                Command::Localize => {
                    ensure_targets(&cfg, &layout)?;
                    let out = scenario::localize(&cfg, &layout)?;
                    for (i, p) in out.peaks.peaks.iter().enumerate() {
                        println!("peak {i}: ({:.4}, {:.4}, {:.4}) m", p.position[0], p.position[1], p.position[2]);
                    }
                }
                Command::Track => {
                    ensure_targets(&cfg, &layout)?;
                    let out = scenario::track(&cfg, &layout)?;
                    println!("wrote {} ({} levels)", layout.track().display(), out.track.len());
                }
                Command::Verify | Command::Render => unreachable!("handled above"),
            }
            Ok(())
        }
    }
}
