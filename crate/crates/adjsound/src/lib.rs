//! Scenario files, data formats and command-line pipelines around
//! `adjsound-core`.
//!
//! - [`config`]: TOML scenarios and built-in presets.
//! - [`io`]: CSV tables, raw snapshots with sidecars, PGM images.
//! - [`scenario`]: synthesis, optimization, localization, tracking.
//! - [`spectra`]: band-limited spectral comparison.
//! - [`verify`]: built-in verification suite.
//! - [`cli`]: the `adjsound` command.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod scenario;
pub mod spectra;
pub mod verify;

pub use config::ScenarioConfig;
pub use error::{AppError, AppResult};
