//! Finite-difference time-domain solver for the compressible Euler equations
//! in pressure formulation, together with its continuous adjoint.
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature only enables `std::error::Error` plumbing; `parallel` distributes
//! grid-line sweeps over a rayon pool. Results never depend on the number of
//! workers: every sweep processes independent lines with a fixed sequential
//! arithmetic order and all reductions run in a fixed order on one thread.
//!
//! Module map:
//!
//! - [`grid`], [`field`], [`blob`], [`trajectory`]: grid geometry, field
//!   containers, Gaussian supports and forward-trajectory storage.
//! - [`numerics`]: compact sixth-order first derivative, compact low-pass
//!   filter, tridiagonal solver and classical RK4.
//! - [`forward`]: Euler right-hand side, monopole sources, characteristic
//!   boundaries, sponge layers, microphones and the forward time loop.
//! - [`adjoint`]: linearization matrices, adjoint right-hand side, tangent
//!   linear operator, backward sweep and source-signal gradients.
//! - [`optimize`]: objective evaluation and the steepest-descent loop.
//! - [`localize`]: summed adjoint sensitivities, peak picking and tracking.
//! - [`signal`], [`array`]: reference signal and microphone array generators.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adjoint;
pub mod array;
pub mod blob;
pub mod error;
pub mod field;
pub mod forward;
pub mod grid;
pub mod localize;
pub mod numerics;
pub mod optimize;
pub mod signal;
pub mod trajectory;

mod dual;
mod math;
mod par;

pub use error::{Error, Result};
pub use field::{AdjointStateField, Packed, ScalarField, StateField};
pub use grid::{build_grid, GasModel, Grid};
pub use trajectory::{Replay, StoragePolicy, Trajectory};
