//! Forward Euler solver: right-hand side, boundaries, sources and the time
//! loop.

pub mod boundary;
pub mod mic;
pub mod rhs;
pub mod solver;
pub mod source;
pub mod sponge;

pub use boundary::Face;
pub use mic::{sample_microphones, MicrophoneArray, Recording};
pub use rhs::{apply_characteristic_bcs, euler_rhs, ForwardOperator};
pub use solver::{run_forward, ForwardRun, ForwardSolver, SolverConfig};
pub use source::{sample_at, MonopoleSource, MovingSource, SourceSet};
pub use sponge::{apply_sponge, SpongeLayer, SpongeProfile};
