//! Continuous adjoint of the Euler system: linearization matrices, the
//! mismatch objective, the adjoint and tangent-linear operators, the
//! backward sweep and source-signal gradients.

pub mod matrices;
pub mod objective;
pub mod rhs;
pub mod solver;
pub mod tangent;

pub use matrices::{assemble_matrices, LinearizationMatrices};
pub use objective::{adjoint_forcing_g, evaluate_objective, AdjointForcing, ObjectiveSpec};
pub use rhs::{adjoint_rhs, AdjointOperator, BaseState};
pub use solver::{
    gradient_wrt_source_signal, run_adjoint, run_adjoint_forced, AdjointSolver, AdjointTrajectory,
    GradientAccumulator,
};
pub use tangent::{run_tangent, tangent_linear_rhs};
