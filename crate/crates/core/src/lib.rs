//! Optimal execution schedules under mean-variance utility with temporary
//! market impact.
//!
//! Two impact models are supported: memoryless impact (price recovers
//! instantly) and an exponential resilience kernel (impact decays at rate
//! `beta`). Closed-form trajectories live in [`closed_form`]; the grid solver
//! in [`oracle`] minimizes the same utility numerically and serves as an
//! independent check. [`montecarlo`] simulates realized PnL for any schedule.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod grid;
pub mod impact;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod objective;
pub mod oracle;

pub use closed_form::{
    particular_solution, risk_neutral_limit, sample, solve_delta_kernel, solve_exponential_kernel,
    Particular, TrajectorySolution,
};
pub use error::{Error, Result};
pub use grid::{uniform_grid, GridTrajectory, Jumps};
pub use impact::{convolve_impact, kernel_value, ImpactPath};
pub use model::{
    drift_at, normalize, DriftSpec, ExecutionProblem, KernelSpec, MarketParams, RiskSpec,
};
pub use montecarlo::{
    analytic_moments, simulate, AnalyticMoments, SimulationSetup, SimulationSummary,
};
pub use objective::{euler_residual, evaluate, ObjectiveReport};
pub use oracle::{compare, solve_grid_delta, solve_grid_kernel, Deviation, KernelOracle};
