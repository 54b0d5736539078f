//! Mean-variance utility of a trajectory and the Euler residual of a closed form.
//!
//! The utility is maximized:
//! `total = int s0 alpha x dt - (-int h dx) - lambda int (s0 sigma x)^2 dt`.
//! The drift and risk integrals use the trapezoid rule on the trajectory
//! nodes; the impact integral is exact for piecewise-linear holdings.

use serde::{Deserialize, Serialize};

use crate::closed_form::{self, TrajectorySolution};
use crate::error::{Error, Result};
use crate::grid::GridTrajectory;
use crate::impact;
use crate::model::ExecutionProblem;
use crate::numeric::trapezoid;

/// Utility split into its three components, in currency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub alpha_gain: f64,
    /// Execution cost of temporary impact, positive when costly.
    pub impact_cost: f64,
    pub risk_penalty: f64,
    pub total: f64,
}

impl ObjectiveReport {
    fn new(alpha_gain: f64, impact_cost: f64, risk_penalty: f64) -> Self {
        ObjectiveReport {
            alpha_gain,
            impact_cost,
            risk_penalty,
            total: alpha_gain - impact_cost - risk_penalty,
        }
    }
}

/// Boundary holdings must match the problem to this tolerance, scaled by
/// `max(1, |X0|, |XT|)`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_boundaries(traj: &GridTrajectory, problem: &ExecutionProblem) -> Result<()> {
    if traj.n_cells() < 2 {
        return Err(Error::invalid("grid", "need at least two cells"));
    }
    if (traj.horizon() - problem.horizon).abs() > 1e-12 * problem.horizon {
        return Err(Error::invalid(
            "grid",
            "trajectory horizon differs from the problem",
        ));
    }
    let tol = BOUNDARY_TOLERANCE * 1f64.max(problem.x0.abs()).max(problem.x_t.abs());
    if (traj.start_holding() - problem.x0).abs() > tol {
        return Err(Error::invalid(
            "x0",
            format!(
                "trajectory starts at {} but the problem requires {}",
                traj.start_holding(),
                problem.x0
            ),
        ));
    }
    if (traj.end_holding() - problem.x_t).abs() > tol {
        return Err(Error::invalid(
            "xT",
            format!(
                "trajectory ends at {} but the problem requires {}",
                traj.end_holding(),
                problem.x_t
            ),
        ));
    }
    Ok(())
}

/// Evaluates the utility of a sampled trajectory, block trades included.
pub fn evaluate(traj: &GridTrajectory, problem: &ExecutionProblem) -> Result<ObjectiveReport> {
    check_boundaries(traj, problem)?;
    let times = traj.times();
    let x = traj.holdings();
    let s0 = problem.market.s0;
    let alpha_gain = trapezoid(times, |i| s0 * problem.drift.rate(times[i]) * x[i]);
    let risk_weight = problem.eta_tilde * problem.lambda_norm();
    let risk_penalty = risk_weight * trapezoid(times, |i| x[i] * x[i]);
    let impact_cost = impact::execution_cost(traj, &problem.kernel, problem.eta_tilde)?;
    Ok(ObjectiveReport::new(alpha_gain, impact_cost, risk_penalty))
}

/// Largest absolute residual of the interior Euler equation over `probes`,
/// which must lie strictly inside `(0, T)`.
pub fn euler_residual(
    sol: &TrajectorySolution,
    problem: &ExecutionProblem,
    probes: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in probes {
        if !(t > 0.0 && t < problem.horizon) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                reason: "residual probes must lie strictly inside (0, T)",
            });
        }
        let r = sol.accel(t) - problem.k * problem.k * sol.interior(t) - problem.ode_forcing(t);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Residual relative to the size of the ODE terms.
pub fn relative_euler_residual(
    sol: &TrajectorySolution,
    problem: &ExecutionProblem,
    probes: &[f64],
) -> Result<f64> {
    closed_form::relative_residual(sol, problem, probes)
}
