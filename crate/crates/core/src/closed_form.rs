//! Analytic optimal trajectories.
//!
//! Every solution has the form
//!
//! ```text
//! x(t) = p(t) + B * [ L * sinh(k (T - t + l)) + R * sinh(k (t + l)) ] / sinh(k (T + 2 l))
//! ```
//!
//! on the open interval, where `p` is a particular solution of the interior
//! ODE, `l` is a boundary-layer length (`A = k l`) and `L`, `R` are the
//! boundary mismatches `X0 - p(0)` and `XT - p(T)`. The memoryless kernel has
//! `l = 0`, `B = 1` and no jumps. The exponential kernel has
//! `A = atanh(k / beta)`, `B = beta / sqrt(lambda + beta^2)` and block trades
//! at both ends that absorb the difference between `x(0+)`, `x(T-)` and the
//! contractual boundary holdings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{validate_times, GridTrajectory, Jumps};
use crate::model::{DriftSpec, ExecutionProblem, KernelSpec};
use crate::numeric::{cosh_ratio, sinh_ratio};

/// Relative gap `|gamma^2 - k^2|` below which the resonant form is used.
pub const RESONANCE_EPS: f64 = 1e-9;

/// Relative Euler residual accepted at construction.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const SELF_CHECK_PROBES: usize = 64;

/// Particular solution of `x'' - k^2 x = -f0 * exp(-gamma t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Particular {
    None,
    /// `coef * exp(-gamma t)`.
    ExpDecay {
        coef: f64,
        gamma: f64,
    },
    /// `coef * t * exp(-gamma t)` at `gamma = k`.
    Resonant {
        coef: f64,
        gamma: f64,
    },
    /// `coef`, the stationary holding under a constant drift.
    Constant {
        coef: f64,
    },
}

impl Particular {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Particular::None => 0.0,
            Particular::ExpDecay { coef, gamma } => coef * (-gamma * t).exp(),
            Particular::Resonant { coef, gamma } => coef * t * (-gamma * t).exp(),
            Particular::Constant { coef } => coef,
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Particular::None | Particular::Constant { .. } => 0.0,
            Particular::ExpDecay { coef, gamma } => -gamma * coef * (-gamma * t).exp(),
            Particular::Resonant { coef, gamma } => coef * (1.0 - gamma * t) * (-gamma * t).exp(),
        }
    }

    pub fn accel(&self, t: f64) -> f64 {
        match *self {
            Particular::None | Particular::Constant { .. } => 0.0,
            Particular::ExpDecay { coef, gamma } => gamma * gamma * coef * (-gamma * t).exp(),
            Particular::Resonant { coef, gamma } => {
                coef * gamma * (gamma * t - 2.0) * (-gamma * t).exp()
            }
        }
    }

    /// Same form with the opposite sign.
    pub fn flipped(&self) -> Self {
        match *self {
            Particular::None => Particular::None,
            Particular::ExpDecay { coef, gamma } => Particular::ExpDecay { coef: -coef, gamma },
            Particular::Resonant { coef, gamma } => Particular::Resonant { coef: -coef, gamma },
            Particular::Constant { coef } => Particular::Constant { coef: -coef },
        }
    }
}

/// Particular solution of `x'' - k^2 x = -forcing0 * exp(-gamma t)` for the
/// drift's decay rate `gamma`.
///
/// `forcing0` is `alpha_tilde0` under the memoryless kernel. Piecewise drifts
/// have no closed form and are rejected.
pub fn particular_solution(drift: &DriftSpec, k: f64, forcing0: f64) -> Result<Particular> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::invalid(
            "k",
            format!("must be non-negative, got {k}"),
        ));
    }
    let gamma = match *drift {
        DriftSpec::Zero => return Ok(Particular::None),
        DriftSpec::ConstantLocal { t1, .. } if t1.is_infinite() => 0.0,
        DriftSpec::ConstantLocal { .. } => {
            return Err(Error::NoClosedForm(
                "drift switching off inside the horizon; use the grid oracle".into(),
            ))
        }
        DriftSpec::ExpDecay { gamma, .. } => gamma,
    };
    if forcing0 == 0.0 {
        return Ok(Particular::None);
    }
    let (k2, g2) = (k * k, gamma * gamma);
    if gamma == 0.0 {
        if k == 0.0 {
            return Err(Error::Unbounded(
                "a risk-neutral trader facing a persistent drift has no stationary position".into(),
            ));
        }
        return Ok(Particular::Constant {
            coef: forcing0 / k2,
        });
    }
    if (g2 - k2).abs() <= RESONANCE_EPS * k2.max(g2) {
        return Ok(Particular::Resonant {
            coef: forcing0 / (2.0 * k),
            gamma,
        });
    }
    Ok(Particular::ExpDecay {
        coef: forcing0 / (k2 - g2),
        gamma,
    })
}

/// A closed-form trajectory with explicit block trades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySolution {
    pub x0: f64,
    pub x_t: f64,
    pub horizon: f64,
    pub k: f64,
    /// Boundary-layer constant `A`.
    pub shift: f64,
    /// Amplitude `B`.
    pub amplitude: f64,
    /// Coefficient of the block decaying away from `t = 0`.
    pub left_block: f64,
    /// Coefficient of the block growing towards `t = T`.
    pub right_block: f64,
    pub particular: Particular,
    pub jumps: Jumps,
    /// Boundary-layer length `A / k` (`1 / beta` in the risk-neutral limit).
    layer: f64,
}

impl TrajectorySolution {
    fn blocks(&self, t: f64) -> (f64, f64) {
        let span = self.horizon + 2.0 * self.layer;
        (
            sinh_ratio(self.k, self.horizon - t + self.layer, span),
            sinh_ratio(self.k, t + self.layer, span),
        )
    }

    /// Smooth interior holdings; at the endpoints this is `x(0+)` and `x(T-)`.
    pub fn interior(&self, t: f64) -> f64 {
        let (l, r) = self.blocks(t);
        self.particular.value(t) + self.amplitude * (self.left_block * l + self.right_block * r)
    }

    /// Contractual holdings: `X0` at `t = 0`, `XT` at `t = T`, interior otherwise.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.x0
        } else if t >= self.horizon {
            self.x_t
        } else {
            self.interior(t)
        }
    }

    /// Analytic trading rate on the open interval.
    pub fn rate(&self, t: f64) -> f64 {
        let span = self.horizon + 2.0 * self.layer;
        let l = cosh_ratio(self.k, self.horizon - t + self.layer, span);
        let r = cosh_ratio(self.k, t + self.layer, span);
        self.particular.rate(t) + self.amplitude * (self.right_block * r - self.left_block * l)
    }

    /// Analytic second derivative on the open interval.
    pub fn accel(&self, t: f64) -> f64 {
        let (l, r) = self.blocks(t);
        self.particular.accel(t)
            + self.k * self.k * self.amplitude * (self.left_block * l + self.right_block * r)
    }

    /// Straight line from `x0` to `x_t` with no jumps.
    pub fn linear(x0: f64, x_t: f64, horizon: f64) -> Self {
        TrajectorySolution {
            x0,
            x_t,
            horizon,
            k: 0.0,
            shift: 0.0,
            amplitude: 1.0,
            left_block: x0,
            right_block: x_t,
            particular: Particular::None,
            jumps: Jumps::NONE,
            layer: 0.0,
        }
    }

    /// Samples the solution; boundary nodes carry `x(0+)` and `x(T-)`.
    pub fn sample(&self, times: &[f64]) -> Result<GridTrajectory> {
        sample(self, times)
    }
}

/// Evaluates holdings on `times`, which must lie in `[0, T]`.
pub fn sample(sol: &TrajectorySolution, times: &[f64]) -> Result<GridTrajectory> {
    validate_times(times)?;
    let mut holdings = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=sol.horizon).contains(&t) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                reason: "sample node outside [0, T]",
            });
        }
        holdings.push(if t == 0.0 {
            sol.x0 - sol.jumps.start
        } else if t == sol.horizon {
            sol.x_t + sol.jumps.end
        } else {
            sol.interior(t)
        });
    }
    GridTrajectory::new(times.to_vec(), holdings, sol.jumps)
}

/// Supremum over interior probes of `|x'' - k^2 x - f(t)|`, relative to the
/// magnitude of the terms.
pub fn relative_residual(
    sol: &TrajectorySolution,
    problem: &ExecutionProblem,
    probes: &[f64],
) -> Result<f64> {
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for &t in probes {
        if !(t > 0.0 && t < problem.horizon) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                reason: "residual probes must lie strictly inside (0, T)",
            });
        }
        let (acc, x, f) = (sol.accel(t), sol.interior(t), problem.ode_forcing(t));
        let k2x = problem.k * problem.k * x;
        worst = worst.max((acc - k2x - f).abs());
        scale = scale.max(acc.abs() + k2x.abs() + f.abs());
    }
    Ok(if worst == 0.0 { 0.0 } else { worst / scale })
}

fn self_check(sol: TrajectorySolution, problem: &ExecutionProblem) -> Result<TrajectorySolution> {
    let n = SELF_CHECK_PROBES as f64;
    let probes: Vec<f64> = (1..SELF_CHECK_PROBES)
        .map(|i| problem.horizon * i as f64 / n)
        .collect();
    let residual = relative_residual(&sol, problem, &probes)?;
    if residual > RESIDUAL_TOLERANCE {
        return Err(Error::ResidualCheck {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(sol)
}

/// Drift as seen by the closed forms: a local drift lasting past the horizon
/// is the same as a permanent one.
fn closed_form_drift(problem: &ExecutionProblem) -> DriftSpec {
    match problem.drift {
        DriftSpec::ConstantLocal { alpha0, t1 } if t1 >= problem.horizon => {
            DriftSpec::ExpDecay { alpha0, gamma: 0.0 }
        }
        other => other,
    }
}

/// Builds the memoryless-kernel trajectory around a given particular solution
/// and verifies it against the Euler equation.
pub fn assemble(problem: &ExecutionProblem, particular: Particular) -> Result<TrajectorySolution> {
    let (shift, amplitude, layer) = match problem.kernel {
        KernelSpec::DiracDelta => (0.0, 1.0, 0.0),
        KernelSpec::Exponential { beta } => {
            let k = problem.k;
            let shift = (k / beta).atanh();
            let layer = if k > 0.0 { shift / k } else { 1.0 / beta };
            (
                shift,
                beta / (problem.lambda_norm() + beta * beta).sqrt(),
                layer,
            )
        }
    };
    let t_end = problem.horizon;
    let mut sol = TrajectorySolution {
        x0: problem.x0,
        x_t: problem.x_t,
        horizon: t_end,
        k: problem.k,
        shift,
        amplitude,
        left_block: problem.x0 - particular.value(0.0),
        right_block: problem.x_t - particular.value(t_end),
        particular,
        jumps: Jumps::NONE,
        layer,
    };
    if let KernelSpec::Exponential { .. } = problem.kernel {
        sol.jumps = Jumps {
            start: problem.x0 - sol.interior(0.0),
            end: sol.interior(t_end) - problem.x_t,
        };
    }
    self_check(sol, problem)
}

/// Optimal trajectory under memoryless impact.
pub fn solve_delta_kernel(problem: &ExecutionProblem) -> Result<TrajectorySolution> {
    if problem.kernel != KernelSpec::DiracDelta {
        return Err(Error::invalid("kernel", "expected the memoryless kernel"));
    }
    let particular =
        particular_solution(&closed_form_drift(problem), problem.k, problem.alpha_tilde0)?;
    assemble(problem, particular)
}

/// Optimal trajectory under the exponential resilience kernel with a zero or
/// constant drift.
pub fn solve_exponential_kernel(problem: &ExecutionProblem) -> Result<TrajectorySolution> {
    let beta = match problem.kernel {
        KernelSpec::Exponential { beta } => beta,
        KernelSpec::DiracDelta => {
            return Err(Error::invalid("kernel", "expected the exponential kernel"))
        }
    };
    if problem.lambda_norm() == 0.0 {
        return Err(Error::invalid(
            "lambda",
            "risk-neutral problems under the exponential kernel use risk_neutral_limit",
        ));
    }
    let drift = closed_form_drift(problem);
    if let DriftSpec::ExpDecay { gamma, .. } = drift {
        if gamma != 0.0 {
            return Err(Error::NoClosedForm(
                "decaying drift under the exponential kernel; use the grid oracle".into(),
            ));
        }
    }
    // Constant forcing of the interior ODE, -beta^2 alpha_tilde / (lambda + beta^2).
    let b2 = beta * beta;
    let forcing0 = b2 * problem.alpha_tilde0 / (problem.lambda_norm() + b2);
    let particular = particular_solution(&drift, problem.k, forcing0)?;
    assemble(problem, particular)
}

/// Risk-neutral, zero-drift optimum under the exponential kernel: equal
/// blocks `(X0 - XT) / (beta T + 2)` at both ends and a straight line between.
pub fn risk_neutral_limit(
    x0: f64,
    x_t: f64,
    horizon: f64,
    beta: f64,
) -> Result<TrajectorySolution> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid("horizon", "horizon must be positive"));
    }
    KernelSpec::Exponential { beta }.validate()?;
    let jump = (x0 - x_t) / (beta * horizon + 2.0);
    Ok(TrajectorySolution {
        x0,
        x_t,
        horizon,
        k: 0.0,
        shift: 0.0,
        amplitude: 1.0,
        left_block: x0,
        right_block: x_t,
        particular: Particular::None,
        jumps: Jumps {
            start: jump,
            end: jump,
        },
        layer: 1.0 / beta,
    })
}

/// Dispatches to the closed form matching the problem's kernel.
pub fn solve(problem: &ExecutionProblem) -> Result<TrajectorySolution> {
    match problem.kernel {
        KernelSpec::DiracDelta => solve_delta_kernel(problem),
        KernelSpec::Exponential { beta } if problem.lambda_norm() == 0.0 => {
            if !problem.drift.is_zero() {
                return Err(Error::NoClosedForm(
                    "drift without risk aversion under the exponential kernel; use the grid oracle"
                        .into(),
                ));
            }
            risk_neutral_limit(problem.x0, problem.x_t, problem.horizon, beta)
        }
        KernelSpec::Exponential { .. } => solve_exponential_kernel(problem),
    }
}
