//! Monte Carlo simulation of realized PnL for a fixed schedule.
//!
//! The unaffected price follows arithmetic Brownian motion
//! `dS = s0 alpha(t) dt + s0 sigma dW`. Trades execute at the unaffected
//! price minus the impact `h` from [`crate::impact`], block trades included.
//! Cash accounting telescopes to `PnL = sum xbar_i dS_i - execution cost`,
//! where `xbar_i` is the mean holding over step `i`.
//!
//! Randomness is counter based: the normal draw for step `i` of path `p` is a
//! pure function of `(seed, p, i)` (ChaCha8 keyed by `seed`, stream `p`, two
//! 64-bit words per step through Box-Muller), so results do not depend on the
//! thread schedule.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{uniform_grid, GridTrajectory};
use crate::impact::impact_ledger;
use crate::model::{DriftSpec, ExecutionProblem, KernelSpec};
use crate::numeric::{trapezoid, CompensatedSum};

/// Market inputs of the simulator. Unlike [`crate::model::MarketParams`] a
/// zero volatility or zero impact is allowed here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub s0: f64,
    pub sigma: f64,
    pub eta_tilde: f64,
    pub drift: DriftSpec,
    pub kernel: KernelSpec,
}

impl SimulationSetup {
    pub fn new(
        s0: f64,
        sigma: f64,
        eta_tilde: f64,
        drift: DriftSpec,
        kernel: KernelSpec,
    ) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::invalid("s0", format!("must be positive, got {s0}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be non-negative, got {sigma}"),
            ));
        }
        if !(eta_tilde.is_finite() && eta_tilde >= 0.0) {
            return Err(Error::invalid(
                "eta",
                format!("must be non-negative, got {eta_tilde}"),
            ));
        }
        drift.validate()?;
        kernel.validate()?;
        Ok(SimulationSetup {
            s0,
            sigma,
            eta_tilde,
            drift,
            kernel,
        })
    }
}

impl From<&ExecutionProblem> for SimulationSetup {
    fn from(p: &ExecutionProblem) -> Self {
        SimulationSetup {
            s0: p.market.s0,
            sigma: p.market.sigma,
            eta_tilde: p.eta_tilde,
            drift: p.drift,
            kernel: p.kernel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub mean_pnl: f64,
    pub var_pnl: f64,
    pub std_error_mean: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMoments {
    pub expected_pnl: f64,
    pub pnl_variance: f64,
}

/// Sequential normal draws of one path.
struct PathNoise(ChaCha8Rng);

impl PathNoise {
    fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        PathNoise(rng)
    }

    fn next(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.0.next_u64() >> 11) as f64 + 1.0) * SCALE;
        let u2 = (self.0.next_u64() >> 11) as f64 * SCALE;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Standard normal draw for `(seed, path, step)`.
pub fn gaussian(seed: u64, path: u64, step: u64) -> f64 {
    let mut noise = PathNoise::new(seed, path);
    // Two u64 per step, i.e. four 32-bit words.
    noise.0.set_word_pos(4 * step as u128);
    noise.next()
}

/// Expected PnL and its variance from the utility integrands, with the same
/// quadrature as [`crate::objective::evaluate`].
pub fn analytic_moments(
    traj: &GridTrajectory,
    problem: &ExecutionProblem,
) -> Result<AnalyticMoments> {
    analytic_moments_with(&SimulationSetup::from(problem), traj)
}

pub fn analytic_moments_with(
    setup: &SimulationSetup,
    traj: &GridTrajectory,
) -> Result<AnalyticMoments> {
    let times = traj.times();
    let x = traj.holdings();
    let gain = trapezoid(times, |i| setup.s0 * setup.drift.rate(times[i]) * x[i]);
    let cost = impact_ledger(traj, &setup.kernel, setup.eta_tilde)?.execution_cost(traj);
    let vol = setup.s0 * setup.sigma;
    let variance = trapezoid(times, |i| {
        let v = x[i] * vol;
        v * v
    });
    Ok(AnalyticMoments {
        expected_pnl: gain - cost,
        pnl_variance: variance,
    })
}

pub fn simulate(
    problem: &ExecutionProblem,
    traj: &GridTrajectory,
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<SimulationSummary> {
    simulate_with(&SimulationSetup::from(problem), traj, n_paths, seed, dt)
}

/// Simulates `n_paths` price paths on a uniform grid of step `dt`.
///
/// The trajectory is linearly resampled onto the simulation grid when the
/// two grids differ.
pub fn simulate_with(
    setup: &SimulationSetup,
    traj: &GridTrajectory,
    n_paths: usize,
    seed: u64,
    dt: f64,
) -> Result<SimulationSummary> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "need at least one path"));
    }
    let horizon = traj.horizon();
    let steps = (horizon / dt).round();
    if steps < 1.0 || (steps * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::invalid(
            "dt",
            format!("{dt} does not divide the horizon {horizon}"),
        ));
    }
    let steps = steps as usize;
    let grid = uniform_grid(horizon, steps);
    let resampled;
    let path = if traj.times() == grid.as_slice() {
        traj
    } else {
        resampled = traj.resample(grid)?;
        &resampled
    };
    let times = path.times();
    let x = path.holdings();

    let cost = impact_ledger(path, &setup.kernel, setup.eta_tilde)?.execution_cost(path);
    let mut drift_part = CompensatedSum::default();
    let mut noise_weights = Vec::with_capacity(steps);
    for i in 0..steps {
        let held = 0.5 * (x[i] + x[i + 1]);
        let width = times[i + 1] - times[i];
        drift_part.add(held * setup.s0 * setup.drift.integral(times[i], times[i + 1]));
        noise_weights.push(held * setup.s0 * setup.sigma * width.sqrt());
    }
    let deterministic = drift_part.value() - cost;

    let pnls: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut noise = PathNoise::new(seed, p);
            let mut acc = CompensatedSum::default();
            acc.add(deterministic);
            for w in &noise_weights {
                acc.add(w * noise.next());
            }
            acc.value()
        })
        .collect();

    let n = n_paths as f64;
    let mean = pnls.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = if n_paths > 1 {
        pnls.iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(SimulationSummary {
        mean_pnl: mean,
        var_pnl: var,
        std_error_mean: (var / n).sqrt(),
        n_paths,
        seed,
        dt,
    })
}
