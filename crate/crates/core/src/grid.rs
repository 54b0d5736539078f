//! Sampled trajectories: the common currency of solvers, oracle and simulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block trades at the ends of the horizon.
///
/// `start = X0 - x(0+)` and `end = x(T-) - XT`, so a liquidation that sells
/// blocks at both ends has positive jumps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Jumps {
    pub start: f64,
    pub end: f64,
}

impl Jumps {
    pub const NONE: Jumps = Jumps {
        start: 0.0,
        end: 0.0,
    };

    pub fn is_none(&self) -> bool {
        self.start == 0.0 && self.end == 0.0
    }

    /// Signed trade quantity of the opening block.
    pub fn start_trade(&self) -> f64 {
        -self.start
    }

    /// Signed trade quantity of the closing block.
    pub fn end_trade(&self) -> f64 {
        -self.end
    }
}

/// Holdings on a strictly increasing grid spanning `[0, T]`.
///
/// The node at `t = 0` holds the post-jump value `x(0+)` and the node at
/// `t = T` the pre-jump value `x(T-)`. Between nodes holdings are linear, so
/// the trading rate is constant on each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTrajectory {
    times: Vec<f64>,
    holdings: Vec<f64>,
    jumps: Jumps,
}

impl GridTrajectory {
    pub fn new(times: Vec<f64>, holdings: Vec<f64>, jumps: Jumps) -> Result<Self> {
        validate_times(&times)?;
        if times[0] != 0.0 {
            return Err(Error::invalid("times", "grid must start at t = 0"));
        }
        if holdings.len() != times.len() {
            return Err(Error::invalid(
                "holdings",
                format!("expected {} values, got {}", times.len(), holdings.len()),
            ));
        }
        if holdings.iter().any(|x| !x.is_finite())
            || !jumps.start.is_finite()
            || !jumps.end.is_finite()
        {
            return Err(Error::invalid("holdings", "values must be finite"));
        }
        Ok(GridTrajectory {
            times,
            holdings,
            jumps,
        })
    }

    /// Samples `f` on `times` without jumps.
    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let holdings = times.iter().map(|&t| f(t)).collect();
        Self::new(times, holdings, Jumps::NONE)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn holdings(&self) -> &[f64] {
        &self.holdings
    }

    pub fn jumps(&self) -> Jumps {
        self.jumps
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("validated non-empty")
    }

    pub fn n_cells(&self) -> usize {
        self.times.len() - 1
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.times[i + 1] - self.times[i]
    }

    /// Piecewise-constant trading rate, one value per cell.
    pub fn rates(&self) -> Vec<f64> {
        self.times
            .windows(2)
            .zip(self.holdings.windows(2))
            .map(|(t, x)| (x[1] - x[0]) / (t[1] - t[0]))
            .collect()
    }

    /// Contractual holding at `t = 0`, before the opening block.
    pub fn start_holding(&self) -> f64 {
        self.holdings[0] + self.jumps.start
    }

    /// Contractual holding at `t = T`, after the closing block.
    pub fn end_holding(&self) -> f64 {
        self.holdings[self.holdings.len() - 1] - self.jumps.end
    }

    /// Piecewise-linear interpolation of the holdings at `t` in `[0, T]`.
    pub fn holding_at(&self, t: f64) -> f64 {
        let i = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return self.holdings[i],
            Err(i) => i.clamp(1, self.times.len() - 1),
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.holdings[i - 1] * (1.0 - w) + self.holdings[i] * w
    }

    /// Linear resampling onto another grid over the same horizon.
    pub fn resample(&self, times: Vec<f64>) -> Result<Self> {
        validate_times(&times)?;
        let horizon = self.horizon();
        if times[0] != 0.0 || (times[times.len() - 1] - horizon).abs() > 1e-12 * horizon {
            return Err(Error::invalid(
                "times",
                "resampling grid must span the same horizon",
            ));
        }
        let holdings = times.iter().map(|&t| self.holding_at(t)).collect();
        Self::new(times, holdings, self.jumps)
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::invalid("times", "need at least two nodes"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times", "nodes must be finite"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("times", "grid must be strictly increasing"));
    }
    Ok(())
}

/// `n_cells + 1` equally spaced nodes on `[0, horizon]`, endpoints exact.
pub fn uniform_grid(horizon: f64, n_cells: usize) -> Vec<f64> {
    let n = n_cells as f64;
    (0..=n_cells).map(|i| horizon * (i as f64 / n)).collect()
}
