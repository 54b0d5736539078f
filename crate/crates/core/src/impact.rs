//! Temporary impact as a linear convolution of the trading rate.
//!
//! `h(t) = -eta_tilde * F(t)` with `F(t) = int_0^t K(t - tau) x'(tau) dtau`.
//! The execution price is the unaffected price minus `h`, so `h` opposes the
//! trade: buyers pay more, sellers receive less. Rates are piecewise constant
//! on grid cells and block trades are atoms at `t = 0` and `t = T`; the
//! exponential kernel is integrated exactly over each cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridTrajectory;
use crate::model::KernelSpec;
use crate::numeric::CompensatedSum;

/// Impact `h` sampled at the trajectory nodes.
///
/// The first node carries the value just after the opening block and the last
/// node the value just before the closing block. Under the memoryless kernel
/// node `j > 0` reports the rate of the cell ending at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Kernel weight `K(dt)`; only defined for smooth kernels.
pub fn kernel_value(kernel: &KernelSpec, dt: f64) -> Result<f64> {
    if !(dt >= 0.0) {
        return Err(Error::Domain {
            what: "dt",
            value: dt,
            reason: "kernel lag must be non-negative",
        });
    }
    match *kernel {
        KernelSpec::DiracDelta => Err(Error::UnsupportedKernel("delta")),
        KernelSpec::Exponential { beta } => Ok(beta * (-beta * dt).exp()),
    }
}

fn check_inputs(traj: &GridTrajectory, kernel: &KernelSpec, eta_tilde: f64) -> Result<()> {
    kernel.validate()?;
    if !(eta_tilde.is_finite() && eta_tilde >= 0.0) {
        return Err(Error::invalid(
            "eta_tilde",
            format!("must be non-negative, got {eta_tilde}"),
        ));
    }
    if matches!(kernel, KernelSpec::DiracDelta) && !traj.jumps().is_none() {
        return Err(Error::invalid(
            "jumps",
            "block trades have unbounded cost under the memoryless kernel",
        ));
    }
    Ok(())
}

/// Average impact experienced by each trade of a trajectory.
///
/// The execution cost is `-(sum of trade quantity * mean impact)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactLedger {
    /// Mean of `h` over each cell.
    pub cell_means: Vec<f64>,
    /// Mean impact felt by the opening block while it executes.
    pub start_block: f64,
    /// Mean impact felt by the closing block while it executes.
    pub end_block: f64,
    /// `h` at each node, with the boundary conventions of [`ImpactPath`].
    pub node_values: Vec<f64>,
}

impl ImpactLedger {
    /// `-int h dx`, positive when trading is costly.
    pub fn execution_cost(&self, traj: &GridTrajectory) -> f64 {
        let x = traj.holdings();
        let jumps = traj.jumps();
        let mut cost = CompensatedSum::default();
        cost.add(-jumps.start_trade() * self.start_block);
        for (i, h) in self.cell_means.iter().enumerate() {
            cost.add(-(x[i + 1] - x[i]) * h);
        }
        cost.add(-jumps.end_trade() * self.end_block);
        cost.value()
    }
}

/// Runs the kernel state forward across the grid.
pub fn impact_ledger(
    traj: &GridTrajectory,
    kernel: &KernelSpec,
    eta_tilde: f64,
) -> Result<ImpactLedger> {
    check_inputs(traj, kernel, eta_tilde)?;
    let rates = traj.rates();
    match *kernel {
        KernelSpec::DiracDelta => {
            let cell_means: Vec<f64> = rates.iter().map(|r| -eta_tilde * r).collect();
            // Left-continuous at nodes, so h(t_j) only sees rates before t_j.
            let mut node_values = Vec::with_capacity(cell_means.len() + 1);
            node_values.push(cell_means[0]);
            node_values.extend_from_slice(&cell_means);
            Ok(ImpactLedger {
                cell_means,
                start_block: 0.0,
                end_block: 0.0,
                node_values,
            })
        }
        KernelSpec::Exponential { beta } => {
            let jumps = traj.jumps();
            let q0 = jumps.start_trade();
            let q_end = jumps.end_trade();
            // Kernel state F, excluding the eta_tilde factor.
            let mut state = beta * q0;
            let mut node_values = Vec::with_capacity(rates.len() + 1);
            let mut cell_means = Vec::with_capacity(rates.len());
            node_values.push(-eta_tilde * state);
            for (i, &r) in rates.iter().enumerate() {
                let w = traj.cell_width(i);
                let decay = (-beta * w).exp();
                let mass = -(-beta * w).exp_m1();
                let integral = state * mass / beta + r * (w - mass / beta);
                cell_means.push(-eta_tilde * integral / w);
                state = state * decay + r * mass;
                node_values.push(-eta_tilde * state);
            }
            Ok(ImpactLedger {
                cell_means,
                start_block: -eta_tilde * beta * q0 / 2.0,
                end_block: -eta_tilde * (state + beta * q_end / 2.0),
                node_values,
            })
        }
    }
}

/// Impact path at the trajectory nodes.
pub fn convolve_impact(
    traj: &GridTrajectory,
    kernel: &KernelSpec,
    eta_tilde: f64,
) -> Result<ImpactPath> {
    let ledger = impact_ledger(traj, kernel, eta_tilde)?;
    Ok(ImpactPath {
        times: traj.times().to_vec(),
        values: ledger.node_values,
    })
}

/// Execution cost `-int h dx` including block trades.
pub fn execution_cost(traj: &GridTrajectory, kernel: &KernelSpec, eta_tilde: f64) -> Result<f64> {
    Ok(impact_ledger(traj, kernel, eta_tilde)?.execution_cost(traj))
}

/// Impact at an arbitrary time by direct summation over past cells.
///
/// Independent of the recursion in [`impact_ledger`]; at `t = T` the closing
/// block is not included.
pub fn impact_at(
    traj: &GridTrajectory,
    kernel: &KernelSpec,
    eta_tilde: f64,
    t: f64,
) -> Result<f64> {
    check_inputs(traj, kernel, eta_tilde)?;
    let times = traj.times();
    if !(t >= 0.0 && t <= traj.horizon()) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            reason: "outside the trajectory horizon",
        });
    }
    let rates = traj.rates();
    match *kernel {
        KernelSpec::DiracDelta => {
            let cell = times.partition_point(|&s| s < t).saturating_sub(1);
            Ok(-eta_tilde * rates[cell])
        }
        KernelSpec::Exponential { beta } => {
            let mut f = CompensatedSum::default();
            f.add(beta * traj.jumps().start_trade() * (-beta * t).exp());
            for (i, &r) in rates.iter().enumerate() {
                let (a, b) = (times[i], times[i + 1]);
                if a >= t {
                    break;
                }
                let end = b.min(t);
                f.add(r * ((-beta * (t - end)).exp() - (-beta * (t - a)).exp()));
            }
            Ok(-eta_tilde * f.value())
        }
    }
}
