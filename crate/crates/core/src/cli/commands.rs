//! The four subcommands and their artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Schedule};
use crate::closed_form::{self, TrajectorySolution};
use crate::error::Error;
use crate::grid::{uniform_grid, GridTrajectory, Jumps};
use crate::impact;
use crate::model::{ExecutionProblem, KernelSpec};
use crate::montecarlo::{analytic_moments_with, simulate_with, SimulationSummary};
use crate::objective::{self, ObjectiveReport};
use crate::oracle;

pub const CSV_HEADER: &str = "t,holdings,rate,impact";

/// Closed-form tolerances, relative to the trajectory scale.
pub const DELTA_SUP_TOLERANCE: f64 = 1e-3;
pub const KERNEL_SUP_TOLERANCE: f64 = 2e-3;
pub const JUMP_RELATIVE_TOLERANCE: f64 = 0.02;

/// Simulation verdict: mean within this many standard errors, variance
/// within this relative error.
pub const MEAN_TOLERANCE_SE: f64 = 3.0;
pub const VARIANCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Verify,
    Simulate,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Directory for artifacts; created if missing.
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Trajectory CSV to verify or simulate instead of the optimal schedule.
    pub trajectory: Option<PathBuf>,
    /// Summary JSON supplying the block trades of `trajectory`.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "OK")]
    Done,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_internal() => 3,
            CliError::Write { .. } => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(Error::Validation { .. }) => "validation",
            CliError::Core(Error::Parse { .. }) => "parse",
            CliError::Core(Error::Domain { .. }) => "domain",
            CliError::Core(Error::UnsupportedKernel(_)) => "unsupported_kernel",
            CliError::Core(Error::NoClosedForm(_)) => "no_closed_form",
            CliError::Core(Error::Unbounded(_)) => "unbounded",
            CliError::Core(_) => "internal",
            CliError::Read { .. } | CliError::Input { .. } => "input",
            CliError::Write { .. } => "output",
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Core(Error::Validation { field, .. }) => Some(field),
            _ => None,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Optimal schedule on a uniform grid, from the closed form when one exists
/// and from the grid oracle otherwise.
#[derive(Debug, Clone)]
pub struct Solved {
    pub trajectory: GridTrajectory,
    pub closed_form: Option<TrajectorySolution>,
    /// Extrapolated blocks when the kernel oracle produced the schedule.
    pub jump_estimates: Option<Jumps>,
}

impl Solved {
    pub fn source(&self) -> &'static str {
        if self.closed_form.is_some() {
            "closed_form"
        } else {
            "oracle"
        }
    }
}

pub fn solve_problem(problem: &ExecutionProblem, n_cells: usize) -> crate::Result<Solved> {
    let times = uniform_grid(problem.horizon, n_cells);
    match closed_form::solve(problem) {
        Ok(sol) => Ok(Solved {
            trajectory: sol.sample(&times)?,
            closed_form: Some(sol),
            jump_estimates: None,
        }),
        Err(Error::NoClosedForm(why)) => {
            info!("no closed form ({why}); using the grid oracle with {n_cells} cells");
            match problem.kernel {
                KernelSpec::DiracDelta => Ok(Solved {
                    trajectory: oracle::solve_grid_delta(problem, n_cells)?,
                    closed_form: None,
                    jump_estimates: None,
                }),
                KernelSpec::Exponential { .. } => {
                    let o = oracle::solve_grid_kernel(problem, n_cells)?;
                    Ok(Solved {
                        trajectory: o.trajectory,
                        closed_form: None,
                        jump_estimates: Some(o.jump_estimates),
                    })
                }
            }
        }
        Err(e) => Err(e),
    }
}

fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Node rates: analytic for closed forms, central differences otherwise.
fn node_rates(traj: &GridTrajectory, closed_form: Option<&TrajectorySolution>) -> Vec<f64> {
    if let Some(sol) = closed_form {
        return traj.times().iter().map(|&t| sol.rate(t)).collect();
    }
    let cells = traj.rates();
    let n = cells.len();
    (0..=n)
        .map(|j| match j {
            0 => cells[0],
            j if j == n => cells[n - 1],
            j => 0.5 * (cells[j - 1] + cells[j]),
        })
        .collect()
}

/// Trajectory as CSV with columns `t,holdings,rate,impact`.
pub fn trajectory_csv(traj: &GridTrajectory, rates: &[f64], impact: &[f64]) -> String {
    let mut out = String::with_capacity(80 * (traj.times().len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (j, (&t, &x)) in traj.times().iter().zip(traj.holdings()).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_f64(t),
            format_f64(x),
            format_f64(rates[j]),
            format_f64(impact[j])
        );
    }
    out
}

/// Parses a trajectory CSV written by [`trajectory_csv`]. Only the `t` and
/// `holdings` columns are used; block trades come from `jumps`.
pub fn read_trajectory_csv(text: &str, jumps: Jumps) -> crate::Result<GridTrajectory> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim().starts_with("t,holdings") => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut times = Vec::new();
    let mut holdings = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> crate::Result<f64> {
            let raw = cols.next().ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("missing column `{name}`"),
            })?;
            raw.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("{name}: expected a number, got `{raw}`"),
            })
        };
        times.push(next("t")?);
        holdings.push(next("holdings")?);
    }
    GridTrajectory::new(times, holdings, jumps)
}

#[derive(Debug, Clone, Serialize)]
struct SolveSummary {
    source: &'static str,
    kernel: &'static str,
    beta: Option<f64>,
    n_cells: usize,
    k: f64,
    lambda_norm: f64,
    eta_tilde: f64,
    #[serde(rename = "A")]
    shift: Option<f64>,
    #[serde(rename = "B")]
    amplitude: Option<f64>,
    jumps: Jumps,
    jump_estimates: Option<Jumps>,
    objective: ObjectiveReport,
}

#[derive(Debug, Clone, Serialize)]
struct TrajectoryColumns<'a> {
    t: &'a [f64],
    holdings: &'a [f64],
    rate: &'a [f64],
    impact: &'a [f64],
}

#[derive(Debug, Clone, Serialize)]
struct VerifyReport {
    subject: &'static str,
    kernel: &'static str,
    n_cells: usize,
    scale: f64,
    sup_dev: f64,
    l2_dev: f64,
    sup_tolerance: f64,
    jumps_subject: Jumps,
    jumps_oracle: Jumps,
    jump_tolerance: f64,
    euler_residual: Option<f64>,
    status: Status,
}

#[derive(Debug, Clone, Serialize)]
struct SimulateReport {
    schedule: &'static str,
    summary: SimulationSummary,
    expected_pnl: f64,
    pnl_variance: f64,
    mean_error_se: Option<f64>,
    variance_relative_error: Option<f64>,
    status: Status,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    value: f64,
    source: &'static str,
    k: f64,
    jump_start: f64,
    jump_end: f64,
    alpha_gain: f64,
    impact_cost: f64,
    risk_penalty: f64,
    total: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    debug!("writing {}", path.display());
    std::fs::write(&path, contents).map_err(|source| CliError::Write { path, source })
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_trajectory(options: &Options) -> CliResult<Option<GridTrajectory>> {
    let Some(path) = &options.trajectory else {
        return Ok(None);
    };
    let jumps = match &options.summary {
        None => Jumps::NONE,
        Some(summary) => {
            #[derive(Deserialize)]
            struct WithJumps {
                jumps: Jumps,
            }
            let parsed: WithJumps =
                serde_json::from_str(&read_file(summary)?).map_err(|e| CliError::Input {
                    path: summary.clone(),
                    message: e.to_string(),
                })?;
            parsed.jumps
        }
    };
    let traj = read_trajectory_csv(&read_file(path)?, jumps).map_err(|e| CliError::Input {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(Some(traj))
}

/// Runs one command. Artifacts go to `options.out` when set; the primary
/// report is returned for standard output.
pub fn run(command: Command, config: &RunConfig, options: &Options) -> CliResult<Outcome> {
    info!("running {command:?}");
    match command {
        Command::Solve => run_solve(config, options),
        Command::Verify => run_verify(config, options),
        Command::Simulate => run_simulate(config, options),
        Command::Sweep => run_sweep(config, options),
    }
}

fn run_solve(config: &RunConfig, options: &Options) -> CliResult<Outcome> {
    let problem = config.problem()?;
    let solved = solve_problem(&problem, config.n_cells)?;
    let traj = &solved.trajectory;
    let objective = objective::evaluate(traj, &problem)?;
    let impact = impact::convolve_impact(traj, &problem.kernel, problem.eta_tilde)?;
    let rates = node_rates(traj, solved.closed_form.as_ref());
    let summary = SolveSummary {
        source: solved.source(),
        kernel: problem.kernel.name(),
        beta: problem.kernel.beta(),
        n_cells: config.n_cells,
        k: problem.k,
        lambda_norm: problem.lambda_norm(),
        eta_tilde: problem.eta_tilde,
        shift: solved.closed_form.map(|s| s.shift),
        amplitude: solved.closed_form.map(|s| s.amplitude),
        jumps: traj.jumps(),
        jump_estimates: solved.jump_estimates,
        objective,
    };
    let columns = TrajectoryColumns {
        t: traj.times(),
        holdings: traj.holdings(),
        rate: &rates,
        impact: &impact.values,
    };
    let trajectory_text = match options.format {
        Format::Csv => trajectory_csv(traj, &rates, &impact.values),
        Format::Json => to_json(&columns),
    };
    let summary_text = to_json(&summary);
    let stdout = match &options.out {
        Some(dir) => {
            let name = match options.format {
                Format::Csv => "trajectory.csv",
                Format::Json => "trajectory.json",
            };
            write_artifact(dir, name, &trajectory_text)?;
            write_artifact(dir, "summary.json", &summary_text)?;
            summary_text
        }
        None => match options.format {
            Format::Csv => trajectory_text,
            Format::Json => {
                to_json(&serde_json::json!({ "summary": summary, "trajectory": columns }))
            }
        },
    };
    Ok(Outcome {
        status: Status::Done,
        stdout,
    })
}

fn trajectory_scale(traj: &GridTrajectory, x0: f64, x_t: f64) -> f64 {
    let spread = (x0 - x_t).abs();
    if spread > 0.0 {
        return spread;
    }
    let peak = traj.holdings().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        peak
    } else {
        1.0
    }
}

fn run_verify(config: &RunConfig, options: &Options) -> CliResult<Outcome> {
    let problem = config.problem()?;
    let ingested = load_trajectory(options)?;
    let n_cells = ingested.as_ref().map_or(config.n_cells, |t| t.n_cells());
    let closed = match &ingested {
        Some(_) => None,
        None => Some(closed_form::solve(&problem)?),
    };
    let (oracle_traj, oracle_jumps) = match problem.kernel {
        KernelSpec::DiracDelta => (oracle::solve_grid_delta(&problem, n_cells)?, Jumps::NONE),
        KernelSpec::Exponential { .. } => {
            let o = oracle::solve_grid_kernel(&problem, n_cells)?;
            (o.trajectory, o.jump_estimates)
        }
    };
    let subject = match (&ingested, &closed) {
        (Some(t), _) => t.clone(),
        (None, Some(sol)) => sol.sample(oracle_traj.times())?,
        (None, None) => unreachable!("either a trajectory or a closed form"),
    };
    let deviation = oracle::compare(&subject, &oracle_traj)?;
    let scale = trajectory_scale(&subject, problem.x0, problem.x_t);
    let sup_tolerance = match problem.kernel {
        KernelSpec::DiracDelta => DELTA_SUP_TOLERANCE,
        KernelSpec::Exponential { .. } => KERNEL_SUP_TOLERANCE,
    } * scale;
    let subject_jumps = subject.jumps();
    let jump_tolerance = JUMP_RELATIVE_TOLERANCE;
    let jump_ok =
        |a: f64, b: f64| (a - b).abs() <= jump_tolerance * a.abs().max(b.abs()).max(1e-6 * scale);
    let euler_residual = match &closed {
        Some(sol) => {
            let probes: Vec<f64> = (1..64).map(|i| problem.horizon * i as f64 / 64.0).collect();
            Some(objective::relative_euler_residual(sol, &problem, &probes)?)
        }
        None => None,
    };
    let pass = deviation.sup <= sup_tolerance
        && jump_ok(subject_jumps.start, oracle_jumps.start)
        && jump_ok(subject_jumps.end, oracle_jumps.end)
        && euler_residual.is_none_or(|r| r <= closed_form::RESIDUAL_TOLERANCE);
    let report = VerifyReport {
        subject: if ingested.is_some() {
            "trajectory"
        } else {
            "closed_form"
        },
        kernel: problem.kernel.name(),
        n_cells,
        scale,
        sup_dev: deviation.sup,
        l2_dev: deviation.l2,
        sup_tolerance,
        jumps_subject: subject_jumps,
        jumps_oracle: oracle_jumps,
        jump_tolerance,
        euler_residual,
        status: if pass { Status::Pass } else { Status::Fail },
    };
    let text = to_json(&report);
    if let Some(dir) = &options.out {
        write_artifact(dir, "verify.json", &text)?;
    }
    Ok(Outcome {
        status: report.status,
        stdout: text,
    })
}

fn run_simulate(config: &RunConfig, options: &Options) -> CliResult<Outcome> {
    let setup = config.simulation_setup()?;
    let steps = (config.horizon / config.dt).round() as usize;
    let grid = uniform_grid(config.horizon, steps);
    let (schedule, traj) = match load_trajectory(options)? {
        Some(t) => ("trajectory", t.resample(grid)?),
        None => match config.schedule {
            Schedule::Linear => (
                "linear",
                TrajectorySolution::linear(config.x0, config.x_t, config.horizon).sample(&grid)?,
            ),
            Schedule::Optimal => {
                let problem = config.problem()?;
                let solved = solve_problem(&problem, config.n_cells)?;
                let traj = match solved.closed_form {
                    Some(sol) => sol.sample(&grid)?,
                    None => solved.trajectory.resample(grid)?,
                };
                ("optimal", traj)
            }
        },
    };
    let summary = simulate_with(&setup, &traj, config.n_paths, config.seed, config.dt)?;
    let moments = analytic_moments_with(&setup, &traj)?;
    let diff = (summary.mean_pnl - moments.expected_pnl).abs();
    let mean_error_se = (summary.std_error_mean > 0.0).then(|| diff / summary.std_error_mean);
    let mean_ok = match mean_error_se {
        Some(z) => z <= MEAN_TOLERANCE_SE,
        None => diff <= 1e-9 * moments.expected_pnl.abs().max(1.0),
    };
    let variance_relative_error = (moments.pnl_variance > 0.0)
        .then(|| (summary.var_pnl - moments.pnl_variance).abs() / moments.pnl_variance);
    let variance_ok = match variance_relative_error {
        Some(r) => r <= VARIANCE_TOLERANCE,
        None => summary.var_pnl <= 1e-18 * moments.expected_pnl.abs().max(1.0).powi(2),
    };
    let report = SimulateReport {
        schedule,
        summary,
        expected_pnl: moments.expected_pnl,
        pnl_variance: moments.pnl_variance,
        mean_error_se,
        variance_relative_error,
        status: if mean_ok && variance_ok {
            Status::Pass
        } else {
            Status::Fail
        },
    };
    let text = to_json(&report);
    if let Some(dir) = &options.out {
        write_artifact(dir, "simulation.json", &text)?;
    }
    Ok(Outcome {
        status: report.status,
        stdout: text,
    })
}

fn sweep_row(config: &RunConfig, value: f64) -> crate::Result<SweepRow> {
    let param = config.sweep.as_ref().expect("checked by caller").param;
    let point = config.with_param(param, value)?;
    let problem = point.problem()?;
    let solved = solve_problem(&problem, point.n_cells)?;
    let obj = objective::evaluate(&solved.trajectory, &problem)?;
    let jumps = solved.jump_estimates.unwrap_or(solved.trajectory.jumps());
    Ok(SweepRow {
        value,
        source: solved.source(),
        k: problem.k,
        jump_start: jumps.start,
        jump_end: jumps.end,
        alpha_gain: obj.alpha_gain,
        impact_cost: obj.impact_cost,
        risk_penalty: obj.risk_penalty,
        total: obj.total,
    })
}

fn run_sweep(config: &RunConfig, options: &Options) -> CliResult<Outcome> {
    let sweep = config.sweep.as_ref().ok_or_else(|| {
        Error::invalid(
            "sweep",
            "the sweep command needs `sweep` and `sweep_values`",
        )
    })?;
    let mut rows = sweep
        .values
        .par_iter()
        .map(|&v| sweep_row(config, v))
        .collect::<crate::Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let text = match options.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = format!(
                "{},k,jump_start,jump_end,alpha_gain,impact_cost,risk_penalty,total,source\n",
                sweep.param.key()
            );
            for r in &rows {
                let nums = [
                    r.value,
                    r.k,
                    r.jump_start,
                    r.jump_end,
                    r.alpha_gain,
                    r.impact_cost,
                    r.risk_penalty,
                    r.total,
                ];
                let cells: Vec<String> = nums.iter().map(|&v| format_f64(v)).collect();
                let _ = writeln!(s, "{},{}", cells.join(","), r.source);
            }
            s
        }
    };
    if let Some(dir) = &options.out {
        let name = match options.format {
            Format::Csv => "sweep.csv",
            Format::Json => "sweep.json",
        };
        write_artifact(dir, name, &text)?;
    }
    Ok(Outcome {
        status: Status::Done,
        stdout: text,
    })
}
