//! Discretized variational solver, independent of the closed forms.
//!
//! Holdings live on a uniform grid with fixed endpoints and rates are
//! constant on each cell. Under the exponential kernel the schedule may also
//! place a block trade at either endpoint; block sizes are free variables of
//! the minimization, so they are zero unless the optimum wants them. The
//! discrete utility uses the trapezoid rule for the drift and risk terms and
//! exact integrals of the impact kernel, so it is precisely what
//! [`crate::objective::evaluate`] computes on the same grid. The oracle
//! returns the exact maximizer of that quadratic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{uniform_grid, GridTrajectory, Jumps};
use crate::linalg::{solve_tridiagonal, Cholesky};
use crate::model::{ExecutionProblem, KernelSpec};

/// Exact double integral of `beta exp(-beta |t - tau|)` over two cells of
/// width `h` whose starts are `cells_apart` cells apart.
fn cell_gram(beta: f64, h: f64, cells_apart: usize) -> f64 {
    let bh = beta * h;
    let mass = -(-bh).exp_m1();
    if cells_apart == 0 {
        2.0 * (h - mass / beta)
    } else {
        (-bh * (cells_apart as f64 - 1.0)).exp() * mass * mass / beta
    }
}

/// Cell-rate Gram matrix `G[i][j] = int_i int_j K(|t - tau|)`, row-major.
pub fn gram_matrix(beta: f64, horizon: f64, n_cells: usize) -> Vec<f64> {
    let h = horizon / n_cells as f64;
    let g: Vec<f64> = (0..n_cells).map(|d| cell_gram(beta, h, d)).collect();
    let mut out = vec![0.0; n_cells * n_cells];
    for i in 0..n_cells {
        for j in 0..n_cells {
            out[i * n_cells + j] = g[i.abs_diff(j)];
        }
    }
    out
}

/// Minimizer of the memoryless discrete problem via its tridiagonal
/// stationarity system.
pub fn solve_grid_delta(problem: &ExecutionProblem, n_cells: usize) -> Result<GridTrajectory> {
    if problem.kernel != KernelSpec::DiracDelta {
        return Err(Error::invalid("kernel", "expected the memoryless kernel"));
    }
    if n_cells < 4 {
        return Err(Error::invalid("n_cells", "need at least 4 cells"));
    }
    if !(problem.eta_tilde > 0.0) {
        return Err(Error::invalid(
            "eta_tilde",
            "singular system without impact",
        ));
    }
    let times = uniform_grid(problem.horizon, n_cells);
    let h = problem.horizon / n_cells as f64;
    let h2 = h * h;
    let m = n_cells - 1;
    let diag = vec![2.0 + problem.lambda_norm() * h2; m];
    let off = vec![-1.0; m - 1];
    let mut rhs: Vec<f64> = times[1..n_cells]
        .iter()
        .map(|&t| h2 * problem.alpha_tilde_at(t))
        .collect();
    rhs[0] += problem.x0;
    rhs[m - 1] += problem.x_t;
    solve_tridiagonal(&off, &diag, &off, &mut rhs)?;
    let mut holdings = Vec::with_capacity(n_cells + 1);
    holdings.push(problem.x0);
    holdings.extend_from_slice(&rhs);
    holdings.push(problem.x_t);
    GridTrajectory::new(times, holdings, Jumps::NONE)
}

/// Kernel oracle output: the discrete optimum plus extrapolated block sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOracle {
    /// Discrete optimum; its jump metadata holds the optimal blocks at this
    /// resolution.
    pub trajectory: GridTrajectory,
    /// Richardson extrapolation of the block sizes to zero cell width.
    pub jump_estimates: Jumps,
}

/// Interaction of two unit trade measures under `beta exp(-beta |t - tau|)`.
/// Elements are a block at 0, the `n` cells, then a block at `T`.
struct ElementGram {
    beta: f64,
    h: f64,
    n: usize,
    cells: Vec<f64>,
    mass: f64,
}

impl ElementGram {
    fn new(beta: f64, h: f64, n: usize) -> Self {
        ElementGram {
            beta,
            h,
            n,
            cells: (0..n).map(|d| cell_gram(beta, h, d)).collect(),
            mass: -(-beta * h).exp_m1(),
        }
    }

    /// `a <= b` in element order.
    fn get(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let last = self.n + 1;
        let decay = |cells: usize| (-self.beta * self.h * cells as f64).exp();
        match (a, b) {
            (0, 0) => self.beta,
            (x, y) if x == last && y == last => self.beta,
            (0, y) if y == last => self.beta * decay(self.n),
            (0, y) => decay(y - 1) * self.mass,
            (x, y) if y == last => decay(self.n - x) * self.mass,
            (x, y) => self.cells[y - x],
        }
    }
}

/// Exact minimizer over piecewise-linear holdings with free blocks at both
/// endpoints. Decision variables are the post-block holdings `y_0..y_n`.
fn solve_kernel_grid(
    problem: &ExecutionProblem,
    beta: f64,
    n_cells: usize,
) -> Result<GridTrajectory> {
    let n = n_cells;
    let times = uniform_grid(problem.horizon, n);
    let h = problem.horizon / n as f64;
    let gram = ElementGram::new(beta, h, n);
    let vars = n + 1;

    // Trade vector w = D y + w0: w_0 = y_0 - X0, w_e = (y_e - y_{e-1}) / h,
    // w_{n+1} = XT - y_n. Column j of D touches elements j and j + 1.
    let coef = |e: usize, j: usize| -> f64 {
        if e == j {
            if j == 0 {
                1.0
            } else {
                1.0 / h
            }
        } else if j == n {
            -1.0
        } else {
            -1.0 / h
        }
    };
    let weight = |j: usize| if j == 0 || j == n { 0.5 * h } else { h };
    let lambda = problem.lambda_norm();

    let mut hessian = vec![0.0; vars * vars];
    for j in 0..vars {
        for k in j..vars {
            let mut s = 0.0;
            for a in [j, j + 1] {
                for b in [k, k + 1] {
                    s += coef(a, j) * gram.get(a, b) * coef(b, k);
                }
            }
            if j == k {
                s += 2.0 * lambda * weight(j);
            }
            hessian[j * vars + k] = s;
            hessian[k * vars + j] = s;
        }
    }

    // Constant trades: -X0 at element 0 and XT at element n + 1.
    let g_const = |e: usize| -problem.x0 * gram.get(0, e) + problem.x_t * gram.get(e, n + 1);
    let mut y: Vec<f64> = (0..vars)
        .map(|j| {
            let pull = coef(j, j) * g_const(j) + coef(j + 1, j) * g_const(j + 1);
            2.0 * weight(j) * problem.alpha_tilde_at(times[j]) - pull
        })
        .collect();
    Cholesky::factor(hessian, vars)?.solve_in_place(&mut y);
    let jumps = Jumps {
        start: problem.x0 - y[0],
        end: y[n] - problem.x_t,
    };
    GridTrajectory::new(times, y, jumps)
}

/// Minimizer of the discrete problem under the exponential kernel, with
/// block sizes extrapolated from this grid and one of half the resolution.
pub fn solve_grid_kernel(problem: &ExecutionProblem, n_cells: usize) -> Result<KernelOracle> {
    let beta = match problem.kernel {
        KernelSpec::Exponential { beta } => beta,
        KernelSpec::DiracDelta => {
            return Err(Error::invalid("kernel", "expected the exponential kernel"))
        }
    };
    if n_cells < 8 {
        return Err(Error::invalid("n_cells", "need at least 8 cells"));
    }
    if !(problem.eta_tilde > 0.0) {
        return Err(Error::invalid(
            "eta_tilde",
            "singular system without impact",
        ));
    }
    let trajectory = solve_kernel_grid(problem, beta, n_cells)?;
    let coarse_cells = n_cells / 2;
    let coarse = solve_kernel_grid(problem, beta, coarse_cells)?;
    let (fine, rough) = (trajectory.jumps(), coarse.jumps());
    // Block size error is linear in the cell width to leading order.
    let (n, m) = (n_cells as f64, coarse_cells as f64);
    let extrapolate = |f: f64, c: f64| (n * f - m * c) / (n - m);
    Ok(KernelOracle {
        trajectory,
        jump_estimates: Jumps {
            start: extrapolate(fine.start, rough.start),
            end: extrapolate(fine.end, rough.end),
        },
    })
}

/// Pointwise agreement between two trajectories on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// Max absolute difference over interior nodes.
    pub sup: f64,
    /// Trapezoid-weighted L2 difference over interior nodes.
    pub l2: f64,
    pub jump_start: f64,
    pub jump_end: f64,
}

pub fn compare(a: &GridTrajectory, b: &GridTrajectory) -> Result<Deviation> {
    if a.times() != b.times() {
        return Err(Error::invalid(
            "times",
            "trajectories are sampled on different grids",
        ));
    }
    let t = a.times();
    let (xa, xb) = (a.holdings(), b.holdings());
    let (mut sup, mut l2) = (0.0f64, 0.0f64);
    for j in 1..t.len() - 1 {
        let d = (xa[j] - xb[j]).abs();
        sup = sup.max(d);
        l2 += 0.5 * (t[j + 1] - t[j - 1]) * d * d;
    }
    Ok(Deviation {
        sup,
        l2: l2.sqrt(),
        jump_start: (a.jumps().start - b.jumps().start).abs(),
        jump_end: (a.jumps().end - b.jumps().end).abs(),
    })
}
