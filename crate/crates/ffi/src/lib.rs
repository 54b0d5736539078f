//! C ABI for the exec-kernel trajectory engine.
//!
//! Problems and solutions are opaque handles created by `ek_*_new` /
//! `ek_solve` and released by the matching `ek_*_free`. Every fallible call
//! returns an [`ExecKernelStatus`]; on failure a message is available from
//! [`ek_last_error_message`] on the same thread until the next call.
//!
//! # Safety
//!
//! Pointers must be null or valid for the documented length. Handles must
//! come from this library and must not be used after they are freed.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use exec_kernel::closed_form;
use exec_kernel::grid::{GridTrajectory, Jumps};
use exec_kernel::model::{DriftSpec, ExecutionProblem, KernelSpec, MarketParams};
use exec_kernel::objective;
use exec_kernel::oracle;
use exec_kernel::{Error, TrajectorySolution};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecKernelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoClosedForm = 3,
    Unbounded = 4,
    NumericFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Memoryless impact.
pub const EK_KERNEL_DELTA: u32 = 0;
/// Exponential resilience with rate `beta`.
pub const EK_KERNEL_EXPONENTIAL: u32 = 1;

pub const EK_DRIFT_ZERO: u32 = 0;
/// `alpha0` until `t1` (may be infinite), zero afterwards.
pub const EK_DRIFT_CONSTANT: u32 = 1;
/// `alpha0 * exp(-gamma t)`.
pub const EK_DRIFT_EXP_DECAY: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ExecKernelMarket {
    pub s0: f64,
    pub sigma: f64,
    pub adv: f64,
    pub eta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ExecKernelDrift {
    /// One of the `EK_DRIFT_*` codes.
    pub kind: u32,
    pub alpha0: f64,
    pub gamma: f64,
    pub t1: f64,
}

/// Boundary block trades: `start = X0 - x(0+)`, `end = x(T-) - XT`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ExecKernelJumps {
    pub start: f64,
    pub end: f64,
}

/// Shape constants of a closed-form solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ExecKernelConstants {
    /// Urgency rate, 1/time.
    pub k: f64,
    /// Boundary-layer shift `A`.
    pub shift: f64,
    /// Amplitude `B`.
    pub amplitude: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ExecKernelObjective {
    pub alpha_gain: f64,
    pub impact_cost: f64,
    pub risk_penalty: f64,
    pub total: f64,
}

/// Opaque execution problem.
pub struct ExecKernelProblem(ExecutionProblem);

/// Opaque closed-form trajectory.
pub struct ExecKernelSolution(TrajectorySolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> ExecKernelStatus {
    match err {
        Error::Validation { .. }
        | Error::Domain { .. }
        | Error::UnsupportedKernel(_)
        | Error::Parse { .. } => ExecKernelStatus::InvalidArgument,
        Error::NoClosedForm(_) => ExecKernelStatus::NoClosedForm,
        Error::Unbounded(_) => ExecKernelStatus::Unbounded,
        Error::ResidualCheck { .. } | Error::NotPositiveDefinite { .. } => {
            ExecKernelStatus::NumericFailure
        }
    }
}

struct Failure(ExecKernelStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ExecKernelStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and converts panics to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ExecKernelStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExecKernelStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside exec-kernel".into());
            ExecKernelStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn invalid(message: String) -> Failure {
    Failure(ExecKernelStatus::InvalidArgument, message)
}

fn drift_spec(d: &ExecKernelDrift) -> Result<DriftSpec, Failure> {
    match d.kind {
        EK_DRIFT_ZERO => Ok(DriftSpec::Zero),
        EK_DRIFT_CONSTANT => Ok(DriftSpec::ConstantLocal {
            alpha0: d.alpha0,
            t1: d.t1,
        }),
        EK_DRIFT_EXP_DECAY => Ok(DriftSpec::ExpDecay {
            alpha0: d.alpha0,
            gamma: d.gamma,
        }),
        other => Err(invalid(format!("unknown drift kind {other}"))),
    }
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next `ek_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ek_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code; unknown codes map to "unknown status".
#[no_mangle]
pub extern "C" fn ek_status_name(status: u32) -> *const c_char {
    let name: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"no closed form\0",
        4 => b"unbounded\0",
        5 => b"numeric failure\0",
        6 => b"buffer too small\0",
        7 => b"panic\0",
        _ => b"unknown status\0",
    };
    name.as_ptr().cast()
}

/// Builds a validated problem. `kernel` is an `EK_KERNEL_*` code, `drift`
/// may be null for zero drift and `beta` is ignored for the delta kernel.
///
/// # Safety
/// `market` must point to a valid market, `drift` must be null or valid, and
/// `out` must be valid for a write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ek_problem_new(
    x0: f64,
    x_t: f64,
    horizon: f64,
    market: *const ExecKernelMarket,
    drift: *const ExecKernelDrift,
    kernel: u32,
    beta: f64,
    lambda: f64,
    out: *mut *mut ExecKernelProblem,
) -> ExecKernelStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = as_ref(market, "market")?;
        let drift = drift.as_ref().map_or(Ok(DriftSpec::Zero), drift_spec)?;
        let kernel = match kernel {
            EK_KERNEL_DELTA => KernelSpec::DiracDelta,
            EK_KERNEL_EXPONENTIAL => KernelSpec::Exponential { beta },
            other => return Err(invalid(format!("unknown kernel code {other}"))),
        };
        let market = MarketParams::new(m.s0, m.sigma, m.adv, m.eta)?;
        let problem = ExecutionProblem::new(x0, x_t, horizon, market, drift, kernel, lambda)?;
        *out = Box::into_raw(Box::new(ExecKernelProblem(problem)));
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must be null or come from [`ek_problem_new`], and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ek_problem_free(problem: *mut ExecKernelProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Urgency rate `k` of a problem.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_problem_urgency(
    problem: *const ExecKernelProblem,
    out: *mut f64,
) -> ExecKernelStatus {
    guard(|| {
        let p = as_ref(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.0.k;
        Ok(())
    })
}

/// Closed-form optimal trajectory.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_solve(
    problem: *const ExecKernelProblem,
    out: *mut *mut ExecKernelSolution,
) -> ExecKernelStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = as_ref(problem, "problem")?;
        let sol = closed_form::solve(&p.0)?;
        *out = Box::into_raw(Box::new(ExecKernelSolution(sol)));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must be null or come from [`ek_solve`], and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ek_solution_free(solution: *mut ExecKernelSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Contractual holding at `t` in `[0, T]`: `X0` at 0, `XT` at `T`.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_solution_value(
    solution: *const ExecKernelSolution,
    t: f64,
    out: *mut f64,
) -> ExecKernelStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(t >= 0.0 && t <= s.0.horizon) {
            return Err(invalid(format!("t = {t} is outside [0, {}]", s.0.horizon)));
        }
        *out = s.0.value(t);
        Ok(())
    })
}

/// Samples the solution at `n` strictly increasing times starting at 0 and
/// ending at `T`. Endpoint samples are post- and pre-block holdings.
///
/// # Safety
/// `times` and `holdings` must be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn ek_solution_sample(
    solution: *const ExecKernelSolution,
    times: *const f64,
    n: usize,
    holdings: *mut f64,
) -> ExecKernelStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        let times = slice(times, n, "times")?;
        let out = slice_mut(holdings, n, "holdings")?;
        let traj = s.0.sample(times)?;
        out.copy_from_slice(traj.holdings());
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_solution_jumps(
    solution: *const ExecKernelSolution,
    out: *mut ExecKernelJumps,
) -> ExecKernelStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ExecKernelJumps {
            start: s.0.jumps.start,
            end: s.0.jumps.end,
        };
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_solution_constants(
    solution: *const ExecKernelSolution,
    out: *mut ExecKernelConstants,
) -> ExecKernelStatus {
    guard(|| {
        let s = as_ref(solution, "solution")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ExecKernelConstants {
            k: s.0.k,
            shift: s.0.shift,
            amplitude: s.0.amplitude,
        };
        Ok(())
    })
}

/// Grid oracle on `n_cells` uniform cells. Writes `n_cells + 1` node
/// holdings into `holdings` (post-block at 0, pre-block at `T`) and, if
/// `jumps` is non-null, the extrapolated block sizes.
///
/// # Safety
/// `holdings` must be valid for `capacity` elements; `jumps` must be null or
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_oracle_solve(
    problem: *const ExecKernelProblem,
    n_cells: usize,
    holdings: *mut f64,
    capacity: usize,
    jumps: *mut ExecKernelJumps,
) -> ExecKernelStatus {
    guard(|| {
        let p = as_ref(problem, "problem")?;
        let needed = n_cells
            .checked_add(1)
            .ok_or_else(|| invalid("n_cells is too large".into()))?;
        if capacity < needed {
            return Err(Failure(
                ExecKernelStatus::BufferTooSmall,
                format!("need {needed} holdings, buffer has {capacity}"),
            ));
        }
        let out = slice_mut(holdings, needed, "holdings")?;
        let (traj, estimates) = match p.0.kernel {
            KernelSpec::DiracDelta => (oracle::solve_grid_delta(&p.0, n_cells)?, Jumps::NONE),
            KernelSpec::Exponential { .. } => {
                let o = oracle::solve_grid_kernel(&p.0, n_cells)?;
                (o.trajectory, o.jump_estimates)
            }
        };
        out.copy_from_slice(traj.holdings());
        if let Some(j) = jumps.as_mut() {
            *j = ExecKernelJumps {
                start: estimates.start,
                end: estimates.end,
            };
        }
        Ok(())
    })
}

/// Utility of a sampled schedule with optional boundary blocks.
///
/// # Safety
/// `times` and `holdings` must be valid for `n` elements, `jumps` null or
/// valid, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ek_evaluate(
    problem: *const ExecKernelProblem,
    times: *const f64,
    holdings: *const f64,
    n: usize,
    jumps: *const ExecKernelJumps,
    out: *mut ExecKernelObjective,
) -> ExecKernelStatus {
    guard(|| {
        let p = as_ref(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let times = slice(times, n, "times")?;
        let holdings = slice(holdings, n, "holdings")?;
        let jumps = jumps.as_ref().map_or(Jumps::NONE, |j| Jumps {
            start: j.start,
            end: j.end,
        });
        let traj = GridTrajectory::new(times.to_vec(), holdings.to_vec(), jumps)?;
        let r = objective::evaluate(&traj, &p.0)?;
        *out = ExecKernelObjective {
            alpha_gain: r.alpha_gain,
            impact_cost: r.impact_cost,
            risk_penalty: r.risk_penalty,
            total: r.total,
        };
        Ok(())
    })
}
