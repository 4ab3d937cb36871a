//! C ABI for fraxion.
//!
//! Every fallible function returns a [`FraxionStatus`] and writes its result
//! through an out-pointer. The message of the most recent failure on the
//! calling thread is available from [`fraxion_last_error`]. Samplers and
//! solutions are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fraxion::fraccalc::{solve_abel_volterra, AbelMethod, AbelProblem, GridFunction, Origin};
use fraxion::renewal::{self, FracOrder, ProcessSpec};
use fraxion::specfun::mittag_leffler::{mittag_leffler, MLParams};
use fraxion::stochastic::{sample_ml_waiting_time, sample_stable, SeededStream, StreamRng, WaitingMethod};
use fraxion::FraxionError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FraxionStatus {
    Ok = 0,
    Domain = 1,
    NonConvergence = 2,
    QuadratureFailure = 3,
    SolverDivergence = 4,
    TailUnbounded = 5,
    InversionUnstable = 6,
    NullPointer = 7,
    Panic = 8,
}

/// How a sampler draws.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FraxionSamplerKind {
    /// Mittag-Leffler waiting time, product of exponential and stable variates
    WaitingProduct = 0,
    /// Mittag-Leffler waiting time, direct inversion formula
    WaitingDirect = 1,
    /// one-sided stable variate with transform exp(−s^α)
    Stable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FraxionSolveMethod {
    Resolvent = 0,
    Stepping = 1,
}

/// Seeded random stream bound to one distribution.
pub struct FraxionSampler {
    order: FracOrder,
    kind: FraxionSamplerKind,
    rng: StreamRng,
}

/// Grid solution of an Abel-Volterra equation.
pub struct FraxionSolution {
    grid: GridFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &FraxionError) -> FraxionStatus {
    match e {
        FraxionError::Domain(_) => FraxionStatus::Domain,
        FraxionError::NonConvergence { .. } => FraxionStatus::NonConvergence,
        FraxionError::QuadratureFailure { .. } => FraxionStatus::QuadratureFailure,
        FraxionError::SolverDivergence { .. } => FraxionStatus::SolverDivergence,
        FraxionError::TailUnbounded(_) => FraxionStatus::TailUnbounded,
        FraxionError::InversionUnstable { .. } => FraxionStatus::InversionUnstable,
    }
}

enum Failure {
    Null(&'static str),
    Lib(FraxionError),
}

impl From<FraxionError> for Failure {
    fn from(e: FraxionError) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FraxionStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FraxionStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            FraxionStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            FraxionStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn write_scalar(p: *mut f64, r: fraxion::Result<f64>) -> Result<(), Failure> {
    let o = out(p, "out")?;
    *o = r?;
    Ok(())
}

fn spec(alpha: f64, fold: u32) -> fraxion::Result<ProcessSpec> {
    ProcessSpec::new(FracOrder::new(alpha)?, fold)
}

/// Message of the last failure on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn fraxion_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// E^γ_{α,β}(z) with its certified absolute error. `abs_err` may be null.
///
/// # Safety
/// `value` must be valid for writes; `abs_err` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_ml(
    alpha: f64,
    beta: f64,
    gamma: f64,
    z: f64,
    value: *mut f64,
    abs_err: *mut f64,
) -> FraxionStatus {
    guard(|| {
        let v = out(value, "value")?;
        let r = mittag_leffler(&MLParams::new(alpha, beta, gamma)?, z)?;
        *v = r.value;
        if let Some(e) = abs_err.as_mut() {
            *e = r.abs_err;
        }
        Ok(())
    })
}

/// Waiting-time density φ_α(t).
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_ml_density(alpha: f64, t: f64, value: *mut f64) -> FraxionStatus {
    guard(|| write_scalar(value, FracOrder::new(alpha).and_then(|o| renewal::ml_density(o, t))))
}

/// Waiting-time survival Ψ_α(t) = E_α(−t^α).
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_waiting_survival(alpha: f64, t: f64, value: *mut f64) -> FraxionStatus {
    guard(|| write_scalar(value, FracOrder::new(alpha).and_then(|o| renewal::waiting_survival(o, t))))
}

/// P_{n,α,l}(t) of the l-fold process.
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_counting_probability(
    alpha: f64,
    fold: u32,
    n: u32,
    t: f64,
    value: *mut f64,
) -> FraxionStatus {
    guard(|| write_scalar(value, spec(alpha, fold).and_then(|s| renewal::counting_probability(s, n, t))))
}

/// Renewal function of the l-fold process.
///
/// # Safety
/// `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_renewal_function(alpha: f64, fold: u32, t: f64, value: *mut f64) -> FraxionStatus {
    guard(|| write_scalar(value, spec(alpha, fold).and_then(|s| renewal::renewal_function(s, t))))
}

/// Creates a sampler on stream `stream_id` of `seed`. Equal arguments give equal draws.
///
/// # Safety
/// `sampler` must be valid for writes; the handle is released with [`fraxion_sampler_free`].
#[no_mangle]
pub unsafe extern "C" fn fraxion_sampler_new(
    alpha: f64,
    kind: FraxionSamplerKind,
    seed: u64,
    stream_id: u64,
    sampler: *mut *mut FraxionSampler,
) -> FraxionStatus {
    guard(|| {
        let o = out(sampler, "sampler")?;
        *o = ptr::null_mut();
        let s = FraxionSampler {
            order: FracOrder::new(alpha)?,
            kind,
            rng: SeededStream::new(seed, stream_id).rng(),
        };
        *o = Box::into_raw(Box::new(s));
        Ok(())
    })
}

/// Fills `buf[0..len]` with the next `len` draws.
///
/// # Safety
/// `sampler` must come from [`fraxion_sampler_new`]; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_sampler_draw(sampler: *mut FraxionSampler, buf: *mut f64, len: usize) -> FraxionStatus {
    guard(|| {
        let s = out(sampler, "sampler")?;
        if len == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let buf = std::slice::from_raw_parts_mut(buf, len);
        for x in buf {
            *x = match s.kind {
                FraxionSamplerKind::WaitingProduct => sample_ml_waiting_time(s.order, &mut s.rng, WaitingMethod::Product),
                FraxionSamplerKind::WaitingDirect => sample_ml_waiting_time(s.order, &mut s.rng, WaitingMethod::Direct),
                FraxionSamplerKind::Stable => sample_stable(s.order, &mut s.rng),
            };
        }
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or come from [`fraxion_sampler_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fraxion_sampler_free(sampler: *mut FraxionSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Solves f + c·D^{−α}f = g for g sampled at t_j = j·dt, j = 0..len.
///
/// `origin_sigma` and `origin_step` declare g(t) = Σ c_ij t^{σ+i+j·step} near 0,
/// which selects exact starting weights; pass NaN for either to declare a smooth g.
///
/// # Safety
/// `g` must be valid for `len` reads; `solution` must be valid for writes. The
/// handle is released with [`fraxion_solution_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fraxion_solve_abel(
    alpha: f64,
    c: f64,
    g: *const f64,
    len: usize,
    dt: f64,
    origin_sigma: f64,
    origin_step: f64,
    method: FraxionSolveMethod,
    solution: *mut *mut FraxionSolution,
) -> FraxionStatus {
    guard(|| {
        let o = out(solution, "solution")?;
        *o = ptr::null_mut();
        if g.is_null() {
            return Err(Failure::Null("g"));
        }
        let values = std::slice::from_raw_parts(g, len).to_vec();
        let origin = if origin_sigma.is_nan() || origin_step.is_nan() {
            None
        } else {
            Some(Origin::new(origin_sigma, origin_step)?)
        };
        let problem = AbelProblem {
            order: FracOrder::new(alpha)?,
            c,
            g: GridFunction::new(0.0, dt, values)?.with_origin(origin),
        };
        let method = match method {
            FraxionSolveMethod::Resolvent => AbelMethod::Resolvent,
            FraxionSolveMethod::Stepping => AbelMethod::Stepping,
        };
        let grid = solve_abel_volterra(&problem, method)?;
        *o = Box::into_raw(Box::new(FraxionSolution { grid }));
        Ok(())
    })
}

/// Number of grid values in a solution; 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fraxion_solution_len(solution: *const FraxionSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.grid.len())
}

/// Copies up to `len` solution values into `buf`.
///
/// # Safety
/// `solution` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fraxion_solution_values(
    solution: *const FraxionSolution,
    buf: *mut f64,
    len: usize,
) -> FraxionStatus {
    guard(|| {
        let s = solution.as_ref().ok_or(Failure::Null("solution"))?;
        let n = len.min(s.grid.len());
        if n == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&s.grid.values()[..n]);
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or come from [`fraxion_solve_abel`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fraxion_solution_free(solution: *mut FraxionSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
