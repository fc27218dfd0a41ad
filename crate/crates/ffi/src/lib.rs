//! C ABI over `slsgd`.
//!
//! Problems and runs are opaque handles created by `sls_*` constructors and
//! released with the matching `*_free`. Every fallible function returns an
//! [`SlsError`]; on failure a message is available from
//! [`sls_last_error_message`] on the same thread until the next failing
//! call. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slsgd::diagnostics::{self, TheoremConstants};
use slsgd::directions::{CgVariant, DirectionKind, SgrParams};
use slsgd::linesearch::{self, Alpha0Policy, LineSearchParams};
use slsgd::optimizer::{self, InitialPoint, RunConfig, RunOutcome, RunStatus};
use slsgd::problems::{self, Batch, FiniteSum, SamplingMode, SingularValueSpec};
use slsgd::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsError {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NumericDomain = 4,
    InvalidBatch = 5,
    UnsatisfiableSafeguard = 6,
    NonDescent = 7,
    Stall = 8,
    InsufficientData = 9,
    Undefined = 10,
    Unsupported = 11,
    Precondition = 12,
    Config = 13,
    Io = 14,
    OutOfRange = 15,
    Panic = 16,
}

impl From<&Error> for SlsError {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidBatch(_) => SlsError::InvalidBatch,
            Error::NumericDomain(_) => SlsError::NumericDomain,
            Error::InvalidSpec(_) | Error::InvalidParameter(_) => SlsError::InvalidArgument,
            Error::Shape { .. } => SlsError::Shape,
            Error::UnsatisfiableSafeguard(_) => SlsError::UnsatisfiableSafeguard,
            Error::NonDescent { .. } => SlsError::NonDescent,
            Error::Stall { .. } => SlsError::Stall,
            Error::InsufficientData(_) => SlsError::InsufficientData,
            Error::Undefined(_) => SlsError::Undefined,
            Error::Unsupported(_) => SlsError::Unsupported,
            Error::Precondition(_) => SlsError::Precondition,
            Error::Config(_) => SlsError::Config,
            Error::Io(_) => SlsError::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SlsError, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SlsError::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(code: SlsError, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(code, msg.into()))
}

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> SlsError {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlsError::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SlsError::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(SlsError::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return fail(SlsError::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().map_or_else(|| fail(SlsError::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().map_or_else(|| fail(SlsError::NullPointer, format!("{what} is null")), Ok)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// A finite-sum objective.
pub struct SlsProblem {
    inner: Box<dyn FiniteSum>,
}

fn emit_problem(p: Box<dyn FiniteSum>, out: *mut *mut SlsProblem) -> FfiResult<()> {
    let slot = unsafe { out_ref(out, "out")? };
    *slot = Box::into_raw(Box::new(SlsProblem { inner: p }));
    Ok(())
}

/// Interpolating least squares with `num_components` rows in dimension
/// `dim`. `spectrum` is a spec such as `"linspace:2:4"`, or null for the
/// default.
///
/// # Safety
/// `spectrum` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_least_squares(
    num_components: usize,
    dim: usize,
    seed: u64,
    spectrum: *const c_char,
    out: *mut *mut SlsProblem,
) -> SlsError {
    guard(|| {
        let spec = if spectrum.is_null() {
            SingularValueSpec::default()
        } else {
            let s = CStr::from_ptr(spectrum)
                .to_str()
                .or_else(|_| fail(SlsError::InvalidArgument, "spectrum is not UTF-8"))?;
            s.parse()?
        };
        let p = problems::gen_interpolating_least_squares(num_components, dim, seed, &spec)?;
        emit_problem(Box::new(p), out)
    })
}

/// Separable quadratics with curvatures `scale·(1 + spread·U(−1, 1))`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_quadratic(
    num_components: usize,
    dim: usize,
    seed: u64,
    scale: f64,
    spread: f64,
    out: *mut *mut SlsProblem,
) -> SlsError {
    guard(|| {
        let p = problems::gen_diagonal_quadratics(num_components, dim, seed, scale, spread)?;
        emit_problem(Box::new(p), out)
    })
}

/// Nonconvex two-factor model with `hidden` outputs and `features` inputs.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_nonconvex(
    num_components: usize,
    hidden: usize,
    features: usize,
    seed: u64,
    out: *mut *mut SlsProblem,
) -> SlsError {
    guard(|| {
        let p = problems::gen_nonconvex_interpolating(num_components, hidden, features, seed)?;
        emit_problem(Box::new(p), out)
    })
}

/// Least squares read from the text format written by the library.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_from_file(path: *const c_char, out: *mut *mut SlsProblem) -> SlsError {
    guard(|| {
        let path = handle(path, "path")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .or_else(|_| fail(SlsError::InvalidArgument, "path is not UTF-8"))?;
        let file = std::fs::File::open(path).map_err(Error::from)?;
        let p = problems::LeastSquares::read_text(std::io::BufReader::new(file))?;
        emit_problem(Box::new(p), out)
    })
}

/// # Safety
/// `problem` is null or a handle from an `sls_problem_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_free(problem: *mut SlsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of components, 0 for a null handle.
///
/// # Safety
/// `problem` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_num_components(problem: *const SlsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.num_components())
}

/// Decision-vector length, 0 for a null handle.
///
/// # Safety
/// `problem` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_dim(problem: *const SlsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Known constants; a `has_*` flag of false means no closed form.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SlsConstants {
    pub has_l: bool,
    pub l: f64,
    pub has_l_max: bool,
    pub l_max: f64,
    pub has_mu: bool,
    pub mu: f64,
    pub f_star: f64,
}

/// # Safety
/// `problem` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_constants(problem: *const SlsProblem, out: *mut SlsConstants) -> SlsError {
    guard(|| {
        let p = handle(problem, "problem")?;
        let k = p
            .inner
            .known_constants()
            .map_or_else(|| fail(SlsError::Unsupported, "no known constants"), Ok)?;
        *out_ref(out, "out")? = SlsConstants {
            has_l: k.l.is_some(),
            l: k.l.unwrap_or(f64::NAN),
            has_l_max: k.l_max.is_some(),
            l_max: k.l_max.unwrap_or(f64::NAN),
            has_mu: k.mu.is_some(),
            mu: k.mu.unwrap_or(f64::NAN),
            f_star: k.f_star,
        };
        Ok(())
    })
}

/// Copies the known minimizer into `out[0..len]`; `len` must equal the
/// dimension.
///
/// # Safety
/// `problem` is a live handle; `out` has room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sls_problem_minimizer(problem: *const SlsProblem, out: *mut f64, len: usize) -> SlsError {
    guard(|| {
        let p = handle(problem, "problem")?;
        let k = p
            .inner
            .known_constants()
            .map_or_else(|| fail(SlsError::Unsupported, "no known minimizer"), Ok)?;
        copy_exact(&k.x_star, out, len)
    })
}

unsafe fn copy_exact(src: &[f64], out: *mut f64, len: usize) -> FfiResult<()> {
    if len != src.len() {
        return Err(Error::Shape {
            expected: src.len(),
            got: len,
        }
        .into());
    }
    slice_mut(out, len, "out")?.copy_from_slice(src);
    Ok(())
}

/// Batch value and gradient at `x`. `indices` are 0-based and may repeat;
/// `grad` receives `dim` values.
///
/// # Safety
/// `problem` is a live handle; the arrays hold the stated lengths; `f` is
/// writable; `grad` has room for `x_len` values.
#[no_mangle]
pub unsafe extern "C" fn sls_evaluate_batch(
    problem: *const SlsProblem,
    indices: *const usize,
    num_indices: usize,
    x: *const f64,
    x_len: usize,
    f: *mut f64,
    grad: *mut f64,
) -> SlsError {
    guard(|| {
        let p = handle(problem, "problem")?;
        let idx = slice(indices, num_indices, "indices")?;
        let batch = Batch::new(idx.to_vec(), p.inner.num_components())?;
        let x = slice(x, x_len, "x")?;
        let (fv, g) = problems::evaluate_batch(p.inner.as_ref(), &batch, x)?;
        let f = out_ref(f, "f")?;
        copy_exact(&g, grad, x_len)?;
        *f = fv;
        Ok(())
    })
}

/// Exact `f(x)` and `∇f(x)`.
///
/// # Safety
/// As [`sls_evaluate_batch`].
#[no_mangle]
pub unsafe extern "C" fn sls_full_oracle(
    problem: *const SlsProblem,
    x: *const f64,
    x_len: usize,
    f: *mut f64,
    grad: *mut f64,
) -> SlsError {
    guard(|| {
        let p = handle(problem, "problem")?;
        let x = slice(x, x_len, "x")?;
        let (fv, g) = problems::full_oracle(p.inner.as_ref(), x)?;
        let f = out_ref(f, "f")?;
        copy_exact(&g, grad, x_len)?;
        *f = fv;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsDirection {
    Sgd = 0,
    Momentum = 1,
    CgPolakRibierePlus = 2,
    CgFletcherReeves = 3,
    AdagradDiag = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsInitialPoint {
    Random = 0,
    Zeros = 1,
    Ones = 2,
    Minimizer = 3,
}

/// Flat run configuration. Fill with [`sls_run_config_default`] first.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlsRunConfig {
    pub direction: SlsDirection,
    /// Momentum coefficient.
    pub beta: f64,
    /// Adagrad floor.
    pub epsilon: f64,
    /// Conjugate-gradient coefficient cap.
    pub beta_cap: f64,
    pub c1: f64,
    pub c2: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
    /// 0 starts every search at `alpha_max`; `p > 0` starts at
    /// `min(alpha_max, α_prev / δ^p)`.
    pub warm_increase: u32,
    pub max_backtracks: u32,
    pub max_iters: u64,
    pub grad_tol: f64,
    pub fgap_tol: f64,
    pub seed: u64,
    pub trace_every: u64,
    pub batch_size: u64,
    pub x0: SlsInitialPoint,
}

impl From<&RunConfig> for SlsRunConfig {
    fn from(rc: &RunConfig) -> Self {
        let (direction, beta, epsilon, beta_cap) = match rc.direction {
            DirectionKind::Sgd => (SlsDirection::Sgd, 0.9, 1e-8, 10.0),
            DirectionKind::Momentum { beta } => (SlsDirection::Momentum, beta, 1e-8, 10.0),
            DirectionKind::ConjugateGradient { variant, beta_cap } => (
                match variant {
                    CgVariant::PolakRibierePlus => SlsDirection::CgPolakRibierePlus,
                    CgVariant::FletcherReeves => SlsDirection::CgFletcherReeves,
                },
                0.9,
                1e-8,
                beta_cap,
            ),
            DirectionKind::AdagradDiag { epsilon } => (SlsDirection::AdagradDiag, 0.9, epsilon, 10.0),
        };
        let ls = &rc.line_search;
        Self {
            direction,
            beta,
            epsilon,
            beta_cap,
            c1: rc.sgr.c1(),
            c2: rc.sgr.c2(),
            gamma: ls.gamma,
            delta: ls.delta,
            alpha_max: ls.alpha_max,
            warm_increase: match ls.alpha0_policy {
                Alpha0Policy::Constant => 0,
                Alpha0Policy::WarmIncrease { p } => p,
            },
            max_backtracks: ls.max_backtracks,
            max_iters: rc.max_iters as u64,
            grad_tol: rc.grad_tol,
            fgap_tol: rc.fgap_tol,
            seed: rc.seed,
            trace_every: rc.trace_every as u64,
            batch_size: rc.sampling.batch_size() as u64,
            x0: SlsInitialPoint::Random,
        }
    }
}

fn to_usize(v: u64, what: &str) -> FfiResult<usize> {
    usize::try_from(v).or_else(|_| fail(SlsError::OutOfRange, format!("{what} does not fit in usize")))
}

impl SlsRunConfig {
    fn to_run_config(self) -> FfiResult<RunConfig> {
        let direction = match self.direction {
            SlsDirection::Sgd => DirectionKind::Sgd,
            SlsDirection::Momentum => DirectionKind::Momentum { beta: self.beta },
            SlsDirection::CgPolakRibierePlus => DirectionKind::ConjugateGradient {
                variant: CgVariant::PolakRibierePlus,
                beta_cap: self.beta_cap,
            },
            SlsDirection::CgFletcherReeves => DirectionKind::ConjugateGradient {
                variant: CgVariant::FletcherReeves,
                beta_cap: self.beta_cap,
            },
            SlsDirection::AdagradDiag => DirectionKind::AdagradDiag { epsilon: self.epsilon },
        };
        let batch_size = to_usize(self.batch_size, "batch_size")?;
        let rc = RunConfig {
            direction,
            line_search: LineSearchParams {
                gamma: self.gamma,
                delta: self.delta,
                alpha_max: self.alpha_max,
                alpha0_policy: match self.warm_increase {
                    0 => Alpha0Policy::Constant,
                    p => Alpha0Policy::WarmIncrease { p },
                },
                max_backtracks: self.max_backtracks,
            },
            sgr: SgrParams::new(self.c1, self.c2)?,
            sampling: match batch_size {
                1 => SamplingMode::SingletonEnumerable,
                b => SamplingMode::WithReplacement { batch_size: b },
            },
            max_iters: to_usize(self.max_iters, "max_iters")?,
            grad_tol: self.grad_tol,
            fgap_tol: self.fgap_tol,
            seed: self.seed,
            trace_every: to_usize(self.trace_every, "trace_every")?,
            x0: match self.x0 {
                SlsInitialPoint::Random => InitialPoint::Random,
                SlsInitialPoint::Zeros => InitialPoint::Zeros,
                SlsInitialPoint::Ones => InitialPoint::Ones,
                SlsInitialPoint::Minimizer => InitialPoint::Minimizer,
            },
        };
        rc.validate()?;
        Ok(rc)
    }
}

/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_run_config_default(out: *mut SlsRunConfig) -> SlsError {
    guard(|| {
        *out_ref(out, "out")? = SlsRunConfig::from(&RunConfig::default());
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlsRunStatus {
    ConvergedGrad = 0,
    ConvergedFgap = 1,
    MaxIters = 2,
    Stalled = 3,
}

impl From<RunStatus> for SlsRunStatus {
    fn from(s: RunStatus) -> Self {
        match s {
            RunStatus::ConvergedGrad => SlsRunStatus::ConvergedGrad,
            RunStatus::ConvergedFgap => SlsRunStatus::ConvergedFgap,
            RunStatus::MaxIters => SlsRunStatus::MaxIters,
            RunStatus::Stalled => SlsRunStatus::Stalled,
        }
    }
}

/// A finished run and its trajectory.
pub struct SlsRun {
    outcome: RunOutcome,
}

/// Runs the optimizer. `x0` overrides the configured start when non-null.
/// A line-search stall is not an error: it yields a run whose status is
/// `Stalled`.
///
/// # Safety
/// `problem` is a live handle; `config` is readable; `x0` is null or holds
/// `x0_len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_run(
    problem: *const SlsProblem,
    config: *const SlsRunConfig,
    x0: *const f64,
    x0_len: usize,
    out: *mut *mut SlsRun,
) -> SlsError {
    guard(|| {
        let p = handle(problem, "problem")?;
        let rc = (*handle(config, "config")?).to_run_config()?;
        let slot = out_ref(out, "out")?;
        let result = if x0.is_null() {
            optimizer::run(p.inner.as_ref(), &rc)
        } else {
            optimizer::run_from(p.inner.as_ref(), &rc, slice(x0, x0_len, "x0")?.to_vec())
        };
        let outcome = result.map_err(|e| Failure(SlsError::from(&e.source), e.to_string()))?;
        *slot = Box::into_raw(Box::new(SlsRun { outcome }));
        Ok(())
    })
}

/// # Safety
/// `run` is null or a live handle from [`sls_run`].
#[no_mangle]
pub unsafe extern "C" fn sls_run_free(run: *mut SlsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlsRunSummary {
    pub status: SlsRunStatus,
    pub stopped_at: u64,
    pub num_records: u64,
    pub f_evals: u64,
    pub g_evals: u64,
    pub has_final: bool,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub restart_rate: f64,
}

/// # Safety
/// `run` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_run_summary(run: *const SlsRun, out: *mut SlsRunSummary) -> SlsError {
    guard(|| {
        let o = &handle(run, "run")?.outcome;
        *out_ref(out, "out")? = SlsRunSummary {
            status: o.status.into(),
            stopped_at: o.stopped_at as u64,
            num_records: o.trajectory.len() as u64,
            f_evals: o.f_evals,
            g_evals: o.g_evals,
            has_final: o.final_f_full.is_some(),
            final_f: o.final_f_full.unwrap_or(f64::NAN),
            final_grad_norm: o.final_grad_norm.unwrap_or(f64::NAN),
            restart_rate: o.restart_rate(),
        };
        Ok(())
    })
}

/// One trajectory row; `has_full` tells whether `f_full` and
/// `grad_full_norm` were evaluated.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlsRecord {
    pub k: u64,
    pub has_full: bool,
    pub f_full: f64,
    pub grad_full_norm: f64,
    pub f_batch: f64,
    pub g_batch_norm: f64,
    pub d_norm: f64,
    pub dtg: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub backtracks: u32,
    pub sgr_pass: bool,
    pub restarted: bool,
    pub f_batch_accepted: f64,
}

/// # Safety
/// `run` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_run_record(run: *const SlsRun, index: usize, out: *mut SlsRecord) -> SlsError {
    guard(|| {
        let o = &handle(run, "run")?.outcome;
        let r = o.trajectory.get(index).map_or_else(
            || fail(SlsError::OutOfRange, format!("record {index} of {}", o.trajectory.len())),
            Ok,
        )?;
        *out_ref(out, "out")? = SlsRecord {
            k: r.k as u64,
            has_full: r.f_full.is_some(),
            f_full: r.f_full.unwrap_or(f64::NAN),
            grad_full_norm: r.grad_full_norm.unwrap_or(f64::NAN),
            f_batch: r.f_batch,
            g_batch_norm: r.g_batch_norm,
            d_norm: r.d_norm,
            dtg: r.dtg,
            alpha0: r.alpha0,
            alpha: r.alpha,
            backtracks: r.backtracks,
            sgr_pass: r.sgr_pass,
            restarted: r.restarted,
            f_batch_accepted: r.f_batch_accepted,
        };
        Ok(())
    })
}

/// Copies the final iterate; `len` must equal the dimension.
///
/// # Safety
/// `run` is a live handle; `out` has room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sls_run_final_x(run: *const SlsRun, out: *mut f64, len: usize) -> SlsError {
    guard(|| copy_exact(&handle(run, "run")?.outcome.final_x, out, len))
}

/// Geometric rate fitted to the logged gaps `f − f_star`.
///
/// # Safety
/// `run` is a live handle; `rate` and `r_squared` are writable.
#[no_mangle]
pub unsafe extern "C" fn sls_run_contraction(
    run: *const SlsRun,
    f_star: f64,
    rate: *mut f64,
    r_squared: *mut f64,
) -> SlsError {
    guard(|| {
        let o = &handle(run, "run")?.outcome;
        let est = optimizer::contraction_estimate(&o.trajectory, f_star)?;
        let (rate, r2) = (out_ref(rate, "rate")?, out_ref(r_squared, "r_squared")?);
        *rate = est.per_iter_rate;
        *r2 = est.r_squared;
        Ok(())
    })
}

/// Largest step the Armijo test is guaranteed to accept for an
/// `l`-smooth batch: `2 c2 (1 − γ) / (c1² l)`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_alpha_low(c1: f64, c2: f64, gamma: f64, l: f64, out: *mut f64) -> SlsError {
    guard(|| {
        *out_ref(out, "out")? = linesearch::alpha_low(c1, c2, gamma, l)?;
        Ok(())
    })
}

/// Worst-case number of backtracks from `alpha_max` down to `alpha_low`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_jstar(alpha_max: f64, alpha_low: f64, delta: f64, out: *mut u32) -> SlsError {
    guard(|| {
        *out_ref(out, "out")? = linesearch::jstar(alpha_max, alpha_low, delta)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlsTheoremConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub rho: f64,
    pub mu: f64,
    pub l: f64,
    pub l_max: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlsEtaReport {
    pub eta: f64,
    pub sigma: f64,
    pub certified_rate: f64,
    pub applicable: bool,
}

/// # Safety
/// `constants` is readable; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sls_compute_eta(constants: *const SlsTheoremConstants, out: *mut SlsEtaReport) -> SlsError {
    guard(|| {
        let c = handle(constants, "constants")?;
        let r = diagnostics::compute_eta(&TheoremConstants {
            c1: c.c1,
            c2: c.c2,
            c3: c.c3,
            rho: c.rho,
            mu: c.mu,
            l: c.l,
            l_max: c.l_max,
            gamma: c.gamma,
            delta: c.delta,
            alpha_max: c.alpha_max,
        })?;
        *out_ref(out, "out")? = SlsEtaReport {
            eta: r.eta,
            sigma: r.sigma,
            certified_rate: r.certified_rate,
            applicable: r.applicable,
        };
        Ok(())
    })
}
