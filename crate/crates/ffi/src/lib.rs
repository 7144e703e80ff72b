//! C ABI over cbmlab: expressions, Bergman models and scenario runs behind
//! opaque handles. Every entry point returns a [`CbmStatus`]; on failure
//! [`cbm_last_error`] describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cbmlab::bergman::{build_model, BergmanModel, ModelOptions};
use cbmlab::cli::{run_text, Outcome, RunOptions};
use cbmlab::error::Error;
use cbmlab::exprs::{parse, Expr};
use cbmlab::geometry::DomainFamily;
use num_complex::Complex64;

/// Status codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbmStatus {
    Ok = 0,
    /// The scenario ran but at least one verdict failed.
    VerdictFailed = 1,
    /// Invalid scenario, option or handle contents.
    Config = 2,
    /// Expression syntax error or undeclared variable.
    Parse = 3,
    /// A precondition of the computation does not hold.
    Precondition = 4,
    /// A numerical failure during the computation.
    Numerical = 5,
    Io = 6,
    NullPointer = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// A parsed expression.
pub struct CbmExpr(Expr);

/// A weighted Bergman model of one fibre.
pub struct CbmModel(BergmanModel);

/// The result of a scenario run.
pub struct CbmReport {
    outcome: Outcome,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> CbmStatus {
    match e {
        Error::Parse(_) | Error::UndeclaredVariable(_) => CbmStatus::Parse,
        Error::Domain(_)
        | Error::NotReal { .. }
        | Error::Degenerate { .. }
        | Error::NoSignChange { .. }
        | Error::NotStarShaped(_)
        | Error::A2Violation(_)
        | Error::Precondition(_) => CbmStatus::Precondition,
        Error::DivisionByZero
        | Error::Singular(_)
        | Error::RouteMismatch { .. }
        | Error::Newton(_)
        | Error::Indefinite { .. }
        | Error::Divergence(_) => CbmStatus::Numerical,
        Error::Config(_) | Error::Json(_) => CbmStatus::Config,
        Error::Io(_) | Error::Csv(_) => CbmStatus::Io,
    }
}

struct Failure(CbmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, catching panics and recording errors.
fn guard(f: impl FnOnce() -> Result<CbmStatus, Failure>) -> CbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => {
            set_error("");
            s
        }
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CbmStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CbmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CbmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_complex(re: *const f64, im: *const f64, len: usize, what: &str) -> Result<Vec<Complex64>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(Failure(CbmStatus::NullPointer, format!("{what} is null")));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = std::slice::from_raw_parts(im, len);
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

fn check_out<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(CbmStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    // SAFETY: callers pass handles obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(CbmStatus::NullPointer, "handle is null".into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cbm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an expression in `t1..tm` and `z1..zn`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_expr_parse(text: *const c_char, out: *mut *mut CbmExpr) -> CbmStatus {
    guard(|| {
        check_out(out)?;
        let e = parse(read_str(text, "text")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(CbmExpr(e)));
        Ok(CbmStatus::Ok)
    })
}

/// Evaluates an expression at base point `t` (length `m`) and fibre point
/// `z` (length `n`), given as separate real and imaginary arrays.
///
/// # Safety
/// Arrays must hold the stated lengths; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_expr_eval(
    expr: *const CbmExpr,
    t_re: *const f64,
    t_im: *const f64,
    m: usize,
    z_re: *const f64,
    z_im: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CbmStatus {
    guard(|| {
        let e = handle(expr)?;
        check_out(out_re)?;
        check_out(out_im)?;
        let t = read_complex(t_re, t_im, m, "t")?;
        let z = read_complex(z_re, z_im, n, "z")?;
        let v = e.0.eval_at(&t, &z)?;
        *out_re = v.re;
        *out_im = v.im;
        Ok(CbmStatus::Ok)
    })
}

/// # Safety
/// `expr` must come from [`cbm_expr_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cbm_expr_free(expr: *mut CbmExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Builds the Bergman model of the fibre over `t` of the one-dimensional
/// family with defining function `rho` and weight `phi` (empty for 0).
/// Zero for `degree`, `radial_order` or `angular_order` selects the default.
///
/// # Safety
/// Strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_model_build(
    rho: *const c_char,
    phi: *const c_char,
    t_re: f64,
    t_im: f64,
    degree: usize,
    radial_order: usize,
    angular_order: usize,
    out: *mut *mut CbmModel,
) -> CbmStatus {
    guard(|| {
        check_out(out)?;
        let fam = DomainFamily::parse(read_str(rho, "rho")?, read_str(phi, "phi")?, 1, 1)?;
        let d = ModelOptions::default();
        let pick = |v: usize, default: usize| if v == 0 { default } else { v };
        let opts = ModelOptions {
            degree: pick(degree, d.degree),
            radial_order: pick(radial_order, d.radial_order),
            angular_order: pick(angular_order, d.angular_order),
            scale: None,
        };
        let model = build_model(&fam, &[Complex64::new(t_re, t_im)], opts)?;
        *out = Box::into_raw(Box::new(CbmModel(model)));
        Ok(CbmStatus::Ok)
    })
}

/// Number of retained basis functions.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cbm_model_dim(model: *const CbmModel, out: *mut usize) -> CbmStatus {
    guard(|| {
        check_out(out)?;
        *out = handle(model)?.0.dim();
        Ok(CbmStatus::Ok)
    })
}

/// Kernel derivative ∂_ζ^α ∂_η̄^β K(ζ, η); α = β = 0 gives the kernel.
///
/// # Safety
/// `model` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_model_kernel(
    model: *const CbmModel,
    alpha: usize,
    beta: usize,
    zeta_re: f64,
    zeta_im: f64,
    eta_re: f64,
    eta_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CbmStatus {
    guard(|| {
        let m = handle(model)?;
        check_out(out_re)?;
        check_out(out_im)?;
        let k = m.0.kernel_deriv(
            alpha,
            beta,
            Complex64::new(zeta_re, zeta_im),
            Complex64::new(eta_re, eta_im),
        );
        *out_re = k.re;
        *out_im = k.im;
        Ok(CbmStatus::Ok)
    })
}

/// # Safety
/// `model` must come from [`cbm_model_build`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cbm_model_free(model: *mut CbmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs a scenario given as JSON text. `grid` of 0 keeps the scenario grid;
/// `timings` of 0 leaves timings out of the report. A report is produced
/// both for passing runs and for [`CbmStatus::VerdictFailed`].
///
/// # Safety
/// `scenario` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_run_scenario(
    scenario: *const c_char,
    tol_scale: f64,
    grid: usize,
    timings: i32,
    out: *mut *mut CbmReport,
) -> CbmStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let opts = RunOptions {
            tol_scale,
            grid: (grid > 0).then_some(grid),
            timings: timings != 0,
        };
        let outcome = run_text(read_str(scenario, "scenario")?, "scenario", opts)?;
        let json = CString::new(outcome.report.to_json()?)
            .map_err(|_| Failure(CbmStatus::Config, "report contains NUL".into()))?;
        let passed = outcome.report.passed;
        *out = Box::into_raw(Box::new(CbmReport { outcome, json }));
        Ok(if passed {
            CbmStatus::Ok
        } else {
            CbmStatus::VerdictFailed
        })
    })
}

/// 1 when every verdict passed or was skipped, else 0.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cbm_report_passed(report: *const CbmReport) -> i32 {
    report.as_ref().map_or(0, |r| r.outcome.report.passed as i32)
}

/// The JSON report, owned by the handle.
///
/// # Safety
/// `report` must be a live handle; the string dies with it.
#[no_mangle]
pub unsafe extern "C" fn cbm_report_json(report: *const CbmReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// A named scalar of the report.
///
/// # Safety
/// `report` must be a live handle, `name` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cbm_report_value(
    report: *const CbmReport,
    name: *const c_char,
    out: *mut f64,
) -> CbmStatus {
    guard(|| {
        let r = handle(report)?;
        check_out(out)?;
        let name = read_str(name, "name")?;
        let v = r
            .outcome
            .report
            .values
            .get(name)
            .ok_or_else(|| Failure(CbmStatus::Config, format!("no value named {name}")))?;
        *out = *v;
        Ok(CbmStatus::Ok)
    })
}

/// The scan CSV as a new string, or null when the scenario has none. Free
/// with [`cbm_string_free`].
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cbm_report_csv(report: *const CbmReport) -> *mut c_char {
    let Some(csv) = report.as_ref().and_then(|r| r.outcome.csv.as_ref()) else {
        return ptr::null_mut();
    };
    let mut buf = Vec::new();
    if csv.write(&mut buf).is_err() {
        return ptr::null_mut();
    }
    CString::new(buf).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `report` must come from [`cbm_run_scenario`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cbm_report_free(report: *mut CbmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
