//! C interface to the rabichirp designer and propagators.
//!
//! Objects cross the boundary as opaque handles created by `rc_*` calls
//! and released with the matching `*_free`. Fallible calls return an
//! [`RcStatus`]; on failure [`rc_last_error_message`] describes what went
//! wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use rabichirp::cli::{self, RunConfig, Setup};
use rabichirp::designer::DesignReport;
use rabichirp::dynamics::{Trace, TraceKind};
use rabichirp::Error;

/// Status codes. The first five match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    /// Invalid config, key, or argument.
    Config = 1,
    /// The chirp design did not converge or an iterate became non-positive.
    NotConverged = 2,
    /// Integration or tau-map failure.
    Runtime = 3,
    /// `rc_verify` ran but the transfer or the RWA metric fell short.
    VerifyFailed = 4,
    NullPointer = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Propagation frame for [`rc_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcFrame {
    Lab = 0,
    TauFull = 1,
    TauRwa = 2,
    RabiB = 3,
}

impl From<RcFrame> for TraceKind {
    fn from(f: RcFrame) -> Self {
        match f {
            RcFrame::Lab => TraceKind::Lab,
            RcFrame::TauFull => TraceKind::TauFull,
            RcFrame::TauRwa => TraceKind::TauRwa,
            RcFrame::RabiB => TraceKind::Rabi,
        }
    }
}

/// Trace columns, in CSV order.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcColumn {
    T = 0,
    Tau = 1,
    Re1 = 2,
    Im1 = 3,
    Re2 = 4,
    Im2 = 5,
    Pop1 = 6,
    Pop2 = 7,
    Field = 8,
    Chirp = 9,
}

/// Result of [`rc_verify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RcVerification {
    pub p_beta_max: f64,
    pub tau_at_max: f64,
    pub tau_end: f64,
    pub p_beta_end: f64,
    pub rwa_metric: f64,
    pub norm_drift: f64,
    pub modulation_depth: f64,
    pub passed: bool,
}

/// A parsed and validated run configuration.
pub struct RcConfig {
    config: RunConfig,
    base_dir: PathBuf,
    setup: Setup,
}

/// A finished chirp design.
pub struct RcDesign {
    report: DesignReport,
}

/// A propagated trace.
pub struct RcTrace {
    trace: Trace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match cli::exit_code(&e) {
            cli::EXIT_NOT_CONVERGED => RcStatus::NotConverged,
            cli::EXIT_RUNTIME => RcStatus::Runtime,
            _ => RcStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<RcStatus, Failure>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcStatus::Config, format!("`{what}` is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn new_config(config: RunConfig, base_dir: PathBuf) -> Result<RcConfig, Failure> {
    let setup = config.build(&base_dir, None)?;
    Ok(RcConfig {
        config,
        base_dir,
        setup,
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rc_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from an `rc_*` call that documents an owned string and
/// must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a TOML config file. Sample-table paths resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_config_load(path: *const c_char, out: *mut *mut RcConfig) -> RcStatus {
    guard(|| {
        let path = Path::new(str_arg(path, "path")?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let config = RunConfig::load(path, &[])?;
        let base = path
            .parent()
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        *out = Box::into_raw(Box::new(new_config(config, base)?));
        Ok(RcStatus::Ok)
    })
}

/// Parse a config from TOML text. `base_dir` may be NULL (current directory).
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_config_parse(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut RcConfig,
) -> RcStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let base = if base_dir.is_null() {
            PathBuf::from(".")
        } else {
            PathBuf::from(str_arg(base_dir, "base_dir")?)
        };
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let config = RunConfig::from_toml_str(text)?;
        *out = Box::into_raw(Box::new(new_config(config, base)?));
        Ok(RcStatus::Ok)
    })
}

/// Apply a `dotted.key=value` override. The config is unchanged on failure.
///
/// # Safety
/// `config` must be a live handle and `assignment` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rc_config_set(
    config: *mut RcConfig,
    assignment: *const c_char,
) -> RcStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let assignment = str_arg(assignment, "assignment")?;
        let updated = cfg.config.with_override(assignment)?;
        *cfg = new_config(updated, cfg.base_dir.clone())?;
        Ok(RcStatus::Ok)
    })
}

/// The config serialized as TOML; free with [`rc_string_free`].
///
/// # Safety
/// `config` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rc_config_to_toml(config: *const RcConfig) -> *mut c_char {
    match config.as_ref() {
        Some(c) => into_c_string(c.config.to_toml_string()),
        None => {
            set_last_error("`config` is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `config` must be NULL or a handle from `rc_config_load`/`rc_config_parse`.
#[no_mangle]
pub unsafe extern "C" fn rc_config_free(config: *mut RcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the chirp designer. The config must set `chirp = "design"`.
/// Returns `RC_STATUS_NOT_CONVERGED` with a valid handle when the iteration
/// stops early; the handle still holds the last iterate and history.
///
/// # Safety
/// `config` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_design(config: *const RcConfig, out: *mut *mut RcDesign) -> RcStatus {
    guard(|| {
        let cfg = handle(config, "config")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !cfg.setup.design {
            return Err(Failure(
                RcStatus::Config,
                "config key `pulse.chirp`: design needs chirp = \"design\"".into(),
            ));
        }
        let report = cli::run_design(&cfg.setup)?;
        let status = if report.converged() {
            RcStatus::Ok
        } else {
            set_last_error("chirp design did not converge");
            RcStatus::NotConverged
        };
        *out = Box::into_raw(Box::new(RcDesign { report }));
        Ok(status)
    })
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_design_converged(design: *const RcDesign) -> bool {
    design.as_ref().is_some_and(|d| d.report.converged())
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_design_iterations(design: *const RcDesign) -> usize {
    design.as_ref().map_or(0, |d| d.report.design.iterations())
}

/// Sup-norm of the consistency residual of the final iterate.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_design_residual(design: *const RcDesign) -> f64 {
    design.as_ref().map_or(f64::NAN, |d| d.report.residual())
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_design_rwa_metric(design: *const RcDesign) -> f64 {
    design
        .as_ref()
        .map_or(f64::NAN, |d| d.report.rwa_metric.value)
}

/// Number of design grid points.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_design_len(design: *const RcDesign) -> usize {
    design.as_ref().map_or(0, |d| d.report.design.grid.len())
}

/// Copy the grid and chirp values into caller buffers of length `len`,
/// which must be at least [`rc_design_len`].
///
/// # Safety
/// `t` and `omega` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_design_chirp(
    design: *const RcDesign,
    t: *mut f64,
    omega: *mut f64,
    len: usize,
) -> RcStatus {
    guard(|| {
        let d = &handle(design, "design")?.report.design;
        if t.is_null() || omega.is_null() {
            return Err(null(if t.is_null() { "t" } else { "omega" }));
        }
        let n = d.grid.len();
        if len < n {
            return Err(Failure(
                RcStatus::BufferTooSmall,
                format!("buffers hold {len} values, need {n}"),
            ));
        }
        ptr::copy_nonoverlapping(d.grid.as_ptr(), t, n);
        ptr::copy_nonoverlapping(d.values().as_ptr(), omega, n);
        Ok(RcStatus::Ok)
    })
}

/// The `key = value` design report; free with [`rc_string_free`].
///
/// # Safety
/// `design` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rc_design_report(design: *const RcDesign) -> *mut c_char {
    match design.as_ref() {
        Some(d) => into_c_string(d.report.to_text()),
        None => {
            set_last_error("`design` is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `design` must be NULL or a handle from [`rc_design`].
#[no_mangle]
pub unsafe extern "C" fn rc_design_free(design: *mut RcDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Propagate in one frame, designing the chirp first when the config asks
/// for it. Sampling follows the config's `run.samples` and `run.tau_end`.
///
/// # Safety
/// `config` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_simulate(
    config: *const RcConfig,
    frame: RcFrame,
    out: *mut *mut RcTrace,
) -> RcStatus {
    guard(|| {
        let cfg = handle(config, "config")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let pulse = converged_pulse(&cfg.setup)?;
        let mut traces = cli::simulate(&cfg.setup, &pulse, &[frame.into()])?;
        let trace = traces.pop().expect("one frame requested");
        *out = Box::into_raw(Box::new(RcTrace { trace }));
        Ok(RcStatus::Ok)
    })
}

fn converged_pulse(setup: &Setup) -> Result<rabichirp::model::PulseSpec, Failure> {
    let (pulse, report) = cli::resolve_pulse(setup)?;
    match report {
        Some(r) if !r.converged() => Err(Failure(
            RcStatus::NotConverged,
            format!(
                "chirp design did not converge in {} iterations",
                r.design.iterations()
            ),
        )),
        _ => Ok(pulse),
    }
}

/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_trace_len(trace: *const RcTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.len())
}

/// Copy one column into `out`, which must hold at least [`rc_trace_len`] values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_trace_column(
    trace: *const RcTrace,
    column: RcColumn,
    out: *mut f64,
    len: usize,
) -> RcStatus {
    guard(|| {
        let tr = &handle(trace, "trace")?.trace;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = tr.len();
        if len < n {
            return Err(Failure(
                RcStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {n}"),
            ));
        }
        let values: Vec<f64> = match column {
            RcColumn::T => tr.t.clone(),
            RcColumn::Tau => tr.tau.clone(),
            RcColumn::Re1 => tr.amplitudes.iter().map(|a| a[0].re).collect(),
            RcColumn::Im1 => tr.amplitudes.iter().map(|a| a[0].im).collect(),
            RcColumn::Re2 => tr.amplitudes.iter().map(|a| a[1].re).collect(),
            RcColumn::Im2 => tr.amplitudes.iter().map(|a| a[1].im).collect(),
            RcColumn::Pop1 => tr.populations().map(|p| p.0).collect(),
            RcColumn::Pop2 => tr.populations().map(|p| p.1).collect(),
            RcColumn::Field => tr.field.clone(),
            RcColumn::Chirp => tr.chirp.clone(),
        };
        ptr::copy_nonoverlapping(values.as_ptr(), out, n);
        Ok(RcStatus::Ok)
    })
}

/// The trace as CSV text; free with [`rc_string_free`].
///
/// # Safety
/// `trace` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rc_trace_csv(trace: *const RcTrace) -> *mut c_char {
    match trace.as_ref() {
        Some(t) => into_c_string(t.trace.to_csv_string()),
        None => {
            set_last_error("`trace` is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `trace` must be NULL or a handle from [`rc_simulate`].
#[no_mangle]
pub unsafe extern "C" fn rc_trace_free(trace: *mut RcTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Check transfer and the RWA metric. `out` is filled whenever the
/// propagation ran, including the `RC_STATUS_VERIFY_FAILED` case.
///
/// # Safety
/// `config` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_verify(config: *const RcConfig, out: *mut RcVerification) -> RcStatus {
    guard(|| {
        let cfg = handle(config, "config")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let pulse = converged_pulse(&cfg.setup)?;
        let v = cli::verify(&cfg.setup, &pulse)?;
        let passed = v.passes(&cfg.setup);
        *out = RcVerification {
            p_beta_max: v.transfer.p_beta_max,
            tau_at_max: v.transfer.tau_at_max,
            tau_end: v.transfer.tau_end,
            p_beta_end: v.transfer.p_beta_end,
            rwa_metric: v.metric.value,
            norm_drift: v.transfer.norm_drift,
            modulation_depth: v.modulation_depth,
            passed,
        };
        if passed {
            Ok(RcStatus::Ok)
        } else {
            set_last_error("transfer or RWA metric below threshold");
            Ok(RcStatus::VerifyFailed)
        }
    })
}
