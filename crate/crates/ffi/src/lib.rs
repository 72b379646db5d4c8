//! C interface to the annulus solver.
//!
//! Every function returns an [`AnnuflowStatus`]; on failure a message is kept
//! per thread and can be read with [`annuflow_last_error`]. Runs are opaque
//! handles created by `annuflow_run_from_config` or `annuflow_run_standard` and
//! released with `annuflow_run_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use annuflow::config::parse_config;
use annuflow::output::write_run;
use annuflow::study::RunStatus;
use annuflow::{Error, ModelKind, RunOutput, StudyConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    /// The run stopped early; snapshots up to the failure are available.
    Aborted = 6,
    NotRun = 7,
    OutOfRange = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuflowModel {
    Newtonian = 0,
    Model1 = 1,
    Model2a = 2,
    Model2b = 3,
}

/// Radial profile stored in a snapshot.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuflowField {
    Radius = 0,
    Swirl = 1,
    Axial = 2,
    Concentration = 3,
    Viscosity = 4,
    Pressure = 5,
}

/// Opaque run handle.
pub struct AnnuflowRun {
    config: StudyConfig,
    output: Option<RunOutput>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> AnnuflowStatus {
    match err {
        Error::Io(_) => AnnuflowStatus::Io,
        Error::ConfigParse { .. } | Error::ConfigValidation { .. } | Error::Parameter { .. } => AnnuflowStatus::Config,
        Error::Range { .. } => AnnuflowStatus::OutOfRange,
        _ => AnnuflowStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (AnnuflowStatus, String)>) -> AnnuflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AnnuflowStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AnnuflowStatus::Panic
        }
    }
}

fn fail(err: Error) -> (AnnuflowStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (AnnuflowStatus, String) {
    (AnnuflowStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, (AnnuflowStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| (AnnuflowStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a>(run: *const AnnuflowRun) -> Result<&'a AnnuflowRun, (AnnuflowStatus, String)> {
    run.as_ref().ok_or_else(|| null("run"))
}

fn output(run: &AnnuflowRun) -> Result<&RunOutput, (AnnuflowStatus, String)> {
    run.output
        .as_ref()
        .ok_or_else(|| (AnnuflowStatus::NotRun, "run has not been executed".to_string()))
}

unsafe fn publish(out: *mut *mut AnnuflowRun, config: StudyConfig) -> Result<(), (AnnuflowStatus, String)> {
    config.validate().map_err(fail)?;
    *out = Box::into_raw(Box::new(AnnuflowRun { config, output: None }));
    Ok(())
}

/// Creates a run from configuration file text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_from_config(text: *const c_char, out: *mut *mut AnnuflowRun) -> AnnuflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = parse_config(c_str(text, "text")?).map_err(fail)?;
        publish(out, config)
    })
}

/// Creates one of the built-in studies. With `gradient` the oscillating
/// axial pressure gradient is switched on.
///
/// # Safety
/// `cycles` must point to `n_cycles` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_standard(
    model: AnnuflowModel,
    gradient: bool,
    n_nodes: usize,
    cycles: *const f64,
    n_cycles: usize,
    out: *mut *mut AnnuflowRun,
) -> AnnuflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if cycles.is_null() && n_cycles > 0 {
            return Err(null("cycles"));
        }
        let cycles = if n_cycles == 0 { &[][..] } else { std::slice::from_raw_parts(cycles, n_cycles) };
        let kind = match model {
            AnnuflowModel::Newtonian => ModelKind::Newtonian,
            AnnuflowModel::Model1 => ModelKind::Model1,
            AnnuflowModel::Model2a => ModelKind::Model2a,
            AnnuflowModel::Model2b => ModelKind::Model2b,
        };
        let mut config = StudyConfig::standard(kind, gradient, cycles);
        config.n_nodes = n_nodes;
        publish(out, config)
    })
}

/// Integrates the run. Returns `Aborted` if the integrator gave up; the
/// snapshots reached before that remain readable.
///
/// # Safety
/// `run` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_execute(run: *mut AnnuflowRun) -> AnnuflowStatus {
    guard(|| {
        let run = run.as_mut().ok_or_else(|| null("run"))?;
        let out = annuflow::run(&run.config).map_err(fail)?;
        let status = out.status.clone();
        run.output = Some(out);
        match status {
            RunStatus::Complete => Ok(()),
            RunStatus::Aborted { t_last_good, reason } => Err((
                AnnuflowStatus::Aborted,
                format!("aborted at t = {t_last_good}: {reason}"),
            )),
        }
    })
}

/// # Safety
/// `run` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_snapshot_count(run: *const AnnuflowRun, count: *mut usize) -> AnnuflowStatus {
    guard(|| {
        let out = output(handle(run)?)?;
        *count.as_mut().ok_or_else(|| null("count"))? = out.snapshots.len();
        Ok(())
    })
}

/// Number of radial nodes in every snapshot.
///
/// # Safety
/// `run` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_node_count(run: *const AnnuflowRun, count: *mut usize) -> AnnuflowStatus {
    guard(|| {
        let run = handle(run)?;
        *count.as_mut().ok_or_else(|| null("count"))? = run.config.n_nodes;
        Ok(())
    })
}

/// Time and cycle count of snapshot `k`. Either output pointer may be null.
///
/// # Safety
/// `run` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_snapshot_time(
    run: *const AnnuflowRun,
    k: usize,
    t_hat: *mut f64,
    cycles: *mut f64,
) -> AnnuflowStatus {
    guard(|| {
        let out = output(handle(run)?)?;
        let s = out.snapshots.get(k).ok_or_else(|| {
            (AnnuflowStatus::OutOfRange, format!("snapshot {k} of {}", out.snapshots.len()))
        })?;
        if let Some(t) = t_hat.as_mut() {
            *t = s.t_hat;
        }
        if let Some(c) = cycles.as_mut() {
            *c = s.cycle_count;
        }
        Ok(())
    })
}

/// Copies one profile of snapshot `k` into `buf`, which must hold at least
/// the node count.
///
/// # Safety
/// `run` must be a live handle and `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_snapshot_field(
    run: *const AnnuflowRun,
    k: usize,
    field: AnnuflowField,
    buf: *mut f64,
    len: usize,
) -> AnnuflowStatus {
    guard(|| {
        let out = output(handle(run)?)?;
        let s = out.snapshots.get(k).ok_or_else(|| {
            (AnnuflowStatus::OutOfRange, format!("snapshot {k} of {}", out.snapshots.len()))
        })?;
        let src = match field {
            AnnuflowField::Radius => &s.r,
            AnnuflowField::Swirl => &s.v,
            AnnuflowField::Axial => &s.w,
            AnnuflowField::Concentration => &s.c,
            AnnuflowField::Viscosity => &s.mu,
            AnnuflowField::Pressure => &s.h,
        };
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < src.len() {
            return Err((
                AnnuflowStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", src.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, src.len()).copy_from_slice(src);
        Ok(())
    })
}

/// Writes snapshots, centerline series, plot script and manifest into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_write(run: *const AnnuflowRun, dir: *const c_char) -> AnnuflowStatus {
    guard(|| {
        let run = handle(run)?;
        let out = output(run)?;
        let dir = c_str(dir, "dir")?;
        write_run(Path::new(dir), &run.config, out).map_err(fail)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `run` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn annuflow_run_free(run: *mut AnnuflowRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn annuflow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn annuflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
