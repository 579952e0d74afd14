//! C interface to the spray moment library.
//!
//! Every function returns a [`SprayStatus`]; on failure the message is kept per thread
//! and read back with [`spray_last_error`]. Cases and runs are opaque handles owned by
//! the caller and released with their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use spraymom::evaporation::{step_nemo_robust, EvaporationLaw};
use spraymom::io::{parse_config, parse_config_str, write_run};
use spraymom::maxent::{maxent_reconstruct, MaxEntSettings};
use spraymom::moment_space::{is_realizable, ExponentBasis, MomentVector, Realizability};
use spraymom::simulator::{run_case, CaseConfig, RunOutput};
use spraymom::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprayStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotRealizable = 3,
    NonConvergence = 4,
    Conditioning = 5,
    Config = 6,
    Io = 7,
    OutOfRange = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprayBasis {
    /// Sizes `S^0, S^1/2, S^1, S^3/2`.
    Fractional = 0,
    /// Sizes `S^0 .. S^3`.
    Integer = 1,
}

impl From<SprayBasis> for ExponentBasis {
    fn from(b: SprayBasis) -> Self {
        match b {
            SprayBasis::Fractional => ExponentBasis::Fractional,
            SprayBasis::Integer => ExponentBasis::Integer,
        }
    }
}

/// Realizability class written by [`spray_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprayRealizability {
    Interior = 0,
    Boundary = 1,
    Outside = 2,
}

/// A validated case configuration.
pub struct SprayCase {
    config: CaseConfig,
}

/// Result of running a case.
pub struct SprayRun {
    output: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn status_of(e: &Error) -> SprayStatus {
    match e.root() {
        Error::InvalidArgument(_) | Error::UnsupportedBasis(_) | Error::Cfl { .. } => SprayStatus::InvalidArgument,
        Error::NotRealizable(_) | Error::BoundaryOfMomentSpace { .. } => SprayStatus::NotRealizable,
        Error::NonConvergence(_) => SprayStatus::NonConvergence,
        Error::Conditioning(_) | Error::NonFinite { .. } | Error::SingularIntegral { .. } => SprayStatus::Conditioning,
        Error::Config(_) => SprayStatus::Config,
        Error::Io(_) => SprayStatus::Io,
        Error::At { .. } => unreachable!("root strips location context"),
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|s| *s.borrow_mut() = msg);
}

fn fail(status: SprayStatus, msg: impl Into<String>) -> SprayStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording its error or panic.
fn guard(f: impl FnOnce() -> Result<(), SprayStatus>) -> SprayStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SprayStatus::Ok,
        Ok(Err(status)) => status,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SprayStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SprayStatus>;
}

impl<T> OrStatus<T> for spraymom::Result<T> {
    fn or_status(self) -> Result<T, SprayStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, SprayStatus> {
    p.as_ref().ok_or_else(|| fail(SprayStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn arg_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SprayStatus> {
    p.as_mut().ok_or_else(|| fail(SprayStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn array<'a>(p: *const f64, name: &str) -> Result<&'a [f64; 4], SprayStatus> {
    arg(p.cast::<[f64; 4]>(), name)
}

unsafe fn array_mut<'a>(p: *mut f64, name: &str) -> Result<&'a mut [f64; 4], SprayStatus> {
    arg_mut(p.cast::<[f64; 4]>(), name)
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, SprayStatus> {
    if p.is_null() {
        return Err(fail(SprayStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(SprayStatus::InvalidArgument, format!("`{name}` is not UTF-8: {e}")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
/// to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn spray_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|s| {
        let s = s.borrow();
        if !buf.is_null() && len > 0 {
            let n = s.len().min(len - 1);
            std::ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        s.len()
    })
}

/// Reads and validates a TOML case file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spray_case_from_file(path: *const c_char, out: *mut *mut SprayCase) -> SprayStatus {
    guard(|| {
        let out = arg_mut(out, "out")?;
        let config = parse_config(text(path, "path")?).or_status()?;
        *out = Box::into_raw(Box::new(SprayCase { config }));
        Ok(())
    })
}

/// Parses and validates TOML case text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spray_case_from_str(toml: *const c_char, out: *mut *mut SprayCase) -> SprayStatus {
    guard(|| {
        let out = arg_mut(out, "out")?;
        let config = parse_config_str(text(toml, "toml")?).or_status()?;
        *out = Box::into_raw(Box::new(SprayCase { config }));
        Ok(())
    })
}

/// # Safety
/// `case` must be null or a handle from `spray_case_from_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spray_case_free(case: *mut SprayCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Runs a case to its end time.
///
/// # Safety
/// `case` must be a live case handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spray_run(case: *const SprayCase, out: *mut *mut SprayRun) -> SprayStatus {
    guard(|| {
        let case = arg(case, "case")?;
        let out = arg_mut(out, "out")?;
        let output = run_case(&case.config).or_status()?;
        *out = Box::into_raw(Box::new(SprayRun { output }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from [`spray_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spray_run_free(run: *mut SprayRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Writes the snapshots and summary of a run into `dir`.
///
/// # Safety
/// `run` must be a live run handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spray_run_write(run: *const SprayRun, dir: *const c_char) -> SprayStatus {
    guard(|| {
        let run = arg(run, "run")?;
        write_run(&run.output, Path::new(text(dir, "dir")?)).or_status()?;
        Ok(())
    })
}

/// Number of snapshots held by a run (at least one).
///
/// # Safety
/// `run` must be a live run handle; `count` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spray_run_snapshot_count(run: *const SprayRun, count: *mut usize) -> SprayStatus {
    guard(|| {
        *arg_mut(count, "count")? = arg(run, "run")?.output.snapshots.len();
        Ok(())
    })
}

/// Time and grid size of snapshot `index`.
///
/// # Safety
/// `run` must be a live run handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn spray_run_snapshot_info(
    run: *const SprayRun,
    index: usize,
    time: *mut f64,
    nx: *mut usize,
    ny: *mut usize,
) -> SprayStatus {
    guard(|| {
        let run = arg(run, "run")?;
        let snap = run
            .output
            .snapshots
            .get(index)
            .ok_or_else(|| fail(SprayStatus::OutOfRange, format!("snapshot {index} of {}", run.output.snapshots.len())))?;
        *arg_mut(time, "time")? = snap.time;
        *arg_mut(nx, "nx")? = snap.nx;
        *arg_mut(ny, "ny")? = snap.ny;
        Ok(())
    })
}

/// Copies the moments of snapshot `index` into `buf`, four per cell, row-major.
///
/// `len` is the capacity of `buf` in doubles and must be at least `4 * nx * ny`.
///
/// # Safety
/// `run` must be a live run handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spray_run_snapshot_moments(
    run: *const SprayRun,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> SprayStatus {
    guard(|| {
        let run = arg(run, "run")?;
        let snap = run.output.snapshots.get(index).ok_or_else(|| fail(SprayStatus::OutOfRange, format!("snapshot {index}")))?;
        let need = 4 * snap.cells.len();
        if len < need {
            return Err(fail(SprayStatus::InvalidArgument, format!("buffer holds {len} values, {need} needed")));
        }
        arg(buf, "buf")?;
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (dst, c) in out.chunks_exact_mut(4).zip(&snap.cells) {
            dst.copy_from_slice(&c.moments.values);
        }
        Ok(())
    })
}

/// Named scalar of the run report, e.g. `max_rel_error_vs_exact`.
///
/// # Safety
/// `run` must be a live run handle, `name` a NUL-terminated string and `value` valid.
#[no_mangle]
pub unsafe extern "C" fn spray_run_scalar(run: *const SprayRun, name: *const c_char, value: *mut f64) -> SprayStatus {
    guard(|| {
        let run = arg(run, "run")?;
        let name = text(name, "name")?;
        let v = run
            .output
            .report
            .scalar(name)
            .ok_or_else(|| fail(SprayStatus::OutOfRange, format!("no scalar named `{name}`")))?;
        *arg_mut(value, "value")? = v;
        Ok(())
    })
}

/// Classifies a moment vector on `[0, 1]`.
///
/// # Safety
/// `moments` must point to 4 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spray_classify(
    moments: *const f64,
    basis: SprayBasis,
    tol: f64,
    out: *mut SprayRealizability,
) -> SprayStatus {
    guard(|| {
        let m = MomentVector::new(basis.into(), *array(moments, "moments")?);
        *arg_mut(out, "out")? = match is_realizable(&m, tol) {
            Realizability::Interior => SprayRealizability::Interior,
            Realizability::Boundary => SprayRealizability::Boundary,
            Realizability::Outside => SprayRealizability::Outside,
        };
        Ok(())
    })
}

/// Maximum-entropy multipliers of an interior moment vector.
///
/// `iterations` may be null.
///
/// # Safety
/// `moments` and `lambdas` must point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn spray_maxent(
    moments: *const f64,
    basis: SprayBasis,
    epsilon: f64,
    max_iter: usize,
    lambdas: *mut f64,
    iterations: *mut usize,
) -> SprayStatus {
    guard(|| {
        let m = MomentVector::new(basis.into(), *array(moments, "moments")?);
        let out = array_mut(lambdas, "lambdas")?;
        let (d, report) = maxent_reconstruct(&m, epsilon, max_iter, None).or_status()?;
        *out = d.lambdas;
        if let Some(it) = iterations.as_mut() {
            *it = report.iterations;
        }
        Ok(())
    })
}

/// One evaporation step under the d² law `dS/dt = -k`.
///
/// Writes the updated moments and the moments lost to droplets that vanished.
///
/// # Safety
/// `moments`, `updated` and `flux` must point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn spray_evaporate_d2(
    moments: *const f64,
    basis: SprayBasis,
    k: f64,
    dt: f64,
    n_neg: usize,
    updated: *mut f64,
    flux: *mut f64,
) -> SprayStatus {
    guard(|| {
        let m = MomentVector::new(basis.into(), *array(moments, "moments")?);
        if !(k >= 0.0 && dt >= 0.0) {
            return Err(fail(SprayStatus::InvalidArgument, format!("need k >= 0 and dt >= 0, got {k} and {dt}")));
        }
        let updated = array_mut(updated, "updated")?;
        let flux = array_mut(flux, "flux")?;
        let r = step_nemo_robust(&m, &EvaporationLaw::d2(k), dt, n_neg, &MaxEntSettings::default(), None).or_status()?;
        *updated = r.updated.values;
        *flux = r.disappearance_flux;
        Ok(())
    })
}
