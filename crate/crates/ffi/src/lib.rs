//! C ABI for the `bandex` extrapolation library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_lowpass` functions and released with the matching `*_free`. Every
//! fallible call returns a [`BxStatus`]; on failure a description is
//! available from [`bx_last_error_message`] on the same thread.
//!
//! Arrays are passed as pointer + length. Grid coordinates and signals are
//! row-major with the last axis contiguous.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use bandex::engine::StopReason;
use bandex::{
    least_squares_oracle, run_extrapolation, tikhonov_oracle, Error, GridShape, IterationReport,
    MeasuredSignal, Mode, Region, RegularizationParams, RunConfig, Signal, SpectralSupport,
    WeightedRegionSet,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ContractViolation = 3,
    NoConvergence = 4,
    Diverged = 5,
    Io = 6,
    Format = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BxStopReason {
    MaxIters = 0,
    ResidualTol = 1,
    Diverged = 2,
}

/// Iteration controls for [`bx_run`]. `regularized == false` ignores `mu`
/// and `tau`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BxRunOptions {
    pub regularized: bool,
    pub mu: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub record_every: usize,
}

/// One recorded iteration. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BxRecord {
    pub iteration: usize,
    pub nmse_db: f64,
    pub residual: f64,
    pub contraction: f64,
}

/// Opaque spectral support.
pub struct BxSupport(SpectralSupport);

/// Opaque measured signal with its weighted regions.
pub struct BxProblem(MeasuredSignal);

/// Opaque iteration report.
pub struct BxReport(IterationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BxStatus {
    match err {
        Error::Parameter(_)
        | Error::Validation { .. }
        | Error::Config(_)
        | Error::DegenerateSpectrum(_)
        | Error::Synthesis(_)
        | Error::ExactlyBandlimited
        | Error::UndefinedMetric(_) => BxStatus::InvalidArgument,
        Error::Contract(_) => BxStatus::ContractViolation,
        Error::NoConvergence { .. } => BxStatus::NoConvergence,
        Error::Diverged(_) => BxStatus::Diverged,
        Error::Io(_) => BxStatus::Io,
        Error::Format { .. } => BxStatus::Format,
        Error::Internal(_) => BxStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn guard(body: impl FnOnce() -> FfiResult) -> BxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BxStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            BxStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BxStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Centered box support with `half_bandwidth[a]` bins either side of DC on
/// each axis.
///
/// # Safety
/// `dims` and `half_bandwidth` must point to `ndim` values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bx_support_lowpass(
    dims: *const usize,
    half_bandwidth: *const usize,
    ndim: usize,
    out: *mut *mut BxSupport,
) -> BxStatus {
    guard(|| {
        let dims = as_slice(dims, ndim, "dims")?;
        let hb = as_slice(half_bandwidth, ndim, "half_bandwidth")?;
        let shape = GridShape::new(dims.to_vec())?;
        let support = SpectralSupport::lowpass(&shape, hb)?;
        write_out(out, Box::into_raw(Box::new(BxSupport(support))), "out")
    })
}

/// Number of in-band bins, or 0 for a null handle.
///
/// # Safety
/// `support` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bx_support_count(support: *const BxSupport) -> usize {
    support.as_ref().map_or(0, |s| s.0.count())
}

/// # Safety
/// `support` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bx_support_free(support: *mut BxSupport) {
    if !support.is_null() {
        drop(Box::from_raw(support));
    }
}

/// Measurement problem on the support's grid. Region `m` is the box with
/// corner `corners[m*ndim..]` and extent `extents[m*ndim..]`. `weights` may
/// be null for uniform weights. `field` holds the full grid signal; only its
/// values inside the regions are kept.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bx_problem_new(
    support: *const BxSupport,
    corners: *const usize,
    extents: *const usize,
    n_regions: usize,
    weights: *const f64,
    field: *const f64,
    field_len: usize,
    out: *mut *mut BxProblem,
) -> BxStatus {
    guard(|| {
        let support = &as_ref(support, "support")?.0;
        let shape = support.shape();
        let ndim = shape.ndim();
        let corners = as_slice(corners, n_regions * ndim, "corners")?;
        let extents = as_slice(extents, n_regions * ndim, "extents")?;
        let regions = (0..n_regions)
            .map(|m| {
                let span = m * ndim..(m + 1) * ndim;
                Region::from_rect(shape, &corners[span.clone()], &extents[span])
            })
            .collect::<Result<Vec<_>, _>>()?;
        let set = if weights.is_null() {
            WeightedRegionSet::uniform(regions)?
        } else {
            WeightedRegionSet::new(regions, slice::from_raw_parts(weights, n_regions).to_vec())?
        };
        let field = Signal::new(shape.clone(), as_slice(field, field_len, "field")?.to_vec())?;
        let meas = MeasuredSignal::observe(set, &field)?;
        write_out(out, Box::into_raw(Box::new(BxProblem(meas))), "out")
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bx_problem_free(problem: *mut BxProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Unregularized defaults: 1000 iterations, no residual stop, every step
/// recorded.
#[no_mangle]
pub extern "C" fn bx_run_options_default() -> BxRunOptions {
    BxRunOptions {
        regularized: false,
        mu: 0.0,
        tau: 1.0,
        max_iters: 1000,
        residual_tol: 0.0,
        record_every: 1,
    }
}

/// Runs the iteration. `truth` (nullable, `truth_len` samples) enables the
/// NMSE column. On [`BxStatus::Diverged`] `*out` still receives the partial
/// report.
///
/// # Safety
/// `support` and `problem` must be live handles on the same grid; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn bx_run(
    support: *const BxSupport,
    problem: *const BxProblem,
    options: BxRunOptions,
    truth: *const f64,
    truth_len: usize,
    out: *mut *mut BxReport,
) -> BxStatus {
    let mut partial: Option<IterationReport> = None;
    let status = guard(|| {
        let support = &as_ref(support, "support")?.0;
        let problem = &as_ref(problem, "problem")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let mode = if options.regularized {
            Mode::Regularized(RegularizationParams::new(options.mu, options.tau)?)
        } else {
            Mode::Unregularized
        };
        let cfg = RunConfig::new(
            mode,
            options.max_iters,
            options.residual_tol,
            options.record_every,
        )?;
        let truth = if truth.is_null() {
            None
        } else {
            Some(Signal::new(
                support.shape().clone(),
                as_slice(truth, truth_len, "truth")?.to_vec(),
            )?)
        };
        match run_extrapolation(problem, support, &cfg, truth.as_ref()) {
            Ok(report) => {
                partial = Some(report);
                Ok(())
            }
            Err(Error::Diverged(report)) => {
                partial = Some((*report).clone());
                Err(Failure::Lib(Error::Diverged(report)))
            }
            Err(e) => Err(e.into()),
        }
    });
    if let Some(report) = partial {
        out.write(Box::into_raw(Box::new(BxReport(report))));
    }
    status
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bx_report_free(report: *mut BxReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bx_report_iterations(report: *const BxReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.iterations)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bx_report_record_count(report: *const BxReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.records.len())
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bx_report_stop_reason(
    report: *const BxReport,
    out: *mut BxStopReason,
) -> BxStatus {
    guard(|| {
        let reason = match as_ref(report, "report")?.0.stop_reason {
            StopReason::MaxIters => BxStopReason::MaxIters,
            StopReason::ResidualTol => BxStopReason::ResidualTol,
            StopReason::Diverged => BxStopReason::Diverged,
        };
        write_out(out, reason, "out")
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bx_report_record(
    report: *const BxReport,
    index: usize,
    out: *mut BxRecord,
) -> BxStatus {
    guard(|| {
        let records = &as_ref(report, "report")?.0.records;
        let r = records.get(index).ok_or_else(|| {
            Error::Parameter(format!(
                "record {index} out of range (count {})",
                records.len()
            ))
        })?;
        let record = BxRecord {
            iteration: r.iteration,
            nmse_db: r.nmse_db.unwrap_or(f64::NAN),
            residual: r.residual,
            contraction: r.contraction.unwrap_or(f64::NAN),
        };
        write_out(out, record, "out")
    })
}

/// Copies the final iterate into `out`, which must hold exactly the grid's
/// sample count.
///
/// # Safety
/// `report` must be a live handle; `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bx_report_copy_signal(
    report: *const BxReport,
    out: *mut f64,
    len: usize,
) -> BxStatus {
    guard(|| copy_values(as_ref(report, "report")?.0.final_signal.values(), out, len))
}

unsafe fn copy_values(values: &[f64], out: *mut f64, len: usize) -> FfiResult {
    if len != values.len() {
        return Err(Error::Parameter(format!(
            "buffer holds {len} values, signal has {}",
            values.len()
        ))
        .into());
    }
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, len);
    Ok(())
}

/// Direct solve over the bandlimited subspace: least squares when
/// `mu == 0`, Tikhonov otherwise. Writes the solution into `out` (`len`
/// values) and the normal-matrix condition number into `condition`
/// (nullable).
///
/// # Safety
/// Handles must be live; `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bx_oracle(
    support: *const BxSupport,
    problem: *const BxProblem,
    mu: f64,
    out: *mut f64,
    len: usize,
    condition: *mut f64,
) -> BxStatus {
    guard(|| {
        let support = &as_ref(support, "support")?.0;
        let problem = &as_ref(problem, "problem")?.0;
        let sol = if mu == 0.0 {
            least_squares_oracle(problem, support)?
        } else {
            tikhonov_oracle(problem, support, mu)?
        };
        copy_values(sol.signal.values(), out, len)?;
        if !condition.is_null() {
            condition.write(sol.condition_number);
        }
        Ok(())
    })
}

/// NMSE in dB of `estimate` against `truth`, both `len` samples.
/// Exact agreement yields negative infinity.
///
/// # Safety
/// Both arrays must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bx_nmse(
    truth: *const f64,
    estimate: *const f64,
    len: usize,
    out: *mut f64,
) -> BxStatus {
    guard(|| {
        let shape = GridShape::new(vec![len])?;
        let t = Signal::new(shape.clone(), as_slice(truth, len, "truth")?.to_vec())?;
        let e = Signal::new(shape, as_slice(estimate, len, "estimate")?.to_vec())?;
        write_out(out, bandex::nmse(&t, &e)?, "out")
    })
}

/// Writes `values` (row-major, `ndim` axes) as an NDSIG file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; arrays must hold the
/// stated counts (`values`: product of `dims`).
#[no_mangle]
pub unsafe extern "C" fn bx_write_ndsig(
    path: *const c_char,
    dims: *const usize,
    ndim: usize,
    values: *const f64,
) -> BxStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Parameter("path is not valid UTF-8".into()))?;
        let shape = GridShape::new(as_slice(dims, ndim, "dims")?.to_vec())?;
        let n = shape.len();
        let signal = Signal::new(shape, as_slice(values, n, "values")?.to_vec())?;
        bandex::io::write_signal(&signal, path)?;
        Ok(())
    })
}

/// Reads an NDSIG file. Writes the axis count to `ndim`, up to `dims_cap`
/// axis lengths to `dims`, and, when `values_cap` is large enough, the
/// samples to `values`. Call with zero capacities to query sizes; the
/// sample count goes to `len`.
///
/// # Safety
/// `path` must be NUL-terminated; output arrays must hold their capacities.
#[no_mangle]
pub unsafe extern "C" fn bx_read_ndsig(
    path: *const c_char,
    dims: *mut usize,
    dims_cap: usize,
    ndim: *mut usize,
    values: *mut f64,
    values_cap: usize,
    len: *mut usize,
) -> BxStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Parameter("path is not valid UTF-8".into()))?;
        let signal = bandex::io::read_signal(path)?;
        let shape = signal.shape().dims();
        write_out(ndim, shape.len(), "ndim")?;
        write_out(len, signal.values().len(), "len")?;
        if dims_cap >= shape.len() && !dims.is_null() {
            ptr::copy_nonoverlapping(shape.as_ptr(), dims, shape.len());
        }
        if values_cap >= signal.values().len() && !values.is_null() {
            ptr::copy_nonoverlapping(signal.values().as_ptr(), values, signal.values().len());
        }
        Ok(())
    })
}
