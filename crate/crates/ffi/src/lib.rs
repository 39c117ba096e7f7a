//! C ABI for `magsample`.
//!
//! Every fallible function returns an [`MsStatus`]; on failure a message is
//! available from [`ms_last_error`] on the same thread. Objects cross the
//! boundary as opaque handles that must be released with their `*_free`
//! function. Kernels are chosen by selector string: `abs`, `info` or
//! `custom:<path>`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use magsample::optimize::{optimize_max_avg, optimize_max_min, OptimizationConfig};
use magsample::rankme::rankme_row_major;
use magsample::sampler::{generate_plan, CropPlanEntry, SamplerConfig};
use magsample::{signal_summary, transfer_potential, Error, KernelSpec, MagRange, SamplingDistribution};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Parse = 4,
    Io = 5,
    Solver = 6,
    Infeasible = 7,
    Shape = 8,
    Degenerate = 9,
    Validation = 10,
    Panic = 11,
}

impl From<&Error> for MsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parameter(_) => MsStatus::InvalidArgument,
            Error::Range(_) => MsStatus::OutOfRange,
            Error::Parse { .. } => MsStatus::Parse,
            Error::Io { .. } => MsStatus::Io,
            Error::Solver { .. } => MsStatus::Solver,
            Error::Feasibility { .. } => MsStatus::Infeasible,
            Error::Shape(_) => MsStatus::Shape,
            Error::Degenerate(_) => MsStatus::Degenerate,
            Error::Validation(_) => MsStatus::Validation,
        }
    }
}

/// Opaque sampling distribution.
pub struct MsDistribution {
    inner: SamplingDistribution,
}

/// Opaque crop plan.
pub struct MsPlan {
    entries: Vec<CropPlanEntry>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MsSignalSummary {
    pub min_value: f64,
    pub argmin_y: f64,
    pub total: f64,
    pub mean: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MsCropPlanEntry {
    pub index: u64,
    pub target_mpp: f64,
    pub source_mpp: f64,
    pub source_size_px: u32,
    pub crop_size_px: u32,
    pub output_size_px: u32,
    pub offset_x_frac: f64,
    pub offset_y_frac: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(MsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(MsStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(MsStatus::InvalidArgument, message.into())
}

/// Runs `body`, recording failures and containing panics.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn kernel_arg(selector: *const c_char) -> Result<KernelSpec, Failure> {
    Ok(KernelSpec::from_selector(str_arg(selector, "kernel selector")?)?)
}

fn into_handle(dist: SamplingDistribution) -> *mut MsDistribution {
    Box::into_raw(Box::new(MsDistribution { inner: dist }))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `K(x, y)`.
///
/// # Safety
/// `kernel` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_kernel_eval(kernel: *const c_char, x: f64, y: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = kernel_arg(kernel)?.eval(x, y)?;
        Ok(())
    })
}

/// Transfer potential `∫_a^b K(x, y) dy`.
///
/// # Safety
/// `kernel` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_transfer_potential(
    kernel: *const c_char,
    a: f64,
    b: f64,
    x: f64,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let range = MagRange::new(a, b)?;
        *out = transfer_potential(&kernel_arg(kernel)?, &range, x)?;
        Ok(())
    })
}

/// Equal-weight atoms at `locations[0..count]`.
///
/// # Safety
/// `locations` must point to `count` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ms_distribution_discrete_uniform(
    a: f64,
    b: f64,
    locations: *const f64,
    count: usize,
    out: *mut *mut MsDistribution,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let locations = slice_arg(locations, count, "locations")?;
        *out = into_handle(SamplingDistribution::discrete_uniform(MagRange::new(a, b)?, locations)?);
        Ok(())
    })
}

/// Uniform density on `cells` equal cells.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ms_distribution_continuous_uniform(
    a: f64,
    b: f64,
    cells: usize,
    out: *mut *mut MsDistribution,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_handle(SamplingDistribution::continuous_uniform(MagRange::new(a, b)?, cells)?);
        Ok(())
    })
}

/// Reads a distribution file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ms_distribution_read(path: *const c_char, out: *mut *mut MsDistribution) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_handle(SamplingDistribution::read(str_arg(path, "path")?)?);
        Ok(())
    })
}

/// Writes a distribution file.
///
/// # Safety
/// `dist` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ms_distribution_write(dist: *const MsDistribution, path: *const c_char) -> MsStatus {
    guard(|| {
        let dist = dist.as_ref().ok_or_else(|| null("dist"))?;
        let path = Path::new(str_arg(path, "path")?);
        std::fs::write(path, dist.inner.to_text(&[])).map_err(|e| Failure(MsStatus::Io, format!("{}: {e}", path.display())))
    })
}

/// Releases a distribution handle. Null is ignored.
///
/// # Safety
/// `dist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_distribution_free(dist: *mut MsDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Accumulated-signal summary on a `grid_n`-point grid.
///
/// # Safety
/// `dist` must be a live handle, `kernel` a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_signal_summary(
    dist: *const MsDistribution,
    kernel: *const c_char,
    grid_n: usize,
    out: *mut MsSignalSummary,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let dist = dist.as_ref().ok_or_else(|| null("dist"))?;
        let s = signal_summary(&dist.inner, &kernel_arg(kernel)?, grid_n)?;
        *out = MsSignalSummary {
            min_value: s.min_value,
            argmin_y: s.argmin_y,
            total: s.total,
            mean: s.mean,
        };
        Ok(())
    })
}

/// Entropy-regularized max-average (Gibbs) distribution.
///
/// # Safety
/// `kernel` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ms_optimize_max_avg(
    kernel: *const c_char,
    a: f64,
    b: f64,
    grid_n: usize,
    lambda: f64,
    out: *mut *mut MsDistribution,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = OptimizationConfig::max_avg(kernel_arg(kernel)?, lambda)
            .with_grid(grid_n)
            .with_range(MagRange::new(a, b)?);
        *out = into_handle(optimize_max_avg(&cfg)?);
        Ok(())
    })
}

/// Max-min distribution; `achieved_t` (may be null) receives the worst-case signal.
///
/// # Safety
/// `kernel` must be a NUL-terminated string, `out` a writable handle slot and
/// `achieved_t` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ms_optimize_max_min(
    kernel: *const c_char,
    a: f64,
    b: f64,
    grid_n: usize,
    out: *mut *mut MsDistribution,
    achieved_t: *mut f64,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = OptimizationConfig::max_min(kernel_arg(kernel)?)
            .with_grid(grid_n)
            .with_range(MagRange::new(a, b)?);
        let sol = optimize_max_min(&cfg)?;
        if let Some(t) = achieved_t.as_mut() {
            *t = sol.achieved_t;
        }
        *out = into_handle(sol.distribution);
        Ok(())
    })
}

/// Seeded crop plan with `n` entries.
///
/// # Safety
/// `dist` must be a live handle, `standards` must point to `n_standards`
/// doubles and `out` to a writable handle slot.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ms_plan_generate(
    dist: *const MsDistribution,
    n: usize,
    seed: u64,
    source_size_px: u32,
    output_size_px: u32,
    standards: *const f64,
    n_standards: usize,
    out: *mut *mut MsPlan,
) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let dist = dist.as_ref().ok_or_else(|| null("dist"))?;
        let standards = slice_arg(standards, n_standards, "standards")?;
        let cfg = SamplerConfig::new(dist.inner.clone(), standards.to_vec(), source_size_px, output_size_px, seed)?;
        let entries = generate_plan(&cfg, n)?;
        *out = Box::into_raw(Box::new(MsPlan { entries }));
        Ok(())
    })
}

/// Number of entries in a plan; 0 for null.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_plan_len(plan: *const MsPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.entries.len())
}

/// Copies entry `i` into `out`.
///
/// # Safety
/// `plan` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_plan_get(plan: *const MsPlan, i: usize, out: *mut MsCropPlanEntry) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let plan = plan.as_ref().ok_or_else(|| null("plan"))?;
        let e = plan.entries.get(i).ok_or_else(|| {
            Failure(MsStatus::OutOfRange, format!("entry {i} of a {}-entry plan", plan.entries.len()))
        })?;
        *out = MsCropPlanEntry {
            index: e.index,
            target_mpp: e.target_mpp,
            source_mpp: e.source_mpp,
            source_size_px: e.source_size_px,
            crop_size_px: e.crop_size_px,
            output_size_px: e.output_size_px,
            offset_x_frac: e.offset_x_frac,
            offset_y_frac: e.offset_y_frac,
        };
        Ok(())
    })
}

/// Releases a plan handle. Null is ignored.
///
/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_plan_free(plan: *mut MsPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// RankMe of a row-major `rows × cols` matrix.
///
/// # Safety
/// `data` must point to `rows · cols` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn ms_rankme(data: *const f64, rows: usize, cols: usize, epsilon: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("matrix dimensions overflow"))?;
        if len == 0 {
            return Err(invalid("matrix is empty"));
        }
        let data = slice_arg(data, len, "data")?;
        *out = rankme_row_major(data, rows, cols, epsilon)?;
        Ok(())
    })
}
