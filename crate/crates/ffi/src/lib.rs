//! C ABI over the `pssm` crate.
//!
//! Every fallible entry point returns a [`PssmStatus`]. On failure a
//! human-readable message is stored per thread and can be copied out with
//! [`pssm_last_error_message`]. Objectives are exposed as opaque handles that
//! the caller must release with the matching `_free` function. Panics never
//! cross the boundary; they surface as `PSSM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use pssm::accounting::{gumbel_gamma, laplace_sigma, CompositionMode, PrivacyParams};
use pssm::data::Point;
use pssm::experiment::{emit_csv, run_experiment, ExperimentConfig};
use pssm::objectives::KMedians;
use pssm::streaming::{pssm, GuessLadder, NoiseMode, PssmConfig};
use pssm::{Error, Oracle};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PssmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Config = 3,
    Data = 4,
    Io = 5,
    BufferTooSmall = 6,
    EnumerationGuard = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PssmNoise {
    Laplace = 0,
    Gumbel = 1,
    /// Noiseless, exact argmax. Not private.
    Zero = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PssmComposition {
    Basic = 0,
    Advanced = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PssmPoint {
    pub x: f64,
    pub y: f64,
}

/// Options for [`pssm_kmedians_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PssmRunOptions {
    pub k: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub composition: PssmComposition,
    pub noise: PssmNoise,
    /// Public bound on the stream length; 0 means the stream's own length.
    pub n_bound: usize,
    pub seed: u64,
}

/// Opaque k-medians objective.
pub struct PssmKMedians {
    inner: KMedians,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PssmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parameter(_) => PssmStatus::InvalidParameter,
            Error::Config(_) => PssmStatus::Config,
            Error::EnumerationGuard { .. } => PssmStatus::EnumerationGuard,
            Error::Data { .. } | Error::Csv(_) => PssmStatus::Data,
            Error::Io(_) => PssmStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PssmStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PssmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PssmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            PssmStatus::Panic
        }
    }
}

unsafe fn slice_or_empty<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(PssmStatus::InvalidParameter, format!("{what} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pssm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (always
/// NUL-terminated when `len > 0`) and returns the buffer size needed for the
/// full message including the terminator. Returns 0 if no error is stored.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pssm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Builds a k-medians objective over `clients` and `candidates`.
/// A non-positive `normalizer` selects the default (Manhattan diameter of
/// the joint bounding box).
///
/// # Safety
/// Point arrays must hold the stated number of elements; `out` must be a
/// valid pointer. The handle written to `out` must be released with
/// [`pssm_kmedians_free`].
#[no_mangle]
pub unsafe extern "C" fn pssm_kmedians_new(
    clients: *const PssmPoint,
    num_clients: usize,
    candidates: *const PssmPoint,
    num_candidates: usize,
    normalizer: f64,
    out: *mut *mut PssmKMedians,
) -> PssmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let to_points = |ps: &[PssmPoint]| ps.iter().map(|p| Point::new(p.x, p.y)).collect::<Vec<_>>();
        let clients = to_points(slice_or_empty(clients, num_clients, "clients")?);
        let candidates = to_points(slice_or_empty(candidates, num_candidates, "candidates")?);
        let inner = if normalizer > 0.0 {
            KMedians::new(clients, candidates, normalizer)?
        } else {
            KMedians::with_default_normalizer(clients, candidates)?
        };
        *out = Box::into_raw(Box::new(PssmKMedians { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`pssm_kmedians_new`] and not have
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn pssm_kmedians_free(handle: *mut PssmKMedians) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of candidates (the ground set size), or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pssm_kmedians_num_candidates(handle: *const PssmKMedians) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.ground_size())
}

/// Writes the normalised objective `f(S)` and the clustering cost
/// `sum_p d(p, S)` of candidate indices `set`. Either output may be null.
///
/// # Safety
/// `handle` must be live, `set` must hold `len` indices.
#[no_mangle]
pub unsafe extern "C" fn pssm_kmedians_evaluate(
    handle: *const PssmKMedians,
    set: *const usize,
    len: usize,
    out_value: *mut f64,
    out_cost: *mut f64,
) -> PssmStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let set = slice_or_empty(set, len, "set")?;
        let ground = h.inner.ground_size();
        if let Some(&bad) = set.iter().find(|&&e| e >= ground) {
            return Err(Failure(PssmStatus::InvalidParameter, format!("index {bad} out of range {ground}")));
        }
        if let Some(v) = out_value.as_mut() {
            *v = h.inner.evaluate(set);
        }
        if let Some(c) = out_cost.as_mut() {
            *c = h.inner.cost(set);
        }
        Ok(())
    })
}

/// Runs the private streaming maximizer over `stream` (candidate indices in
/// arrival order) and writes the selected indices to `out_set`.
///
/// `*out_len` receives the number of selected elements. If `out_capacity`
/// is too small, nothing is written to `out_set`, `*out_len` holds the
/// required size, and `PSSM_STATUS_BUFFER_TOO_SMALL` is returned. A capacity
/// of `k` always suffices.
///
/// # Safety
/// `handle` and `options` must be valid; `stream` must hold `stream_len`
/// indices; `out_set` must hold `out_capacity` writable slots.
#[no_mangle]
pub unsafe extern "C" fn pssm_kmedians_run(
    handle: *const PssmKMedians,
    stream: *const usize,
    stream_len: usize,
    options: *const PssmRunOptions,
    out_set: *mut usize,
    out_capacity: usize,
    out_len: *mut usize,
) -> PssmStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let opts = options.as_ref().ok_or_else(|| null("options"))?;
        let out_len = out_len.as_mut().ok_or_else(|| null("out_len"))?;
        let stream = slice_or_empty(stream, stream_len, "stream")?;
        let mode = match opts.composition {
            PssmComposition::Basic => CompositionMode::Basic,
            PssmComposition::Advanced => CompositionMode::Advanced,
        };
        let noise = match opts.noise {
            PssmNoise::Laplace => NoiseMode::Laplace,
            PssmNoise::Gumbel => NoiseMode::Gumbel,
            PssmNoise::Zero => NoiseMode::ZeroForTest,
        };
        let privacy = PrivacyParams::new(opts.epsilon, opts.delta, mode)?;
        let n_bound = if opts.n_bound == 0 { stream.len() } else { opts.n_bound };
        let cfg = PssmConfig::new(opts.k, opts.theta, privacy, noise, n_bound, opts.seed);
        let (selected, _) = pssm(&h.inner, stream.iter().copied(), &cfg)?;
        *out_len = selected.len();
        if selected.len() > out_capacity {
            return Err(Failure(
                PssmStatus::BufferTooSmall,
                format!("need {} slots, got {out_capacity}", selected.len()),
            ));
        }
        if !selected.is_empty() {
            if out_set.is_null() {
                return Err(null("out_set"));
            }
            ptr::copy_nonoverlapping(selected.as_ptr(), out_set, selected.len());
        }
        Ok(())
    })
}

/// Per-instance Laplace threshold scale for `k`, `t` guesses and `(epsilon, delta)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pssm_laplace_sigma(k: usize, t: usize, epsilon: f64, delta: f64, out: *mut f64) -> PssmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = laplace_sigma(k, t, epsilon, delta)?;
        Ok(())
    })
}

/// Shared Gumbel scale for `t` guesses and `(epsilon, delta)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pssm_gumbel_gamma(t: usize, epsilon: f64, delta: f64, out: *mut f64) -> PssmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = gumbel_gamma(t, epsilon, delta)?;
        Ok(())
    })
}

/// Number of guesses in the ladder from `lower` to `upper` with ratio `1 + theta`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pssm_ladder_size(lower: f64, upper: f64, theta: f64, out: *mut usize) -> PssmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = GuessLadder::build(lower, upper, theta)?.len();
        Ok(())
    })
}

/// Parses a `key = value` experiment config, runs the sweep and writes the
/// per-epsilon CSVs into `out_dir`. Cell failures are reported as
/// `PSSM_STATUS_CONFIG` after the successful cells have been written.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pssm_experiment_run(config_text: *const c_char, out_dir: *const c_char) -> PssmStatus {
    guard(|| {
        let cfg = ExperimentConfig::parse(c_str(config_text, "config_text")?)?;
        let dir = c_str(out_dir, "out_dir")?;
        let report = run_experiment(&cfg)?;
        if !report.cells.is_empty() {
            emit_csv(&report, Path::new(dir))?;
        }
        if let Some(first) = report.failures.first() {
            return Err(Failure(
                PssmStatus::Config,
                format!("{} cell(s) failed; first: {} k={} eps={}: {}", report.failures.len(), first.method, first.k, first.epsilon, first.reason),
            ));
        }
        Ok(())
    })
}
