//! C ABI over the `ar-rul` library.
//!
//! Every fallible function returns an [`ArRulStatus`]; on failure the message
//! is available from [`ar_rul_last_error`] on the same thread until the next
//! failing call. Objects cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Bearings are z-score
//! normalized per channel on load, the same as every CLI load path.
//!
//! The header `include/ar_rul.h` is generated from this file by the build
//! script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ar_rul::armodel::{ArNetwork, InitMode};
use ar_rul::datapipe::{
    detect_fpt, load_native_bearing, load_phm2012_bearing, normalize, pad_and_window, BearingRecord,
    Fpt3SigmaConfig, FptTable, PHM2012_POINTS,
};
use ar_rul::evaluator::{curve_metrics, mae, rmse, rollout, score, PredictionCurve};
use ar_rul::numcore::Mode;
use ar_rul::{Error, Tensor};
use rand::rngs::SmallRng;
use rand::SeedableRng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArRulStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArg = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArg = 2,
    /// A file could not be read or a data directory was incomplete.
    Io = 3,
    /// A file had the wrong structure or unparsable content.
    Format = 4,
    /// Inputs were inconsistent (shapes, geometry, missing labels).
    Contract = 5,
    Config = 6,
    State = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// How the HI window is seeded at each segment start of a rollout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArRulInit {
    /// Ones for the first segment, then the last `k` predictions.
    Carryover = 0,
    /// Ones at every segment start.
    Ones = 1,
    /// True labels; needs a bearing with an FPT set.
    Teacher = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArRulMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub score: f64,
    pub n: usize,
}

/// A trained network loaded from a model directory.
pub struct ArRulModel {
    net: ArNetwork,
}

/// One normalized bearing record, optionally labelled.
pub struct ArRulBearing {
    record: BearingRecord,
}

/// A finished prediction curve.
pub struct ArRulCurve {
    curve: PredictionCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(ArRulStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Contract(_) => ArRulStatus::Contract,
            Error::State(_) => ArRulStatus::State,
            Error::Config { .. } => ArRulStatus::Config,
            Error::Io { .. } | Error::Ingest { .. } => ArRulStatus::Io,
            Error::Parse { .. } | Error::Format(_) => ArRulStatus::Format,
        };
        let mut msg = e.to_string();
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            msg.push_str(&format!(": {s}"));
            src = s.source();
        }
        Fail(status, msg)
    }
}

fn null(name: &str) -> Fail {
    Fail(ArRulStatus::NullArg, format!("`{name}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ArRulStatus::InvalidArg, msg.into())
}

/// Runs `f`, recording its error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ArRulStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArRulStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ArRulStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Fail> {
    Ok(PathBuf::from(str_arg(p, name)?))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ar_rul_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ar_rul_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads `model.toml` and `model.ckpt` from the directory `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_model_load(dir: *const c_char, out: *mut *mut ArRulModel) -> ArRulStatus {
    guard(|| {
        let dir = path_arg(dir, "dir")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let net = ArNetwork::load(&dir)?;
        out.write(Box::into_raw(Box::new(ArRulModel { net })));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`ar_rul_model_load`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_model_free(model: *mut ArRulModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Window size `k` of the model.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_model_window_size(model: *const ArRulModel, out: *mut usize) -> ArRulStatus {
    guard(|| out_arg(out, ref_arg(model, "model")?.net.config().k))
}

/// Points per acquisition `S` the model expects.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_model_points(model: *const ArRulModel, out: *mut usize) -> ArRulStatus {
    guard(|| out_arg(out, ref_arg(model, "model")?.net.config().points))
}

/// One inference step. `block` holds `2k * S` values: row `2j` is the
/// horizontal signal of the window's `j`-th acquisition and row `2j + 1` the
/// vertical one. `hi_window` holds the `k` most recent HI values, oldest
/// first.
///
/// # Safety
/// `block` must point to `block_len` doubles, `hi_window` to `k` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_model_step(
    model: *mut ArRulModel,
    block: *const f64,
    block_len: usize,
    hi_window: *const f64,
    k: usize,
    out: *mut f64,
) -> ArRulStatus {
    guard(|| {
        let model = mut_arg(model, "model")?;
        let cfg = *model.net.config();
        if block_len != 2 * cfg.k * cfg.points {
            return Err(invalid(format!("block_len {block_len}, model expects {}", 2 * cfg.k * cfg.points)));
        }
        if k != cfg.k {
            return Err(invalid(format!("k {k}, model expects {}", cfg.k)));
        }
        let x = Tensor::new(vec![1, 2 * cfg.k, cfg.points], slice_arg(block, block_len, "block")?.to_vec())?;
        let x2 = Tensor::new(vec![1, k], slice_arg(hi_window, k, "hi_window")?.to_vec())?;
        // eval mode never draws from it
        let mut rng = SmallRng::seed_from_u64(0);
        let y = model.net.forward(&x, &x2, Mode::Eval, &mut rng)?;
        out_arg(out, y.data()[0])
    })
}

fn boxed_bearing(record: BearingRecord, out: *mut *mut ArRulBearing) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let record = normalize(record);
    // SAFETY: checked non-null above; the caller guarantees writability
    unsafe { out.write(Box::into_raw(Box::new(ArRulBearing { record }))) };
    Ok(())
}

/// Loads a native CSV bearing (with its JSON sidecar) and normalizes it.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_load_native(csv: *const c_char, out: *mut *mut ArRulBearing) -> ArRulStatus {
    guard(|| {
        let path = path_arg(csv, "csv")?;
        boxed_bearing(load_native_bearing(&path)?, out)
    })
}

/// Loads a PHM2012 bearing directory of `acc_*.csv` files and normalizes it.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_load_phm2012(dir: *const c_char, out: *mut *mut ArRulBearing) -> ArRulStatus {
    guard(|| {
        let path = path_arg(dir, "dir")?;
        boxed_bearing(load_phm2012_bearing(&path, PHM2012_POINTS)?, out)
    })
}

/// # Safety
/// `bearing` must come from a load function and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_free(bearing: *mut ArRulBearing) {
    if !bearing.is_null() {
        drop(Box::from_raw(bearing));
    }
}

/// Number of acquisitions.
///
/// # Safety
/// `bearing` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_len(bearing: *const ArRulBearing, out: *mut usize) -> ArRulStatus {
    guard(|| out_arg(out, ref_arg(bearing, "bearing")?.record.len()))
}

/// FPT index by the 3σ rule on RMS: the baseline is the first
/// `baseline_count` acquisitions and degradation needs `consecutive`
/// exceedances in a row.
///
/// # Safety
/// `bearing` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_detect_fpt(
    bearing: *const ArRulBearing,
    baseline_count: usize,
    consecutive: usize,
    out: *mut usize,
) -> ArRulStatus {
    guard(|| {
        let b = ref_arg(bearing, "bearing")?;
        let cfg = Fpt3SigmaConfig {
            baseline_count,
            consecutive_required: consecutive,
            ..Default::default()
        };
        out_arg(out, detect_fpt(&b.record, &cfg)?)
    })
}

/// Attaches piecewise HI labels with the given FPT index.
///
/// # Safety
/// `bearing` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_bearing_set_fpt(bearing: *mut ArRulBearing, fpt_index: usize) -> ArRulStatus {
    guard(|| {
        let b = mut_arg(bearing, "bearing")?;
        b.record = b.record.clone().with_labels(fpt_index)?;
        Ok(())
    })
}

/// FPT index of a PHM2012 bearing from the built-in table (`"B1-3"`,
/// `"Bearing1_3"` and similar spellings), at a 10 s sampling period.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_fpt_table_index(id: *const c_char, out: *mut usize) -> ArRulStatus {
    guard(|| {
        let id = str_arg(id, "id")?;
        let idx = FptTable::builtin()
            .index(id, ar_rul::datapipe::DEFAULT_SAMPLE_PERIOD_S)
            .ok_or_else(|| invalid(format!("no table FPT for `{id}`")))?;
        out_arg(out, idx)
    })
}

/// Rolls the model over the whole bearing split into `n_segments` segments.
///
/// # Safety
/// `model` and `bearing` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_rollout(
    model: *mut ArRulModel,
    bearing: *const ArRulBearing,
    n_segments: usize,
    init: ArRulInit,
    out: *mut *mut ArRulCurve,
) -> ArRulStatus {
    guard(|| {
        let model = mut_arg(model, "model")?;
        let b = ref_arg(bearing, "bearing")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n_segments == 0 {
            return Err(invalid("n_segments must be at least 1"));
        }
        let init = match init {
            ArRulInit::Carryover => InitMode::Carryover,
            ArRulInit::Ones => InitMode::Ones,
            ArRulInit::Teacher => InitMode::Teacher,
        };
        let data = pad_and_window(b.record.clone(), model.net.config().k, n_segments)?;
        let curve = rollout(&mut model.net, &data, init)?;
        out.write(Box::into_raw(Box::new(ArRulCurve { curve })));
        Ok(())
    })
}

/// # Safety
/// `curve` must come from [`ar_rul_rollout`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_curve_free(curve: *mut ArRulCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of predictions; prediction `i` is the HI of acquisition `i + k`.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_curve_len(curve: *const ArRulCurve, out: *mut usize) -> ArRulStatus {
    guard(|| out_arg(out, ref_arg(curve, "curve")?.curve.len()))
}

/// Copies the predictions into `buf`, which must hold exactly the curve
/// length.
///
/// # Safety
/// `curve` must be a live handle and `buf` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_curve_copy(curve: *const ArRulCurve, buf: *mut f64, len: usize) -> ArRulStatus {
    guard(|| {
        let c = &ref_arg(curve, "curve")?.curve;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != c.len() {
            return Err(invalid(format!("buffer holds {len} values, curve has {}", c.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&c.predicted);
        Ok(())
    })
}

/// RMSE, MAE and score of a curve against its labels.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_curve_metrics(curve: *const ArRulCurve, out: *mut ArRulMetrics) -> ArRulStatus {
    guard(|| {
        let m = curve_metrics(&ref_arg(curve, "curve")?.curve)?;
        out_arg(out, ArRulMetrics { rmse: m.rmse, mae: m.mae, score: m.score, n: m.n })
    })
}

type MetricFn = fn(&[f64], &[f64]) -> ar_rul::Result<f64>;

unsafe fn raw_metric(f: MetricFn, pred: *const f64, truth: *const f64, len: usize, out: *mut f64) -> ArRulStatus {
    guard(|| {
        let p = slice_arg(pred, len, "pred")?;
        let t = slice_arg(truth, len, "truth")?;
        out_arg(out, f(p, t)?)
    })
}

/// # Safety
/// `pred` and `truth` must each point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_rmse(pred: *const f64, truth: *const f64, len: usize, out: *mut f64) -> ArRulStatus {
    raw_metric(rmse, pred, truth, len, out)
}

/// # Safety
/// `pred` and `truth` must each point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_mae(pred: *const f64, truth: *const f64, len: usize, out: *mut f64) -> ArRulStatus {
    raw_metric(mae, pred, truth, len, out)
}

/// Asymmetric score with `E = truth - pred`, summed over all points.
///
/// # Safety
/// `pred` and `truth` must each point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_rul_score(pred: *const f64, truth: *const f64, len: usize, out: *mut f64) -> ArRulStatus {
    raw_metric(score, pred, truth, len, out)
}
