//! C ABI over `gnss_qsvm`.
//!
//! Every entry point returns a [`GqStatus`]; results are written through out
//! pointers. On failure, [`gq_last_error`] returns a message for the calling
//! thread. Trained models are opaque [`GqModel`] handles released with
//! [`gq_model_free`]; strings returned by the library are released with
//! [`gq_string_free`].
//!
//! Feature matrices are row-major `n × 2` arrays of
//! `(cn0_diff [dB-Hz], elevation [deg])`. Class codes are 0 = LOS,
//! 1 = NLOS, 2 = LOS_NLOS.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gnss_qsvm::dataio::{Dataset, Label, SignalSample};
use gnss_qsvm::experiment::{train_model, ModelDocument, ModelKind, Scaling};
use gnss_qsvm::featuremap::FeatureMapConfig;
use gnss_qsvm::qkernel::{fidelity_exact, fidelity_sampled, rbf, KernelConfig, KernelMode};
use gnss_qsvm::svm::{predict, SvmConfig};
use gnss_qsvm::Error;

const NUM_FEATURES: usize = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    InvalidGate = 4,
    DegenerateData = 5,
    InvalidLabels = 6,
    InvalidDataset = 7,
    Parse = 8,
    Unsupported = 9,
    Io = 10,
    Serialization = 11,
    Panic = 99,
}

impl From<&Error> for GqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGate(_) => GqStatus::InvalidGate,
            Error::Dimension(_) => GqStatus::Dimension,
            Error::InvalidArgument(_) => GqStatus::InvalidArgument,
            Error::DegenerateData(_) => GqStatus::DegenerateData,
            Error::InvalidLabels(_) => GqStatus::InvalidLabels,
            Error::InvalidDataset(_) => GqStatus::InvalidDataset,
            Error::Parse { .. } => GqStatus::Parse,
            Error::Unsupported(_) => GqStatus::Unsupported,
            Error::Io { .. } => GqStatus::Io,
            Error::Json(_) | Error::Csv(_) => GqStatus::Serialization,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqModelKind {
    Qsvm = 0,
    Svm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GqKernelMode {
    Exact = 0,
    Sampled = 1,
}

/// Training options. Obtain defaults from [`gq_train_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GqTrainConfig {
    pub model: GqModelKind,
    /// Fidelity evaluation for `GQ_MODEL_KIND_QSVM`; ignored for the RBF model.
    pub kernel: GqKernelMode,
    pub shots: u64,
    pub seed: u64,
    pub repetitions: usize,
    /// Nonzero disables min-max scaling.
    pub raw: i32,
    pub range_lo: f64,
    pub range_hi: f64,
    pub c: f64,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
}

/// Opaque trained model.
pub struct GqModel {
    doc: ModelDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> GqStatus
where
    F: FnOnce() -> Result<(), (GqStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GqStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            GqStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (GqStatus, String)>;
}

impl<T> IntoFfi<T> for gnss_qsvm::Result<T> {
    fn ffi(self) -> Result<T, (GqStatus, String)> {
        self.map_err(|e| (GqStatus::from(&e), e.to_string()))
    }
}

fn null(what: &str) -> (GqStatus, String) {
    (GqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice_in<'a, T>(
    p: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (GqStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn rows_in(p: *const f64, n: usize) -> Result<Vec<Vec<f64>>, (GqStatus, String)> {
    let flat = slice_in(p, n * NUM_FEATURES, "features")?;
    Ok(flat.chunks(NUM_FEATURES).map(<[f64]>::to_vec).collect())
}

fn label_code(label: Label) -> u32 {
    label.index() as u32
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gq_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn gq_train_config_default() -> GqTrainConfig {
    let svm = SvmConfig::default();
    GqTrainConfig {
        model: GqModelKind::Qsvm,
        kernel: GqKernelMode::Exact,
        shots: 1000,
        seed: 0,
        repetitions: 2,
        raw: 0,
        range_lo: 0.0,
        range_hi: 1.0,
        c: svm.c,
        kkt_tolerance: svm.kkt_tolerance,
        max_passes: svm.max_passes,
    }
}

/// Exact ZZ fidelity kernel between two `n`-feature points.
#[no_mangle]
pub unsafe extern "C" fn gq_fidelity_exact(
    x: *const f64,
    y: *const f64,
    n: usize,
    repetitions: usize,
    out: *mut f64,
) -> GqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (x, y) = (slice_in(x, n, "x")?, slice_in(y, n, "y")?);
        let fm = FeatureMapConfig::new(n).with_repetitions(repetitions);
        *out = fidelity_exact(x, y, &fm).ffi()?;
        Ok(())
    })
}

/// Shot-sampled compute-uncompute estimate of the fidelity kernel.
#[no_mangle]
pub unsafe extern "C" fn gq_fidelity_sampled(
    x: *const f64,
    y: *const f64,
    n: usize,
    repetitions: usize,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> GqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (x, y) = (slice_in(x, n, "x")?, slice_in(y, n, "y")?);
        let fm = FeatureMapConfig::new(n).with_repetitions(repetitions);
        *out = fidelity_sampled(x, y, &fm, shots, seed).ffi()?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_rbf(
    x: *const f64,
    y: *const f64,
    n: usize,
    gamma: f64,
    out: *mut f64,
) -> GqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rbf(slice_in(x, n, "x")?, slice_in(y, n, "y")?, gamma).ffi()?;
        Ok(())
    })
}

/// Trains a model on `n` raw samples. On success `*out` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn gq_model_train(
    features: *const f64,
    labels: *const u32,
    n: usize,
    config: *const GqTrainConfig,
    out: *mut *mut GqModel,
) -> GqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if config.is_null() {
            return Err(null("config"));
        }
        let cfg = *config;
        let rows = rows_in(features, n)?;
        let codes = slice_in(labels, n, "labels")?;
        let samples = rows
            .iter()
            .zip(codes)
            .map(|(r, &code)| {
                let label = Label::from_index(code as usize).ok_or_else(|| {
                    (
                        GqStatus::InvalidLabels,
                        format!("unknown class code {code}"),
                    )
                })?;
                let s = SignalSample {
                    cn0_diff: r[0],
                    elevation: r[1],
                    label,
                };
                s.validate().ffi()?;
                Ok(s)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let train = Dataset::new("ffi", samples);

        let (kind, mode) = match cfg.model {
            GqModelKind::Svm => (ModelKind::Svm, KernelMode::Rbf),
            GqModelKind::Qsvm => (
                ModelKind::Qsvm,
                match cfg.kernel {
                    GqKernelMode::Exact => KernelMode::FidelityExact,
                    GqKernelMode::Sampled => KernelMode::FidelitySampled,
                },
            ),
        };
        let kernel = KernelConfig {
            mode,
            shots: cfg.shots,
            seed: cfg.seed,
            gamma: None,
            feature_map: FeatureMapConfig::new(NUM_FEATURES).with_repetitions(cfg.repetitions),
        };
        let svm = SvmConfig {
            c: cfg.c,
            kkt_tolerance: cfg.kkt_tolerance,
            max_passes: cfg.max_passes,
        };
        let scaling = if cfg.raw != 0 {
            Scaling::Raw
        } else {
            Scaling::MinMax {
                lo: cfg.range_lo,
                hi: cfg.range_hi,
            }
        };
        let doc = train_model(&train, kind, &kernel, &svm, scaling).ffi()?;
        *out = Box::into_raw(Box::new(GqModel { doc }));
        Ok(())
    })
}

/// Predicts class codes for `n` raw samples into `out_labels[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn gq_model_predict(
    model: *const GqModel,
    features: *const f64,
    n: usize,
    out_labels: *mut u32,
) -> GqStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if n > 0 && out_labels.is_null() {
            return Err(null("out_labels"));
        }
        let rows = rows_in(features, n)?;
        let scaled = model.doc.scale(&rows).ffi()?;
        let labels = predict(&model.doc.model, &scaled).ffi()?;
        for (i, l) in labels.into_iter().enumerate() {
            *out_labels.add(i) = label_code(l);
        }
        Ok(())
    })
}

/// Decision grid over the scaled feature square; writes `resolution²` class
/// codes row-major (y outer, x inner) into `out_cells`.
#[no_mangle]
pub unsafe extern "C" fn gq_model_boundary_grid(
    model: *const GqModel,
    resolution: usize,
    out_cells: *mut u32,
) -> GqStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_cells.is_null() {
            return Err(null("out_cells"));
        }
        let grid = model.doc.boundary(resolution).ffi()?;
        for (i, l) in grid.cells.iter().flatten().enumerate() {
            *out_cells.add(i) = label_code(*l);
        }
        Ok(())
    })
}

/// Number of classes the model distinguishes.
#[no_mangle]
pub unsafe extern "C" fn gq_model_num_classes(model: *const GqModel, out: *mut usize) -> GqStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = model.doc.model.classes.len();
        Ok(())
    })
}

/// Serializes the model to JSON. Release `*out` with [`gq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gq_model_to_json(
    model: *const GqModel,
    out: *mut *mut c_char,
) -> GqStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = model.doc.to_json().ffi()?;
        *out = CString::new(json)
            .map_err(|e| (GqStatus::Serialization, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_model_from_json(
    json: *const c_char,
    out: *mut *mut GqModel,
) -> GqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (GqStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let doc = ModelDocument::from_json(text).ffi()?;
        *out = Box::into_raw(Box::new(GqModel { doc }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gq_model_free(model: *mut GqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
