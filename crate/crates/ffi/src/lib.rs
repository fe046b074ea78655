//! C ABI over the posterfuse core: feature files, vocabulary encoding,
//! fusion and checkpoint inference.
//!
//! Every fallible call returns a [`PfStatus`]. On failure a message is kept
//! per thread and can be read with [`pf_last_error_message`]. Heap objects
//! are opaque and released with their `*_free` function; passing NULL to a
//! free function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use posterfuse::datamodel::TextAnnotation;
use posterfuse::encoder::{encode_text, fuse_dense, AppearanceVector, FusionConfig};
use posterfuse::net::{self, Mlp};
use posterfuse::storage;
use posterfuse::vocab::Vocabulary;
use posterfuse::Error;

/// Result codes shared by every function in this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Format = 5,
    DimensionMismatch = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Loaded vocabulary.
pub struct PfVocab {
    inner: Vocabulary,
}

/// Loaded classifier checkpoint.
pub struct PfModel {
    inner: Mlp,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PfStatus {
    match e {
        Error::Io { .. } => PfStatus::Io,
        Error::Sample { source, .. } => status_of(source),
        Error::Parse { .. }
        | Error::BadMagic { .. }
        | Error::LengthMismatch { .. }
        | Error::NonFinite { .. }
        | Error::DuplicateWord { .. }
        | Error::Json(_)
        | Error::Csv(_) => PfStatus::Format,
        Error::DimensionMismatch { .. } => PfStatus::DimensionMismatch,
        _ => PfStatus::InvalidArgument,
    }
}

struct Fail(PfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside posterfuse");
            PfStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(PfStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    str_arg(p, "path").map(PathBuf::from)
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn too_small(needed: usize, capacity: usize) -> Result<(), Fail> {
    if capacity < needed {
        Err(Fail(
            PfStatus::BufferTooSmall,
            format!("output buffer holds {capacity} values, {needed} needed"),
        ))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Logistic function of a logit.
#[no_mangle]
pub extern "C" fn pf_sigmoid(z: f64) -> f64 {
    net::sigmoid(z)
}

/// Writes an appearance feature file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `values` must point to `dim`
/// floats.
#[no_mangle]
pub unsafe extern "C" fn pf_feature_write(path: *const c_char, values: *const f32, dim: usize) -> PfStatus {
    guard(|| {
        let path = path_arg(path)?;
        let values = slice_arg(values, dim, "values")?;
        storage::write_feature(path, &AppearanceVector::new(values.to_vec()))?;
        Ok(())
    })
}

/// Reads an appearance feature file into `out`. `out_dim` receives the
/// stored dimension, also when `capacity` is too small.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` must have room for
/// `capacity` floats and `out_dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_feature_read(
    path: *const c_char,
    out: *mut f32,
    capacity: usize,
    out_dim: *mut usize,
) -> PfStatus {
    guard(|| {
        let path = path_arg(path)?;
        non_null(out_dim, "out_dim")?;
        let v = storage::read_feature(path)?;
        *out_dim = v.dim();
        too_small(v.dim(), capacity)?;
        non_null(out, "out")?;
        ptr::copy_nonoverlapping(v.values.as_ptr(), out, v.dim());
        Ok(())
    })
}

/// Loads a vocabulary file. On success `*out` owns a handle to release
/// with [`pf_vocab_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_vocab_load(path: *const c_char, out: *mut *mut PfVocab) -> PfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let inner = Vocabulary::load(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(PfVocab { inner }));
        Ok(())
    })
}

/// Number of words in the vocabulary, 0 for NULL.
///
/// # Safety
/// `vocab` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_vocab_len(vocab: *const PfVocab) -> usize {
    vocab.as_ref().map_or(0, |v| v.inner.len())
}

/// Normalizes `tokens` and writes per-word counts into `out_counts`, which
/// must hold `pf_vocab_len(vocab)` entries.
///
/// # Safety
/// `vocab` must be a live handle, `tokens` must point to `n_tokens`
/// NUL-terminated strings and `out_counts` to `capacity` integers.
#[no_mangle]
pub unsafe extern "C" fn pf_vocab_encode(
    vocab: *const PfVocab,
    tokens: *const *const c_char,
    n_tokens: usize,
    out_counts: *mut u32,
    capacity: usize,
) -> PfStatus {
    guard(|| {
        non_null(vocab, "vocab")?;
        let vocab = &(*vocab).inner;
        let raw = slice_arg(tokens, n_tokens, "tokens")?;
        let tokens = raw
            .iter()
            .map(|&t| str_arg(t, "token").map(str::to_owned))
            .collect::<Result<Vec<_>, _>>()?;
        too_small(vocab.len(), capacity)?;
        non_null(out_counts, "out_counts")?;
        let counts = encode_text(&TextAnnotation::new("", tokens), vocab).to_dense();
        ptr::copy_nonoverlapping(counts.as_ptr(), out_counts, counts.len());
        Ok(())
    })
}

/// Releases a vocabulary handle.
///
/// # Safety
/// `vocab` must be NULL or a handle from [`pf_vocab_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_vocab_free(vocab: *mut PfVocab) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// Writes the fused vector (appearance followed by `k` times the counts)
/// into `out`, which must hold `appearance_dim + n` doubles.
///
/// # Safety
/// `appearance` must point to `appearance_dim` floats, `counts` to `n`
/// integers and `out` to `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_fuse(
    appearance: *const f32,
    appearance_dim: usize,
    counts: *const u32,
    n: usize,
    k: f64,
    out: *mut f64,
    capacity: usize,
) -> PfStatus {
    guard(|| {
        let a = slice_arg(appearance, appearance_dim, "appearance")?;
        let t = slice_arg(counts, n, "counts")?;
        let cfg = FusionConfig::new(k, appearance_dim, n)?;
        too_small(cfg.fused_dim(), capacity)?;
        non_null(out, "out")?;
        let fused = fuse_dense(&AppearanceVector::new(a.to_vec()), t, &cfg)?;
        ptr::copy_nonoverlapping(fused.values.as_ptr(), out, fused.dim());
        Ok(())
    })
}

/// Loads a classifier checkpoint. On success `*out` owns a handle to
/// release with [`pf_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_model_load(path: *const c_char, out: *mut *mut PfModel) -> PfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let inner = net::load_checkpoint(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(PfModel { inner }));
        Ok(())
    })
}

/// Input dimension the model expects, 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_model_input_dim(model: *const PfModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.input_dim())
}

/// Number of dense layers, 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_model_depth(model: *const PfModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.depth())
}

/// Runs the model on one input. Writes the logit, the positive-class
/// probability and the 0/1 decision; any output pointer may be NULL.
///
/// # Safety
/// `model` must be a live handle and `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_model_forward(
    model: *const PfModel,
    x: *const f64,
    dim: usize,
    out_logit: *mut f64,
    out_probability: *mut f64,
    out_label: *mut u8,
) -> PfStatus {
    guard(|| {
        non_null(model, "model")?;
        let x = slice_arg(x, dim, "x")?;
        let z = (*model).inner.forward(x)?;
        if let Some(o) = out_logit.as_mut() {
            *o = z;
        }
        if let Some(o) = out_probability.as_mut() {
            *o = net::sigmoid(z);
        }
        if let Some(o) = out_label.as_mut() {
            *o = net::decide(z);
        }
        Ok(())
    })
}

/// Releases a model handle.
///
/// # Safety
/// `model` must be NULL or a handle from [`pf_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_model_free(model: *mut PfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
