//! C ABI over the `ugto` toolkit.
//!
//! Every fallible call returns a [`UgtoStatus`]. On failure the message is
//! kept per thread and read with [`ugto_last_error_message`]. Strings and
//! span arrays handed out by this library must be released with the
//! matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ugto::corpus::{load_conll, BioVariant, LoadOptions, Sentence, Split, Token};
use ugto::eval::{score, Mode};
use ugto::scheme::extract_entities;
use ugto::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UgtoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Usage = 5,
    Config = 6,
    UnsupportedVersion = 7,
    Numerical = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UgtoMode {
    Extraction = 0,
    Recognition = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UgtoEncoding {
    Iob1 = 0,
    Bio = 1,
}

/// Opaque trained model.
pub struct UgtoModel {
    inner: ugto::pipeline::UgtoModel,
}

/// Half-open token range `[start, end)` with its entity type.
#[repr(C)]
#[derive(Debug)]
pub struct UgtoSpan {
    pub start: usize,
    pub end: usize,
    pub etype: *mut c_char,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UgtoScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> UgtoStatus {
    match e {
        Error::Parse { .. } => UgtoStatus::Parse,
        Error::Io { .. } => UgtoStatus::Io,
        Error::Usage(_) | Error::UndefinedRate(_) => UgtoStatus::Usage,
        Error::Config(_) => UgtoStatus::Config,
        Error::Numerical(_) => UgtoStatus::Numerical,
        Error::UnsupportedVersion(_) => UgtoStatus::UnsupportedVersion,
        Error::Internal(_) => UgtoStatus::Internal,
    }
}

struct Failure(UgtoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(UgtoStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UgtoStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UgtoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside ugto");
            UgtoStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UgtoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn owned_c_string(s: &str) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(UgtoStatus::Internal, "string holds a NUL byte".into()))
}

unsafe fn sentence_arg(
    surfaces: *const *const c_char,
    pos: *const *const c_char,
    len: usize,
) -> Result<Sentence, Failure> {
    if len > 0 && (surfaces.is_null() || pos.is_null()) {
        return Err(null("token array"));
    }
    let mut tokens = Vec::with_capacity(len);
    for i in 0..len {
        let w = str_arg(*surfaces.add(i), "surface")?;
        let p = str_arg(*pos.add(i), "POS tag")?;
        if w.is_empty() || w.chars().any(char::is_whitespace) {
            return Err(Failure(
                UgtoStatus::Usage,
                format!("token {i} is empty or holds whitespace"),
            ));
        }
        tokens.push(Token::new(w, p, i));
    }
    Ok(Sentence {
        tokens,
        entities: Vec::new(),
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ugto_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ugto_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a model file. On success `*out` owns a handle for
/// [`ugto_model_free`].
#[no_mangle]
pub unsafe extern "C" fn ugto_model_load(
    path: *const c_char,
    out: *mut *mut UgtoModel,
) -> UgtoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = ugto::pipeline::load_model(path)?;
        *out = Box::into_raw(Box::new(UgtoModel { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ugto_model_free(model: *mut UgtoModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of labels the model can emit.
#[no_mangle]
pub unsafe extern "C" fn ugto_model_num_labels(model: *const UgtoModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.crf.space.num_labels())
}

/// Tags one sentence given parallel arrays of surface forms and POS tags.
/// `*out` receives one labeling tag per token, separated by `'\n'`;
/// release it with [`ugto_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ugto_tag_sentence(
    model: *const UgtoModel,
    surfaces: *const *const c_char,
    pos: *const *const c_char,
    len: usize,
    out: *mut *mut c_char,
) -> UgtoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let s = sentence_arg(surfaces, pos, len)?;
        let tags: Vec<String> = model
            .inner
            .tag_sentence(&s)
            .iter()
            .map(ToString::to_string)
            .collect();
        *out = owned_c_string(&tags.join("\n"))?;
        Ok(())
    })
}

/// Tags one sentence and returns its entities. `*out_spans` is an array
/// of `*out_len` spans to release with [`ugto_spans_free`].
#[no_mangle]
pub unsafe extern "C" fn ugto_extract_entities(
    model: *const UgtoModel,
    surfaces: *const *const c_char,
    pos: *const *const c_char,
    len: usize,
    out_spans: *mut *mut UgtoSpan,
    out_len: *mut usize,
) -> UgtoStatus {
    guard(|| {
        if out_spans.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        *out_spans = ptr::null_mut();
        *out_len = 0;
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let s = sentence_arg(surfaces, pos, len)?;
        let spans = extract_entities(&model.inner.tag_sentence(&s));
        let mut raw = Vec::with_capacity(spans.len());
        for e in &spans {
            match owned_c_string(&e.etype) {
                Ok(etype) => raw.push(UgtoSpan {
                    start: e.start,
                    end: e.end,
                    etype,
                }),
                Err(f) => {
                    free_spans(raw);
                    return Err(f);
                }
            }
        }
        let n = raw.len();
        *out_len = n;
        if n > 0 {
            *out_spans = Box::into_raw(raw.into_boxed_slice()).cast();
        }
        Ok(())
    })
}

fn free_spans(spans: Vec<UgtoSpan>) {
    for s in spans {
        if !s.etype.is_null() {
            // SAFETY: produced by CString::into_raw
            drop(unsafe { CString::from_raw(s.etype) });
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn ugto_spans_free(spans: *mut UgtoSpan, len: usize) {
    if spans.is_null() {
        return;
    }
    let boxed = Box::from_raw(ptr::slice_from_raw_parts_mut(spans, len));
    free_spans(boxed.into_vec());
}

#[no_mangle]
pub unsafe extern "C" fn ugto_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scores a predicted CoNLL file against a gold one.
#[no_mangle]
pub unsafe extern "C" fn ugto_eval_files(
    gold_path: *const c_char,
    gold_encoding: UgtoEncoding,
    pred_path: *const c_char,
    pred_encoding: UgtoEncoding,
    mode: UgtoMode,
    out: *mut UgtoScore,
) -> UgtoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let load = |p: &str, enc: UgtoEncoding| {
            let opts = LoadOptions {
                bio_variant: match enc {
                    UgtoEncoding::Iob1 => BioVariant::Iob1,
                    UgtoEncoding::Bio => BioVariant::Bio,
                },
                has_lemma_column: false,
                split: Split::Test,
            };
            load_conll(Path::new(p), opts)
        };
        let gold = load(str_arg(gold_path, "gold path")?, gold_encoding)?;
        let pred = load(str_arg(pred_path, "prediction path")?, pred_encoding)?;
        let g: Vec<_> = gold.sentences.into_iter().map(|s| s.entities).collect();
        let p: Vec<_> = pred.sentences.into_iter().map(|s| s.entities).collect();
        let mode = match mode {
            UgtoMode::Extraction => Mode::Extraction,
            UgtoMode::Recognition => Mode::Recognition,
        };
        let r = score(&g, &p, mode)?;
        *out = UgtoScore {
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            gold: r.counts.gold,
            predicted: r.counts.pred,
            correct: r.counts.correct,
        };
        Ok(())
    })
}
