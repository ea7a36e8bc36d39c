//! C ABI over the tweetscope classifiers, lexicon and text utilities.
//!
//! Conventions:
//! - every function returns a [`TsStatus`]; results come back through out
//!   pointers that are written only on success;
//! - objects are opaque handles created by `*_load`/`*_from_json` and
//!   released with the matching `*_free` (null is accepted and ignored);
//! - strings returned to the caller are NUL-terminated, owned by the caller
//!   and must be released with [`ts_string_free`];
//! - after a failure, [`ts_last_error`] describes it for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tweetscope::eval::ConfusionMatrix;
use tweetscope::ingest::AbusiveMasker;
use tweetscope::lexicon::{emotion_profile, load_lexicon, valence_score, SentimentLexicon};
use tweetscope::lr::{vectorize, LrModel};
use tweetscope::nb::NbModel;
use tweetscope::text::Document;
use tweetscope::{porter, Error};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    UndefinedMetric = 5,
    Internal = 6,
}

/// Accuracy, sensitivity and specificity of a binary confusion matrix.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TsMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Opaque sentiment lexicon.
pub struct TsLexicon(SentimentLexicon);

/// Opaque Naive Bayes model.
pub struct TsNbModel(NbModel);

/// Opaque logistic regression model.
pub struct TsLrModel(LrModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

struct Failure(TsStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Lexicon { .. } | Error::Json(_) | Error::Csv(_) | Error::MissingColumn { .. } => {
                TsStatus::ParseError
            }
            Error::UndefinedMetric(_) => TsStatus::UndefinedMetric,
            Error::Argument(_) | Error::Training(_) | Error::LossDomain(_) | Error::Config(_) => {
                TsStatus::InvalidArgument
            }
            _ => TsStatus::Internal,
        };
        Failure(status, err.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            TsStatus::Internal
        }
    }
}

unsafe fn input_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(TsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(TsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure(TsStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(ptr: *mut T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        Err(Failure(TsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn owned_string(text: String) -> Result<*mut c_char, Failure> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| Failure(TsStatus::Internal, "string contains NUL".into()))
}

fn stemmed_document(text: &str) -> Document {
    Document::from_text("ffi", text).stemmed()
}

/// Message for the last failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Tokenizes `text` and writes the tokens as a JSON array of strings.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tokenize(text: *const c_char, out_json: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let text = input_str(text, "text")?;
        check_out(out_json, "out_json")?;
        let tokens = tweetscope::text::tokenize(text);
        let json = serde_json::to_string(&tokens).map_err(|e| Failure::from(Error::from(e)))?;
        *out_json = owned_string(json)?;
        Ok(())
    })
}

/// Porter stem of a single lowercase word.
///
/// # Safety
/// `word` must be a NUL-terminated string; `out_stem` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_stem(word: *const c_char, out_stem: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let word = input_str(word, "word")?;
        check_out(out_stem, "out_stem")?;
        *out_stem = owned_string(porter::stem(word))?;
        Ok(())
    })
}

/// Replaces every abusive word in `text` with a fixed prefix plus four
/// seeded digits. `words` is a newline-separated list.
///
/// # Safety
/// `text` and `words` must be NUL-terminated strings; the out pointers must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_mask_abusive(
    text: *const c_char,
    words: *const c_char,
    seed: u64,
    out_text: *mut *mut c_char,
    out_replacements: *mut usize,
) -> TsStatus {
    guard(|| {
        let text = input_str(text, "text")?;
        let words = input_str(words, "words")?;
        check_out(out_text, "out_text")?;
        check_out(out_replacements, "out_replacements")?;
        let list: Vec<&str> = words.lines().map(str::trim).filter(|w| !w.is_empty()).collect();
        let masked = AbusiveMasker::new(&list)?.mask(text, seed);
        *out_text = owned_string(masked.text)?;
        *out_replacements = masked.replacements;
        Ok(())
    })
}

/// Metrics of the confusion matrix (tn, fp, fn, tp).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_metrics(tn: u64, fp: u64, fn_: u64, tp: u64, out: *mut TsMetrics) -> TsStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = tweetscope::eval::metrics(&ConfusionMatrix::new(tn, fp, fn_, tp))?;
        *out = TsMetrics {
            accuracy: m.accuracy,
            sensitivity: m.sensitivity,
            specificity: m.specificity,
        };
        Ok(())
    })
}

/// Parses a lexicon from TSV text (word, category, flag).
///
/// # Safety
/// `tsv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lexicon_load(tsv: *const c_char, out: *mut *mut TsLexicon) -> TsStatus {
    guard(|| {
        let tsv = input_str(tsv, "tsv")?;
        check_out(out, "out")?;
        let lexicon = load_lexicon(tsv.as_bytes())?;
        *out = Box::into_raw(Box::new(TsLexicon(lexicon)));
        Ok(())
    })
}

/// Mean valence of the lexicon words in `text` and how many matched.
///
/// # Safety
/// `lexicon` must come from [`ts_lexicon_load`]; `text` must be a
/// NUL-terminated string; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lexicon_score(
    lexicon: *const TsLexicon,
    text: *const c_char,
    out_valence: *mut f64,
    out_matched: *mut usize,
) -> TsStatus {
    guard(|| {
        let lexicon = handle(lexicon, "lexicon")?;
        let text = input_str(text, "text")?;
        check_out(out_valence, "out_valence")?;
        check_out(out_matched, "out_matched")?;
        let score = valence_score(&Document::from_text("ffi", text), &lexicon.0);
        *out_valence = score.value;
        *out_matched = score.matched;
        Ok(())
    })
}

/// Dominant emotion category of `text`; an empty string when no lexicon
/// word matches.
///
/// # Safety
/// `lexicon` must come from [`ts_lexicon_load`]; `text` must be a
/// NUL-terminated string; `out_emotion` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lexicon_dominant_emotion(
    lexicon: *const TsLexicon,
    text: *const c_char,
    out_emotion: *mut *mut c_char,
) -> TsStatus {
    guard(|| {
        let lexicon = handle(lexicon, "lexicon")?;
        let text = input_str(text, "text")?;
        check_out(out_emotion, "out_emotion")?;
        let profile = emotion_profile(&Document::from_text("ffi", text), &lexicon.0);
        let name = profile.dominant.map(|e| e.as_str().to_string()).unwrap_or_default();
        *out_emotion = owned_string(name)?;
        Ok(())
    })
}

/// # Safety
/// `lexicon` must be null or come from [`ts_lexicon_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_lexicon_free(lexicon: *mut TsLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Loads a Naive Bayes model saved as JSON by the `tweetscope` tool.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_nb_from_json(json: *const c_char, out: *mut *mut TsNbModel) -> TsStatus {
    guard(|| {
        let json = input_str(json, "json")?;
        check_out(out, "out")?;
        let model = NbModel::from_json(json)?;
        *out = Box::into_raw(Box::new(TsNbModel(model)));
        Ok(())
    })
}

/// Predicted class (0 negative, 1 positive) of raw tweet text. The text is
/// tokenized and stemmed the same way as during training.
///
/// # Safety
/// `model` must come from [`ts_nb_from_json`]; `text` must be a
/// NUL-terminated string; `out_label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_nb_predict(model: *const TsNbModel, text: *const c_char, out_label: *mut u8) -> TsStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let text = input_str(text, "text")?;
        check_out(out_label, "out_label")?;
        *out_label = model.0.predict(&stemmed_document(text));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from [`ts_nb_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_nb_free(model: *mut TsNbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Loads a logistic regression model saved as JSON by the `tweetscope`
/// tool. The model must carry its vocabulary.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lr_from_json(json: *const c_char, out: *mut *mut TsLrModel) -> TsStatus {
    guard(|| {
        let json = input_str(json, "json")?;
        check_out(out, "out")?;
        let model = LrModel::from_json(json)?;
        if model.vocabulary.is_none() {
            return Err(Failure(TsStatus::InvalidArgument, "model has no vocabulary".into()));
        }
        *out = Box::into_raw(Box::new(TsLrModel(model)));
        Ok(())
    })
}

/// Positive-class probability and predicted class of raw tweet text.
///
/// # Safety
/// `model` must come from [`ts_lr_from_json`]; `text` must be a
/// NUL-terminated string; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_lr_predict(
    model: *const TsLrModel,
    text: *const c_char,
    out_probability: *mut f64,
    out_label: *mut u8,
) -> TsStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let text = input_str(text, "text")?;
        check_out(out_probability, "out_probability")?;
        check_out(out_label, "out_label")?;
        let vocab = model.0.vocabulary.as_ref().expect("checked at load");
        let (p, label) = model.0.predict(&vectorize(&stemmed_document(text), vocab))?;
        *out_probability = p;
        *out_label = label;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from [`ts_lr_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ts_lr_free(model: *mut TsLrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
