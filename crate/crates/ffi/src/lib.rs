//! C ABI for tweetlink.
//!
//! Every function returns a [`TlStatus`]; results come back through out
//! pointers. On failure a message for the calling thread is available from
//! [`tl_last_error_message`]. Handles are opaque and must be released with
//! their `_free` function. All strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tweetlink::corpus::{self, AuthorCorpus};
use tweetlink::model::NbModel;
use tweetlink::tokenize::{TokenCounts, TokenScheme};
use tweetlink::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    SchemeMismatch = 6,
    UnknownAuthor = 7,
    ModelFormat = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlScheme {
    Unigram = 0,
    Bigram = 1,
    Hashtag = 2,
}

impl From<TlScheme> for TokenScheme {
    fn from(s: TlScheme) -> Self {
        match s {
            TlScheme::Unigram => TokenScheme::TextUnigram,
            TlScheme::Bigram => TokenScheme::TextBigram,
            TlScheme::Hashtag => TokenScheme::HashtagUnigram,
        }
    }
}

impl From<TokenScheme> for TlScheme {
    fn from(s: TokenScheme) -> Self {
        match s {
            TokenScheme::TextUnigram => TlScheme::Unigram,
            TokenScheme::TextBigram => TlScheme::Bigram,
            TokenScheme::HashtagUnigram => TlScheme::Hashtag,
        }
    }
}

/// A loaded tweet corpus grouped by author.
pub struct TlCorpus {
    corpus: AuthorCorpus,
}

/// A trained model. Author ids are cached as C strings so callers can borrow
/// them for the handle's lifetime.
pub struct TlModel {
    model: NbModel,
    ids: Vec<CString>,
}

impl TlModel {
    fn new(model: NbModel) -> Self {
        let ids = model
            .profiles()
            .iter()
            .map(|p| CString::new(p.author.as_bytes()).unwrap_or_default())
            .collect();
        TlModel { model, ids }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(TlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => TlStatus::Io,
            Error::MalformedLine { .. } | Error::MalformedBlock { .. } => TlStatus::Parse,
            Error::SchemeMismatch { .. } => TlStatus::SchemeMismatch,
            Error::UnknownAuthor(_) => TlStatus::UnknownAuthor,
            Error::ModelFormat(_) => TlStatus::ModelFormat,
            _ => TlStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TlStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic for [`tl_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
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
            TlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

unsafe fn load_corpus(
    path: *const c_char,
    out: *mut *mut TlCorpus,
    load: fn(PathBuf) -> tweetlink::Result<AuthorCorpus>,
) -> TlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let corpus = load(PathBuf::from(path))?;
        out.write(Box::into_raw(Box::new(TlCorpus { corpus })));
        Ok(())
    })
}

/// Loads a corpus of JSON lines with `user`, `text` and optional `ts` fields.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_corpus_load_jsonl(path: *const c_char, out: *mut *mut TlCorpus) -> TlStatus {
    load_corpus(path, out, corpus::load_jsonl)
}

/// Loads a corpus of T/U/W text blocks.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_corpus_load_snap(path: *const c_char, out: *mut *mut TlCorpus) -> TlStatus {
    load_corpus(path, out, corpus::load_snap_blocks)
}

/// # Safety
/// `corpus` must come from a `tl_corpus_load_*` call and not be used again.
#[no_mangle]
pub unsafe extern "C" fn tl_corpus_free(corpus: *mut TlCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_corpus_num_authors(corpus: *const TlCorpus, out: *mut usize) -> TlStatus {
    guard(|| write_out(out, ref_arg(corpus, "corpus")?.corpus.num_authors(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_corpus_num_tweets(corpus: *const TlCorpus, out: *mut usize) -> TlStatus {
    guard(|| write_out(out, ref_arg(corpus, "corpus")?.corpus.num_tweets(), "out"))
}

/// Trains one profile per corpus author.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_build(
    corpus: *const TlCorpus,
    scheme: TlScheme,
    out: *mut *mut TlModel,
) -> TlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let corpus = &ref_arg(corpus, "corpus")?.corpus;
        let model = NbModel::build(corpus.iter(), scheme.into())?;
        out.write(Box::into_raw(Box::new(TlModel::new(model))));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_model_load(path: *const c_char, out: *mut *mut TlModel) -> TlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = NbModel::load(str_arg(path, "path")?)?;
        out.write(Box::into_raw(Box::new(TlModel::new(model))));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_save(model: *const TlModel, path: *const c_char) -> TlStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        model.model.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from `tl_model_build` or `tl_model_load` and not be used
/// again.
#[no_mangle]
pub unsafe extern "C" fn tl_model_free(model: *mut TlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_scheme(model: *const TlModel, out: *mut TlScheme) -> TlStatus {
    guard(|| write_out(out, ref_arg(model, "model")?.model.scheme().into(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_num_authors(model: *const TlModel, out: *mut usize) -> TlStatus {
    guard(|| write_out(out, ref_arg(model, "model")?.model.num_authors(), "out"))
}

/// Author id at `index` (authors are sorted by id). The string is owned by
/// the model and lives as long as it does.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_author_id(
    model: *const TlModel,
    index: usize,
    out: *mut *const c_char,
) -> TlStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let id = model.ids.get(index).ok_or_else(|| {
            Failure(
                TlStatus::InvalidArgument,
                format!("author index {index} out of range for {} authors", model.ids.len()),
            )
        })?;
        write_out(out, id.as_ptr(), "out")
    })
}

/// Smoothed `ln P(token | author)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_model_token_log_prob(
    model: *const TlModel,
    author: *const c_char,
    token: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.model;
        let lp = model.token_log_prob(str_arg(author, "author")?, token)?;
        write_out(out, lp, "out")
    })
}

/// Ranks every author against the anonymous `text` and writes the best
/// `capacity` of them: model indices to `out_indices`, scores to
/// `out_scores` (may be NULL). `out_len` receives the number written.
/// `out_empty` (may be NULL) is set to 1 when the text has no tokens under the
/// model's scheme, in which case the order is by author id alone.
///
/// # Safety
/// `out_indices` (and `out_scores` when non-NULL) must hold `capacity`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn tl_model_rank_text(
    model: *const TlModel,
    text: *const c_char,
    capacity: usize,
    out_indices: *mut usize,
    out_scores: *mut f64,
    out_len: *mut usize,
    out_empty: *mut u8,
) -> TlStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.model;
        let text = str_arg(text, "text")?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        if out_indices.is_null() && capacity > 0 {
            return Err(null("out_indices"));
        }
        let mut tokens = TokenCounts::zeros(model.scheme());
        tokens.add_text(text);
        let ranking = model.rank(&tokens)?;
        let n = capacity.min(ranking.len());
        for (i, (author, score)) in ranking.top(n).iter().enumerate() {
            out_indices.add(i).write(model.position(author).expect("ranked author"));
            if !out_scores.is_null() {
                out_scores.add(i).write(*score);
            }
        }
        out_len.write(n);
        if !out_empty.is_null() {
            out_empty.write(tokens.is_empty() as u8);
        }
        Ok(())
    })
}
