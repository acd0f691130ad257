//! C bindings for the wikiconv library.
//!
//! Every function returns a [`WcStatus`]. On failure the message for the
//! calling thread is available from [`wc_last_error_message`]. Strings
//! handed out by the library must be released with [`wc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chrono::{DateTime, Utc};
use wikiconv::analytics::equal_error_threshold;
use wikiconv::clean::clean_markup;
use wikiconv::corpus::encode_action;
use wikiconv::ingest::RevisionRecord;
use wikiconv::reconstruct::PageState;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ReconstructError = 4,
    Panic = 5,
}

/// Reconstruction state for a single page.
pub struct WcReconstructor {
    state: PageState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(WcStatus, String);

impl Failure {
    fn new(status: WcStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            WcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            WcStatus::NullArgument,
            format!("{name} is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(WcStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s)
        .map_err(|_| Failure::new(WcStatus::InvalidArgument, "output contains a NUL byte"))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Creates a reconstructor for one page. Returns null on bad arguments.
///
/// # Safety
/// Both arguments must be null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn wc_reconstructor_new(
    page_id: *const c_char,
    page_title: *const c_char,
) -> *mut WcReconstructor {
    let mut handle = ptr::null_mut();
    guard(|| {
        let id = str_arg(page_id, "page_id")?;
        let title = str_arg(page_title, "page_title")?;
        handle = Box::into_raw(Box::new(WcReconstructor {
            state: PageState::new(id, title),
        }));
        Ok(())
    });
    handle
}

/// Feeds the next revision of the page. On success `*out_jsonl` receives the
/// resulting actions, one JSON record per line (possibly empty).
/// `user_id` below zero means anonymous.
///
/// # Safety
/// `handle` must come from [`wc_reconstructor_new`] and not be freed; string
/// arguments must be NUL-terminated; `out_jsonl` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_reconstructor_push_revision(
    handle: *mut WcReconstructor,
    revision_id: *const c_char,
    timestamp: *const c_char,
    user_text: *const c_char,
    user_id: i64,
    wikitext: *const c_char,
    out_jsonl: *mut *mut c_char,
) -> WcStatus {
    guard(|| {
        if handle.is_null() || out_jsonl.is_null() {
            return Err(Failure::new(
                WcStatus::NullArgument,
                "handle or output is null",
            ));
        }
        *out_jsonl = ptr::null_mut();
        let h = &mut *handle;
        let ts = str_arg(timestamp, "timestamp")?;
        let timestamp: DateTime<Utc> = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| Failure::new(WcStatus::InvalidArgument, format!("timestamp {ts:?}: {e}")))?
            .with_timezone(&Utc);
        let rev = RevisionRecord {
            page_id: h.state.page_id().to_owned(),
            page_title: h.state.page_title().to_owned(),
            revision_id: str_arg(revision_id, "revision_id")?.to_owned(),
            timestamp,
            user_text: str_arg(user_text, "user_text")?.to_owned(),
            user_id: u64::try_from(user_id).ok(),
            wikitext: str_arg(wikitext, "wikitext")?.to_owned(),
        };
        let actions = h
            .state
            .process_revision(&rev)
            .map_err(|e| Failure::new(WcStatus::ReconstructError, e.to_string()))?;
        let mut buf = Vec::new();
        for a in &actions {
            encode_action(a, &mut buf);
        }
        out_string(String::from_utf8(buf).expect("JSON is UTF-8"), out_jsonl)
    })
}

/// # Safety
/// `handle` must be null or come from [`wc_reconstructor_new`], and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wc_reconstructor_free(handle: *mut WcReconstructor) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Strips markup. `*out_fallback` is set to 1 when the input could not be
/// cleaned and was returned verbatim.
///
/// # Safety
/// `text` must be NUL-terminated; `out` and `out_fallback` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wc_clean_markup(
    text: *const c_char,
    out: *mut *mut c_char,
    out_fallback: *mut i32,
) -> WcStatus {
    guard(|| {
        if out.is_null() || out_fallback.is_null() {
            return Err(Failure::new(WcStatus::NullArgument, "output is null"));
        }
        let r = clean_markup(str_arg(text, "text")?);
        *out_fallback = r.fallback as i32;
        out_string(r.text, out)
    })
}

/// Equal error rate threshold over `len` scores with 0/1 labels.
///
/// # Safety
/// `scores` and `labels` must point to `len` readable elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wc_equal_error_threshold(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out: *mut f64,
) -> WcStatus {
    guard(|| {
        if scores.is_null() || labels.is_null() || out.is_null() {
            return Err(Failure::new(WcStatus::NullArgument, "argument is null"));
        }
        let scores = std::slice::from_raw_parts(scores, len);
        let labels: Vec<bool> = std::slice::from_raw_parts(labels, len)
            .iter()
            .map(|&l| l != 0)
            .collect();
        *out = equal_error_threshold(scores, &labels)
            .map_err(|e| Failure::new(WcStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn wc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn wc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn wc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
