//! C interface to the apilink resolver.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `_free` function. Strings returned through out-parameters are
//! heap allocated and must be released with [`apilink_string_free`]. Every
//! function that can fail returns an [`ApilinkStatus`] and records a message
//! retrievable with [`apilink_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use apilink::api_db::ApiDatabase;
use apilink::classifier::NBModel;
use apilink::detect::name_similarity;
use apilink::pipeline::{render_html, render_records, to_records, PipelineConfig, Resolver};
use apilink::text::{parse_raw_thread, preprocess_thread};
use apilink::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApilinkStatus {
    Ok = 0,
    NullArg = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApilinkFormat {
    Records = 0,
    Html = 1,
}

/// A loaded API database.
pub struct ApilinkDb {
    db: ApiDatabase,
}

/// A loaded classifier model.
pub struct ApilinkModel {
    model: NBModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ApilinkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => ApilinkStatus::Io,
            Error::Parse { .. } | Error::Thread(_) | Error::Model(_) | Error::Config(_) => {
                ApilinkStatus::Parse
            }
            Error::Invariant(_) => ApilinkStatus::Internal,
            _ => ApilinkStatus::Validation,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ApilinkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApilinkStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            ApilinkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(ApilinkStatus::NullArg, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ApilinkStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(Failure(ApilinkStatus::NullArg, format!("`{name}` is null")))
    } else {
        Ok(p)
    }
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(ApilinkStatus::Internal, "output contains a nul byte".into()))
}

/// Loads a JSON-lines API database from `path`.
///
/// # Safety
/// `path` must be null or a valid C string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn apilink_db_load(
    path: *const c_char,
    out: *mut *mut ApilinkDb,
) -> ApilinkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let db = ApiDatabase::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(ApilinkDb { db }));
        Ok(())
    })
}

/// Parses a JSON-lines API database held in memory.
///
/// # Safety
/// `text` must be null or a valid C string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn apilink_db_from_jsonl(
    text: *const c_char,
    out: *mut *mut ApilinkDb,
) -> ApilinkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let db = ApiDatabase::from_jsonl(text, "<memory>")?;
        *out = Box::into_raw(Box::new(ApilinkDb { db }));
        Ok(())
    })
}

/// Number of entries in the database, 0 for null.
///
/// # Safety
/// `db` must be null or a handle from [`apilink_db_load`].
#[no_mangle]
pub unsafe extern "C" fn apilink_db_len(db: *const ApilinkDb) -> usize {
    db.as_ref().map_or(0, |d| d.db.len())
}

/// # Safety
/// `db` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apilink_db_free(db: *mut ApilinkDb) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Loads a classifier model saved by `apilink train`.
///
/// # Safety
/// `path` must be null or a valid C string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn apilink_model_load(
    path: *const c_char,
    out: *mut *mut ApilinkModel,
) -> ApilinkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let model = NBModel::load(path)?;
        *out = Box::into_raw(Box::new(ApilinkModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apilink_model_free(model: *mut ApilinkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Resolves one thread document given as JSON and writes either decision
/// records (JSON lines) or an HTML page to `out`.
///
/// # Safety
/// `db` and `model` must be live handles; `thread_json` a valid C string;
/// `out` writable. The string stored in `out` belongs to the caller.
#[no_mangle]
pub unsafe extern "C" fn apilink_resolve_thread_json(
    db: *const ApilinkDb,
    model: *const ApilinkModel,
    thread_json: *const c_char,
    format: ApilinkFormat,
    out: *mut *mut c_char,
) -> ApilinkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let db = &db
            .as_ref()
            .ok_or_else(|| Failure(ApilinkStatus::NullArg, "`db` is null".into()))?
            .db;
        let model = &model
            .as_ref()
            .ok_or_else(|| Failure(ApilinkStatus::NullArg, "`model` is null".into()))?
            .model;
        let json = str_arg(thread_json, "thread_json")?;
        let doc = preprocess_thread(&parse_raw_thread(json)?)?;
        let resolver = Resolver::new(db, model, PipelineConfig::default())?;
        let records = to_records(&resolver.resolve_thread(&doc)?, db);
        let text = match format {
            ApilinkFormat::Records => render_records(&records),
            ApilinkFormat::Html => render_html(&records, &doc)?,
        };
        *out = to_c_string(text)?;
        Ok(())
    })
}

/// Name similarity between a mention and an API name.
///
/// # Safety
/// `mention` and `name` must be valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apilink_name_similarity(
    mention: *const c_char,
    name: *const c_char,
    out: *mut f64,
) -> ApilinkStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let (_, sim) = name_similarity(str_arg(mention, "mention")?, str_arg(name, "name")?);
        *out = sim;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apilink_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn apilink_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn apilink_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
