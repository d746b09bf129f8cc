//! C ABI for the playerank engine.
//!
//! Every function returns a [`PrStatus`]; on failure a description of the last
//! error on the calling thread is available from [`pr_last_error`]. Engines are
//! opaque handles released with [`pr_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use playerank::ingest::{load_corpus, EventStore, LoadOptions};
use playerank::pipeline::{build_snapshot, run_learning_phase, ModelBundle, OnlineSettings, PipelineConfig, Snapshot};
use playerank::rating::{rate_values, versatility, RatingConfig};
use playerank::retrieval::{search, ZoneQuery};
use playerank::roles::RoleAssignment;
use playerank::synth::{generate, SynthConfig};
use playerank::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotFound = 3,
    ParseError = 4,
    IoError = 5,
    ModelError = 6,
    Internal = 7,
}

impl From<&Error> for PrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Stage { source, .. } => PrStatus::from(source.as_ref()),
            Error::NotFound(_) => PrStatus::NotFound,
            Error::Parse { .. } | Error::Schema { .. } | Error::Json(_) | Error::UnsupportedEventType(_) => {
                PrStatus::ParseError
            }
            Error::Io { .. } => PrStatus::IoError,
            Error::ModelFile { .. } | Error::CatalogMismatch { .. } => PrStatus::ModelError,
            Error::Validation(_) | Error::InvalidParameter(_) | Error::Contract(_) | Error::Duplicate(_) => {
                PrStatus::InvalidArgument
            }
            _ => PrStatus::Internal,
        }
    }
}

/// One search result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrSearchHit {
    pub player_id: u64,
    pub z: f64,
    pub s: f64,
    pub r_bar: f64,
}

/// Opaque engine handle.
pub struct PrEngine {
    snapshot: Snapshot,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), (PrStatus, String)>) -> PrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PrStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PrStatus::Internal
        }
    }
}

fn fail(e: Error) -> (PrStatus, String) {
    (PrStatus::from(&e), format!("{}: {e}", e.code()))
}

fn null(what: &str) -> (PrStatus, String) {
    (PrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, (PrStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PrStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(Path::new(s))
}

/// Message describing the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn open_engine(store: EventStore, bundle: ModelBundle, cfg: &PipelineConfig) -> Result<PrEngine, Error> {
    let snapshot = build_snapshot(&store, &bundle, OnlineSettings::from_config(cfg, &bundle))?;
    Ok(PrEngine { snapshot })
}

/// Builds an engine from a synthetic corpus of `matches` matches.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_demo(matches: u32, seed: u64, out: *mut *mut PrEngine) -> PrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let corpus = generate(&SynthConfig { matches: matches as usize, seed, ..SynthConfig::default() }).map_err(fail)?;
        let store = load_corpus(&corpus.text, LoadOptions::default()).map_err(fail)?;
        let cfg = PipelineConfig { seed, min_matches: 5, ..PipelineConfig::default() };
        let bundle = run_learning_phase(&store, &cfg).map_err(fail)?.bundle;
        let engine = open_engine(store, bundle, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// Opens a store file and a model bundle. `config_path` may be null.
///
/// # Safety
/// Paths must be NUL-terminated strings or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_open(
    store_path: *const c_char,
    model_path: *const c_char,
    config_path: *const c_char,
    out: *mut *mut PrEngine,
) -> PrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let store = EventStore::load(path_arg(store_path, "store_path")?).map_err(fail)?;
        let bundle = ModelBundle::load(path_arg(model_path, "model_path")?).map_err(fail)?;
        let cfg = if config_path.is_null() {
            PipelineConfig::default()
        } else {
            PipelineConfig::load(path_arg(config_path, "config_path")?).map_err(fail)?
        };
        let engine = open_engine(store, bundle, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from `pr_engine_open`/`pr_engine_demo` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_free(engine: *mut PrEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Number of roles and the search grid of an engine.
///
/// # Safety
/// `engine` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_info(
    engine: *const PrEngine,
    roles: *mut u32,
    grid_rows: *mut u32,
    grid_cols: *mut u32,
) -> PrStatus {
    guard(|| {
        let e = engine.as_ref().ok_or_else(|| null("engine"))?;
        if roles.is_null() || grid_rows.is_null() || grid_cols.is_null() {
            return Err(null("output"));
        }
        *roles = e.snapshot.k as u32;
        *grid_rows = e.snapshot.settings.grid.rows as u32;
        *grid_cols = e.snapshot.settings.grid.cols as u32;
        Ok(())
    })
}

/// Current rating r̄ of a player and the number of matches behind it.
///
/// # Safety
/// `engine` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_player_rating(
    engine: *const PrEngine,
    player_id: u64,
    r_bar: *mut f64,
    matches: *mut u32,
) -> PrStatus {
    guard(|| {
        let e = engine.as_ref().ok_or_else(|| null("engine"))?;
        if r_bar.is_null() || matches.is_null() {
            return Err(null("output"));
        }
        let s = e.snapshot.series.get(&player_id).ok_or_else(|| fail(Error::NotFound(format!("player {player_id}"))))?;
        *r_bar = s.r_bar().unwrap_or(0.0);
        *matches = s.matches() as u32;
        Ok(())
    })
}

/// Searches the players most present in the given zones, best first. Writes
/// at most `capacity` hits and stores the count in `written`.
///
/// # Safety
/// `zones` must point to `n_zones` values; `hits` to `capacity` writable slots.
#[no_mangle]
pub unsafe extern "C" fn pr_engine_search(
    engine: *const PrEngine,
    zones: *const u32,
    n_zones: usize,
    hits: *mut PrSearchHit,
    capacity: usize,
    written: *mut usize,
) -> PrStatus {
    guard(|| {
        let e = engine.as_ref().ok_or_else(|| null("engine"))?;
        if zones.is_null() || written.is_null() || (hits.is_null() && capacity > 0) {
            return Err(null("argument"));
        }
        let zones: Vec<usize> = std::slice::from_raw_parts(zones, n_zones).iter().map(|&z| z as usize).collect();
        let snap = &e.snapshot;
        let query = ZoneQuery::from_zones(snap.settings.grid, &zones).map_err(fail)?;
        let res = search(&query, &snap.zones, &snap.eligible_ratings(), capacity).map_err(fail)?;
        for (i, h) in res.hits.iter().enumerate() {
            *hits.add(i) = PrSearchHit { player_id: h.player_id, z: h.z, s: h.s, r_bar: h.r_bar };
        }
        *written = res.hits.len();
        Ok(())
    })
}

/// Rating of one normalized performance vector under `weights`.
///
/// # Safety
/// `values` and `weights` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_rate_values(
    values: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut f64,
) -> PrStatus {
    guard(|| {
        if values.is_null() || weights.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let v = std::slice::from_raw_parts(values, n);
        let w = std::slice::from_raw_parts(weights, n);
        if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err((PrStatus::InvalidArgument, "values must lie in [0, 1]".into()));
        }
        let cfg = RatingConfig::from_weights(w, 0.0, 0.1, 0).map_err(fail)?;
        *out = rate_values(v, w, &cfg).map_err(fail)?;
        Ok(())
    })
}

/// Versatility of a player whose matches were each played in one role.
///
/// # Safety
/// `roles` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_versatility(roles: *const u32, n: usize, k: u32, out: *mut f64) -> PrStatus {
    guard(|| {
        if roles.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let history: Vec<RoleAssignment> = std::slice::from_raw_parts(roles, n)
            .iter()
            .map(|&r| RoleAssignment { primary: r as usize, hybrids: Default::default(), silhouettes: vec![], delta: 0.0 })
            .collect();
        *out = versatility(0, &history, k as usize).map_err(fail)?.v;
        Ok(())
    })
}
