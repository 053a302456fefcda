//! C interface to the matchdecomp library.
//!
//! Objects cross the boundary as opaque handles created by `md_*_new` or
//! `md_*_load` and released with the matching `md_*_free`. Every fallible
//! call returns an [`MdStatus`]; on failure the message of the last error on
//! the calling thread is available from [`md_last_error`].
//!
//! Node and edge arrays use `size_t`. Matchings are reported as pairs
//! `(u, v)` with `u < v`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use matchdecomp::engine::{self, DecompositionResult, EngineConfig, Termination};
use matchdecomp::graph::{DemandMatrix, WeightedGraph};
use matchdecomp::instances;
use matchdecomp::matching::max_weight_matching;
use matchdecomp::qaoa::{ParamMode, ParamOrder};
use matchdecomp::samplers::Method;
use matchdecomp::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    InvalidDemand = 4,
    InvalidConfig = 5,
    QubitCap = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Internal = 99,
}

/// Which matchings feed each iteration besides the exact oracle.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdMethod {
    /// No sampling: plain fully-corrective Frank-Wolfe.
    Exact = 0,
    Random = 1,
    Anneal = 2,
    Qaoa = 3,
}

/// Why a run stopped.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdTermination {
    Converged = 0,
    IterationCap = 1,
    Stalled = 2,
}

/// A validated demand matrix.
pub struct MdDemand {
    inner: DemandMatrix,
}

/// Engine settings.
pub struct MdConfig {
    inner: EngineConfig,
}

/// A finished decomposition.
pub struct MdResult {
    inner: DecompositionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MdStatus {
    match e {
        Error::InvalidGraph(_) | Error::InvalidTopology(_) => MdStatus::InvalidGraph,
        Error::InvalidDemand(_) => MdStatus::InvalidDemand,
        Error::Config(_) => MdStatus::InvalidConfig,
        Error::QubitCap { .. } => MdStatus::QubitCap,
        Error::Io { .. } => MdStatus::Io,
        Error::Parse { .. } | Error::Schema { .. } => MdStatus::Parse,
        Error::InvalidMatching(_)
        | Error::LengthMismatch { .. }
        | Error::DimensionMismatch(_)
        | Error::EnumerationCap { .. } => MdStatus::InvalidArgument,
    }
}

fn fail(status: MdStatus, message: impl Into<String>) -> MdStatus {
    set_last_error(message);
    status
}

fn from_error(e: Error) -> MdStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`MdStatus::Internal`].
fn guard(f: impl FnOnce() -> MdStatus) -> MdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(MdStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(MdStatus::NullPointer, concat!("argument `", stringify!($p), "` is null"));
        })+
    };
}

/// # Safety
/// `len` elements must be readable at `p` unless `len` is zero.
unsafe fn slice<'a, T>(p: *const T, len: usize) -> &'a [T] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(p, len)
    }
}

/// Copies the message of the last failed call on this thread into `buf`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes excluding the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn md_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn md_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a demand matrix on `n` nodes from `m` weighted edges `(us[i], vs[i], ws[i])`.
///
/// # Safety
/// `us`, `vs` and `ws` must each hold `m` readable elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn md_demand_new(
    n: usize,
    us: *const usize,
    vs: *const usize,
    ws: *const f64,
    m: usize,
    out: *mut *mut MdDemand,
) -> MdStatus {
    non_null!(out);
    if m > 0 {
        non_null!(us, vs, ws);
    }
    guard(|| {
        let (us, vs, ws) = (slice(us, m), slice(vs, m), slice(ws, m));
        let edges = (0..m).map(|i| (us[i], vs[i], ws[i]));
        match WeightedGraph::new(n, edges).and_then(DemandMatrix::new) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(MdDemand { inner: d }));
                MdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Reads the demand matrix of an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_demand_load(path: *const c_char, out: *mut *mut MdDemand) -> MdStatus {
    non_null!(path, out);
    guard(|| {
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(MdStatus::InvalidArgument, "path is not valid UTF-8");
        };
        match instances::load_instance(std::path::Path::new(path)) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(MdDemand { inner: inst.demand }));
                MdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `demand` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn md_demand_free(demand: *mut MdDemand) {
    if !demand.is_null() {
        drop(Box::from_raw(demand));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `demand` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_demand_node_count(demand: *const MdDemand) -> usize {
    demand.as_ref().map_or(0, |d| d.inner.n())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `demand` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_demand_edge_count(demand: *const MdDemand) -> usize {
    demand.as_ref().map_or(0, |d| d.inner.graph().edge_count())
}

/// Maximum-weight matching of the demand graph. Writes up to `capacity`
/// edges, the number of edges to `count` and the total weight to `weight`.
/// Returns [`MdStatus::BufferTooSmall`] (with `count` set) if the buffers
/// are too short.
///
/// # Safety
/// `us` and `vs` must hold `capacity` writable elements (or be null when
/// `capacity` is 0); `count` and `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_max_weight_matching(
    demand: *const MdDemand,
    us: *mut usize,
    vs: *mut usize,
    capacity: usize,
    count: *mut usize,
    weight: *mut f64,
) -> MdStatus {
    non_null!(demand, count, weight);
    guard(|| {
        let sol = max_weight_matching((*demand).inner.graph());
        *weight = sol.weight;
        write_edges(sol.matching.edges(), us, vs, capacity, count)
    })
}

unsafe fn write_edges(
    edges: &[matchdecomp::graph::Edge],
    us: *mut usize,
    vs: *mut usize,
    capacity: usize,
    count: *mut usize,
) -> MdStatus {
    *count = edges.len();
    if edges.len() > capacity {
        return fail(
            MdStatus::BufferTooSmall,
            format!("{} edges do not fit in a buffer of {capacity}", edges.len()),
        );
    }
    if !edges.is_empty() {
        non_null!(us, vs);
    }
    for (i, e) in edges.iter().enumerate() {
        *us.add(i) = e.u;
        *vs.add(i) = e.v;
    }
    MdStatus::Ok
}

/// New engine settings. `d` is the number of sampled matchings per
/// iteration; it must be positive for the sampling methods and is ignored
/// for [`MdMethod::Exact`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_config_new(method: MdMethod, d: usize, seed: u64, out: *mut *mut MdConfig) -> MdStatus {
    non_null!(out);
    if method != MdMethod::Exact && d == 0 {
        return fail(MdStatus::InvalidConfig, "a sampling method needs d >= 1; use MD_METHOD_EXACT for d = 0");
    }
    guard(|| {
        let mut cfg = match method {
            MdMethod::Exact => EngineConfig::fcfw(),
            MdMethod::Random => EngineConfig::extended(Method::Random, d),
            MdMethod::Anneal => EngineConfig::extended(Method::Anneal, d),
            MdMethod::Qaoa => EngineConfig::extended(Method::Qaoa, d),
        };
        cfg.seed = seed;
        if let Err(e) = cfg.validate() {
            return from_error(e);
        }
        *out = Box::into_raw(Box::new(MdConfig { inner: cfg }));
        MdStatus::Ok
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_config_free(config: *mut MdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the target approximation error (positive).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_config_set_epsilon(config: *mut MdConfig, epsilon: f64) -> MdStatus {
    non_null!(config);
    if !(epsilon > 0.0) {
        return fail(MdStatus::InvalidConfig, format!("epsilon must be positive, got {epsilon}"));
    }
    (*config).inner.epsilon = epsilon;
    MdStatus::Ok
}

/// Sets the iteration cap; 0 restores the default of four times the node count.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_config_set_max_iterations(config: *mut MdConfig, max_iterations: usize) -> MdStatus {
    non_null!(config);
    (*config).inner.max_iterations = (max_iterations > 0).then_some(max_iterations);
    MdStatus::Ok
}

/// Sets the number of bitstrings drawn per sampling call; 0 restores the
/// method default.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_config_set_shots(config: *mut MdConfig, shots: usize) -> MdStatus {
    non_null!(config);
    let cfg = &mut (*config).inner;
    let before = cfg.sampler.shots;
    cfg.sampler.shots = (shots > 0).then_some(shots);
    if let Err(e) = cfg.validate() {
        cfg.sampler.shots = before;
        return from_error(e);
    }
    MdStatus::Ok
}

/// Fixes the QAOA angles instead of searching for them.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_config_set_qaoa_angles(config: *mut MdConfig, gamma: f64, beta: f64) -> MdStatus {
    non_null!(config);
    if !(gamma.is_finite() && beta.is_finite()) {
        return fail(MdStatus::InvalidConfig, "QAOA angles must be finite");
    }
    (*config).inner.sampler.qaoa.params = ParamMode::Fixed {
        values: [gamma, beta],
        order: ParamOrder::GammaBeta,
    };
    MdStatus::Ok
}

/// Decomposes `demand` into a convex combination of matchings.
///
/// # Safety
/// `demand` and `config` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_decompose(
    demand: *const MdDemand,
    config: *const MdConfig,
    out: *mut *mut MdResult,
) -> MdStatus {
    non_null!(demand, config, out);
    guard(|| match engine::run(&(*demand).inner, &(*config).inner) {
        Ok(r) => {
            *out = Box::into_raw(Box::new(MdResult { inner: r }));
            MdStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_result_free(result: *mut MdResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of matchings in the decomposition, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_result_length(result: *const MdResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.decomposition.length())
}

/// Final approximation error, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_result_error(result: *const MdResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.error)
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_result_termination(result: *const MdResult, out: *mut MdTermination) -> MdStatus {
    non_null!(result, out);
    *out = match (*result).inner.terminated {
        Termination::Converged => MdTermination::Converged,
        Termination::IterationCap => MdTermination::IterationCap,
        Termination::Stalled => MdTermination::Stalled,
    };
    MdStatus::Ok
}

/// Number of points in the error trace.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_result_trace_len(result: *const MdResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.decomposition.trace.len())
}

/// Reads trace point `index`: decomposition length and error.
///
/// # Safety
/// `result` must be a live handle; `length` and `error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_result_trace_point(
    result: *const MdResult,
    index: usize,
    length: *mut usize,
    error: *mut f64,
) -> MdStatus {
    non_null!(result, length, error);
    let Some(p) = (&(*result).inner.decomposition.trace).get(index) else {
        return fail(MdStatus::InvalidArgument, format!("trace index {index} out of range"));
    };
    *length = p.length;
    *error = p.error;
    MdStatus::Ok
}

/// Reads decomposition entry `index`: its coefficient, edge count and up
/// to `capacity` edges. Behaves like [`md_max_weight_matching`] when the
/// buffers are short.
///
/// # Safety
/// `result` must be a live handle; `us`/`vs` must hold `capacity` writable
/// elements; `count` and `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_result_entry(
    result: *const MdResult,
    index: usize,
    us: *mut usize,
    vs: *mut usize,
    capacity: usize,
    count: *mut usize,
    weight: *mut f64,
) -> MdStatus {
    non_null!(result, count, weight);
    let Some((m, alpha)) = (&(*result).inner.decomposition.entries).get(index) else {
        return fail(MdStatus::InvalidArgument, format!("entry index {index} out of range"));
    };
    *weight = *alpha;
    write_edges(m.edges(), us, vs, capacity, count)
}

/// Writes the result as JSON to `path`.
///
/// # Safety
/// `result` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn md_result_save_json(result: *const MdResult, path: *const c_char) -> MdStatus {
    non_null!(result, path);
    guard(|| {
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(MdStatus::InvalidArgument, "path is not valid UTF-8");
        };
        let text = match serde_json::to_string_pretty(&(*result).inner) {
            Ok(t) => t,
            Err(e) => return fail(MdStatus::Internal, e.to_string()),
        };
        match std::fs::write(path, text) {
            Ok(()) => MdStatus::Ok,
            Err(e) => fail(MdStatus::Io, format!("{path}: {e}")),
        }
    })
}
