//! C interface to `covertree`.
//!
//! Objects are opaque handles created by `ct_*_new`-style calls and released
//! with the matching `*_free`. Every fallible call returns a [`CtStatus`]; on
//! failure a message is available from [`ct_last_error`] on the same thread.
//! Strings returned through `char **` are owned by the caller and released
//! with [`ct_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covertree::eigen::{classify_and_report, full_spectrum, VerifyOptions};
use covertree::graph::{build_graph, radii, PotentialGraph};
use covertree::green::{band_scan, BandOptions, BoundaryOptions, BoundarySolver, BoundaryZeta, Classification};
use covertree::metrics::{z_lambda, z_s_lambda};
use covertree::Error;

/// Status codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MalformedGraph = 3,
    Disconnected = 4,
    NotConverged = 5,
    NotBulk = 6,
    TooLarge = 7,
    BufferTooSmall = 8,
    Io = 9,
    Internal = 10,
}

/// Classification of a boundary value `ζ^{λ+i0}`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtClassification {
    Bulk = 0,
    Gap = 1,
    Pole = 2,
    Undetermined = 3,
}

/// A graph with a real potential.
pub struct CtGraph {
    inner: PotentialGraph,
}

/// Boundary values of `ζ` on the directed edges of a graph at one energy.
pub struct CtZeta {
    inner: BoundaryZeta,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::Disconnected => CtStatus::Disconnected,
        Error::MalformedEdges(_) | Error::InvalidPotential { .. } => CtStatus::MalformedGraph,
        Error::InvalidParameter(_) | Error::InvalidPath(_) | Error::RadiusTooLarge { .. } | Error::PeriodMismatch { .. } => {
            CtStatus::InvalidArgument
        }
        Error::NotConverged { .. } | Error::HerglotzSignLost { .. } | Error::BandDetectionFailed => CtStatus::NotConverged,
        Error::NotBulk => CtStatus::NotBulk,
        Error::TooLarge { .. } => CtStatus::TooLarge,
        Error::Io(_) => CtStatus::Io,
        Error::Json(_) => CtStatus::InvalidArgument,
        Error::DiagonalPole(_) | Error::Eigen(_) => CtStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CtStatus, String)>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CtStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CtStatus::Internal
        }
    }
}

fn lib(e: Error) -> (CtStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CtStatus, String) {
    (CtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn graph_ref<'a>(g: *const CtGraph) -> Result<&'a PotentialGraph, (CtStatus, String)> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null("graph"))
}

unsafe fn zeta_ref<'a>(z: *const CtZeta) -> Result<&'a BoundaryZeta, (CtStatus, String)> {
    z.as_ref().map(|z| &z.inner).ok_or_else(|| null("zeta"))
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), (CtStatus, String)> {
    if out.is_null() {
        return Err(null("output"));
    }
    let c = CString::new(s).map_err(|_| (CtStatus::Internal, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ct_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a connected graph on vertices `0..n_vertices`. `edges` holds
/// `2 * n_edges` endpoints; `potential` holds `n_vertices` values.
///
/// # Safety
/// The arrays must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_new(
    n_vertices: usize,
    edges: *const u32,
    n_edges: usize,
    potential: *const f64,
    out: *mut *mut CtGraph,
) -> CtStatus {
    guard(|| {
        if out.is_null() || potential.is_null() || (edges.is_null() && n_edges > 0) {
            return Err(null("argument"));
        }
        let w = std::slice::from_raw_parts(potential, n_vertices);
        let e = if n_edges == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(edges, 2 * n_edges)
        };
        let pairs: Vec<(usize, usize)> = e.chunks_exact(2).map(|c| (c[0] as usize, c[1] as usize)).collect();
        let g = build_graph(&pairs, w).map_err(lib)?;
        *out = Box::into_raw(Box::new(CtGraph { inner: g }));
        Ok(())
    })
}

/// Parses a graph from `{"vertices":[{"id":0,"w":0.0},...],"edges":[[0,1],...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_from_json(json: *const c_char, out: *mut *mut CtGraph) -> CtStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (CtStatus::InvalidArgument, "graph JSON is not UTF-8".to_string()))?;
        let g = PotentialGraph::from_json(text).map_err(lib)?;
        *out = Box::into_raw(Box::new(CtGraph { inner: g }));
        Ok(())
    })
}

/// Serializes a graph to JSON.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_to_json(g: *const CtGraph, out: *mut *mut c_char) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        out_string(out, g.to_json())
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_free(g: *mut CtGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_vertex_count(g: *const CtGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Number of directed edges, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_directed_edge_count(g: *const CtGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.directed_edge_count())
}

/// Origin and terminus of directed edge `b`.
///
/// # Safety
/// `g` must be a live graph handle; `origin` and `terminus` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_graph_directed_edge(
    g: *const CtGraph,
    b: usize,
    origin: *mut usize,
    terminus: *mut usize,
) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if origin.is_null() || terminus.is_null() {
            return Err(null("output"));
        }
        if b >= g.directed_edge_count() {
            return Err((CtStatus::InvalidArgument, format!("directed edge {b} out of range")));
        }
        *origin = g.origin(b);
        *terminus = g.terminus(b);
        Ok(())
    })
}

/// Boundary values `ζ^{λ+i0}` with default solver settings.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_zeta_boundary(g: *const CtGraph, lambda: f64, out: *mut *mut CtZeta) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if out.is_null() {
            return Err(null("output"));
        }
        if !lambda.is_finite() {
            return Err((CtStatus::InvalidArgument, "lambda must be finite".into()));
        }
        if g.min_degree() < 2 {
            return Err((CtStatus::InvalidArgument, "the zeta system needs minimal degree >= 2".into()));
        }
        let z = BoundarySolver::new(g, BoundaryOptions::default()).solve(lambda);
        *out = Box::into_raw(Box::new(CtZeta { inner: z }));
        Ok(())
    })
}

/// # Safety
/// `z` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ct_zeta_free(z: *mut CtZeta) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}

/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_zeta_classification(z: *const CtZeta, out: *mut CtClassification) -> CtStatus {
    guard(|| {
        let z = zeta_ref(z)?;
        if out.is_null() {
            return Err(null("output"));
        }
        *out = match z.classification {
            Classification::Bulk => CtClassification::Bulk,
            Classification::Gap => CtClassification::Gap,
            Classification::Pole => CtClassification::Pole,
            Classification::Undetermined => CtClassification::Undetermined,
        };
        Ok(())
    })
}

/// Copies `ζ` per directed edge into `re` and `im`, each of length `len`
/// (at least the directed edge count).
///
/// # Safety
/// `re` and `im` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ct_zeta_values(z: *const CtZeta, re: *mut f64, im: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let z = zeta_ref(z)?;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let v = &z.table.values;
        if len < v.len() {
            return Err((CtStatus::BufferTooSmall, format!("need {} values, got {len}", v.len())));
        }
        for (i, x) in v.iter().enumerate() {
            *re.add(i) = x.re;
            *im.add(i) = x.im;
        }
        Ok(())
    })
}

/// `z_λ = min_b |Im ζ_b|`; fails with `NOT_BULK` off the bulk.
///
/// # Safety
/// `z` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_z_lambda(z: *const CtZeta, out: *mut f64) -> CtStatus {
    guard(|| {
        let z = zeta_ref(z)?;
        if out.is_null() {
            return Err(null("output"));
        }
        if z.classification != Classification::Bulk {
            return Err(lib(Error::NotBulk));
        }
        *out = z_lambda(&z.table).map_err(lib)?;
        Ok(())
    })
}

/// `Z_{s,λ}` for `s > 1`.
///
/// # Safety
/// `g` must be the graph `z` was computed on; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_z_s(g: *const CtGraph, z: *const CtZeta, s: f64, out: *mut f64) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let z = zeta_ref(z)?;
        if out.is_null() {
            return Err(null("output"));
        }
        if z.table.values.len() != g.directed_edge_count() {
            return Err((CtStatus::InvalidArgument, "zeta was computed on another graph".into()));
        }
        if z.classification != Classification::Bulk {
            return Err(lib(Error::NotBulk));
        }
        *out = z_s_lambda(g, &z.table, s).map_err(lib)?;
        Ok(())
    })
}

fn band_options(grid_step: f64) -> Result<BandOptions, (CtStatus, String)> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err((CtStatus::InvalidArgument, format!("grid step must be positive, got {grid_step}")));
    }
    Ok(BandOptions {
        grid_step,
        ..BandOptions::default()
    })
}

/// Band structure of the cover as JSON.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_band_scan_json(g: *const CtGraph, grid_step: f64, out: *mut *mut c_char) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let opts = band_options(grid_step)?;
        let bands = band_scan(g, &opts).map_err(lib)?;
        out_string(out, serde_json::to_string(&bands).map_err(|e| lib(e.into()))?)
    })
}

/// Classifies every eigenpair and checks the delocalization bounds. Writes
/// the report as JSON and whether every check passed.
///
/// # Safety
/// `g` must be a live graph handle; `out` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_verify_json(
    g: *const CtGraph,
    grid_step: f64,
    out: *mut *mut c_char,
    passed: *mut bool,
) -> CtStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if passed.is_null() {
            return Err(null("output"));
        }
        let opts = band_options(grid_step)?;
        let bands = band_scan(g, &opts).map_err(lib)?;
        let pairs = full_spectrum(g).map_err(lib)?;
        let rep = classify_and_report(g, &pairs, &bands, &radii(g), &VerifyOptions::for_grid_step(grid_step));
        let text = serde_json::to_string(&rep).map_err(|e| lib(e.into()))?;
        out_string(out, text)?;
        *passed = rep.passed;
        Ok(())
    })
}
