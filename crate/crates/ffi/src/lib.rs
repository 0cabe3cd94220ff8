//! C ABI for the certified-mapping library.
//!
//! Conventions: objects are opaque handles created and destroyed by this
//! library; every fallible call returns a [`BijmapStatus`] and reports
//! details through a thread-local message retrievable with
//! [`bijmap_last_error`]. Pointers returned by that function are valid until
//! the next failing call on the same thread. All handle arguments must
//! either be null (rejected cleanly) or come from this library.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nalgebra::Vector2;

use bijmap::certify::{
    certify_boundary_bijection, certify_boundary_lines, certify_monotone_boundary, check_necessary,
};
use bijmap::degree::{boundary_degree, preimage_count};
use bijmap::mapping::{dirichlet_energy, Map2};
use bijmap::mesh::SimplicialMesh;
use bijmap::pipeline::{load_map_images, parse_problem, solve_problem, Problem};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BijmapStatus {
    /// Success.
    BijmapOk = 0,
    /// A required pointer argument was null.
    BijmapNullArgument = 1,
    /// An argument was structurally invalid (bad size, unknown enum value).
    BijmapInvalidArgument = 2,
    /// Reading or parsing an input file failed.
    BijmapParseError = 3,
    /// The solve failed (infeasible assignment, solver breakdown).
    BijmapSolveError = 4,
    /// A certifier could not run on these inputs.
    BijmapCertifyError = 5,
    /// A degree query failed (no generic direction, query on the cycle image).
    BijmapDegreeError = 6,
    /// A panic was caught at the boundary; state may be stale but memory is safe.
    BijmapPanic = 7,
}

use BijmapStatus::*;

/// Which sufficient condition to certify.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BijmapCondition {
    /// Necessary only: non-degenerate, orientation preserving.
    BijmapConditionNecessary = 0,
    /// Boundary maps bijectively onto the polygon boundary.
    BijmapConditionBoundaryBijection = 1,
    /// Boundary edges on assigned hull lines, corner pins met.
    BijmapConditionBoundaryLines = 2,
    /// Line conditions plus strictly monotone boundary advance.
    BijmapConditionMonotoneBoundary = 3,
}

/// An opaque parsed problem: mesh, target polygon, assignment, parameters.
pub struct BijmapProblem {
    inner: Problem,
}

/// An opaque planar map: a mesh plus one image point per vertex.
pub struct BijmapMap {
    mesh: SimplicialMesh,
    images: Vec<Vector2<f64>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: BijmapStatus, msg: &str) -> BijmapStatus {
    set_error(msg);
    status
}

/// Guards the FFI boundary against unwinding.
fn guarded(f: impl FnOnce() -> BijmapStatus) -> BijmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the C boundary".to_string());
            fail(BijmapPanic, &msg)
        }
    }
}

/// Message for the most recent failure on this thread. Never null; empty
/// when nothing failed yet. Valid until the next failing call here.
#[no_mangle]
pub extern "C" fn bijmap_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bijmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a problem file (mesh, polygon, assignment, parameters). On
/// success, stores a new handle in `out`; free it with
/// [`bijmap_problem_free`].
#[no_mangle]
pub extern "C" fn bijmap_problem_load(
    path: *const c_char,
    out: *mut *mut BijmapProblem,
) -> BijmapStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "path and out must be non-null");
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(BijmapInvalidArgument, "path is not valid UTF-8"),
        };
        match parse_problem(Path::new(path)) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(BijmapProblem { inner })) };
                BijmapOk
            }
            Err(e) => fail(BijmapParseError, &e.to_string()),
        }
    })
}

/// Frees a problem handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn bijmap_problem_free(problem: *mut BijmapProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Number of mesh vertices in a problem, or 0 for null.
#[no_mangle]
pub extern "C" fn bijmap_problem_vertex_count(problem: *const BijmapProblem) -> usize {
    if problem.is_null() {
        return 0;
    }
    unsafe { &*problem }.inner.mesh.vertex_count()
}

/// Runs the solve the problem's mode asks for and stores a new map handle
/// in `out`; free it with [`bijmap_map_free`].
#[no_mangle]
pub extern "C" fn bijmap_solve(
    problem: *const BijmapProblem,
    out: *mut *mut BijmapMap,
) -> BijmapStatus {
    guarded(|| {
        if problem.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "problem and out must be non-null");
        }
        let problem = &unsafe { &*problem }.inner;
        match solve_problem(problem) {
            Ok((images, _phases)) => {
                let map = BijmapMap { mesh: problem.mesh.clone(), images };
                unsafe { *out = Box::into_raw(Box::new(map)) };
                BijmapOk
            }
            Err((stage, error)) => fail(BijmapSolveError, &format!("{stage}: {error}")),
        }
    })
}

/// Loads vertex images from an OBJ/OFF written by the solver, checked
/// against the problem's mesh. Stores a new map handle in `out`.
#[no_mangle]
pub extern "C" fn bijmap_map_load(
    problem: *const BijmapProblem,
    path: *const c_char,
    out: *mut *mut BijmapMap,
) -> BijmapStatus {
    guarded(|| {
        if problem.is_null() || path.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "problem, path, and out must be non-null");
        }
        let problem = &unsafe { &*problem }.inner;
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(BijmapInvalidArgument, "path is not valid UTF-8"),
        };
        match load_map_images(Path::new(path), problem.mesh.vertex_count()) {
            Ok(images) => {
                let map = BijmapMap { mesh: problem.mesh.clone(), images };
                unsafe { *out = Box::into_raw(Box::new(map)) };
                BijmapOk
            }
            Err(e) => fail(BijmapParseError, &e.to_string()),
        }
    })
}

/// Frees a map handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn bijmap_map_free(map: *mut BijmapMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Number of vertices in a map, or 0 for null.
#[no_mangle]
pub extern "C" fn bijmap_map_vertex_count(map: *const BijmapMap) -> usize {
    if map.is_null() {
        return 0;
    }
    unsafe { &*map }.images.len()
}

/// Copies the vertex images as interleaved x, y pairs into `out_xy`, which
/// must hold at least `2 * vertex_count` doubles.
#[no_mangle]
pub extern "C" fn bijmap_map_images(
    map: *const BijmapMap,
    out_xy: *mut f64,
    len: usize,
) -> BijmapStatus {
    guarded(|| {
        if map.is_null() || out_xy.is_null() {
            return fail(BijmapNullArgument, "map and out_xy must be non-null");
        }
        let map = unsafe { &*map };
        if len < 2 * map.images.len() {
            return fail(
                BijmapInvalidArgument,
                &format!("buffer holds {len} doubles, need {}", 2 * map.images.len()),
            );
        }
        for (i, u) in map.images.iter().enumerate() {
            unsafe {
                *out_xy.add(2 * i) = u.x;
                *out_xy.add(2 * i + 1) = u.y;
            }
        }
        BijmapOk
    })
}

fn map2_of(map: &BijmapMap) -> Result<Map2<'_>, String> {
    Map2::new(&map.mesh, map.images.clone()).map_err(|e| e.to_string())
}

/// Dirichlet energy of a map.
#[no_mangle]
pub extern "C" fn bijmap_map_dirichlet_energy(
    map: *const BijmapMap,
    out: *mut f64,
) -> BijmapStatus {
    guarded(|| {
        if map.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "map and out must be non-null");
        }
        let map = unsafe { &*map };
        let m = match map2_of(map) {
            Ok(m) => m,
            Err(e) => return fail(BijmapInvalidArgument, &e),
        };
        match dirichlet_energy(&m) {
            Ok(e) => {
                unsafe { *out = e };
                BijmapOk
            }
            Err(e) => fail(BijmapCertifyError, &e.to_string()),
        }
    })
}

/// Runs one certifier on a map against the problem's polygon and
/// assignment. `out_certified` receives 1 when the certificate is granted,
/// 0 when it is refuted; a non-Ok status means the check could not run.
#[no_mangle]
pub extern "C" fn bijmap_certify(
    problem: *const BijmapProblem,
    map: *const BijmapMap,
    condition: BijmapCondition,
    out_certified: *mut u8,
) -> BijmapStatus {
    guarded(|| {
        if problem.is_null() || map.is_null() || out_certified.is_null() {
            return fail(BijmapNullArgument, "problem, map, and out_certified must be non-null");
        }
        let problem = &unsafe { &*problem }.inner;
        let map = unsafe { &*map };
        if map.images.len() != problem.mesh.vertex_count() {
            return fail(BijmapInvalidArgument, "map does not match the problem's mesh");
        }
        let m = match map2_of(map) {
            Ok(m) => m,
            Err(e) => return fail(BijmapInvalidArgument, &e),
        };
        let tol = &problem.tolerances;
        let result = match condition {
            BijmapCondition::BijmapConditionNecessary => check_necessary(&m, tol),
            BijmapCondition::BijmapConditionBoundaryBijection => {
                certify_boundary_bijection(&m, &problem.polygon, tol)
            }
            BijmapCondition::BijmapConditionBoundaryLines => {
                certify_boundary_lines(&m, &problem.polygon, &problem.assignment, tol)
            }
            BijmapCondition::BijmapConditionMonotoneBoundary => {
                certify_monotone_boundary(&m, &problem.polygon, &problem.assignment, tol)
            }
        };
        match result {
            Ok(cert) => {
                unsafe { *out_certified = cert.certified() as u8 };
                BijmapOk
            }
            Err(e) => fail(BijmapCertifyError, &e.to_string()),
        }
    })
}

/// Boundary degree of the map at the target point (x, y).
#[no_mangle]
pub extern "C" fn bijmap_boundary_degree(
    map: *const BijmapMap,
    x: f64,
    y: f64,
    seed: u64,
    out: *mut i64,
) -> BijmapStatus {
    guarded(|| {
        if map.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "map and out must be non-null");
        }
        let map = unsafe { &*map };
        let m = match map2_of(map) {
            Ok(m) => m,
            Err(e) => return fail(BijmapInvalidArgument, &e),
        };
        match boundary_degree(&m, Vector2::new(x, y), seed) {
            Ok(deg) => {
                unsafe { *out = deg };
                BijmapOk
            }
            Err(e) => fail(BijmapDegreeError, &e.to_string()),
        }
    })
}

/// Number of distinct pre-images of the target point (x, y).
#[no_mangle]
pub extern "C" fn bijmap_preimage_count(
    map: *const BijmapMap,
    x: f64,
    y: f64,
    out: *mut usize,
) -> BijmapStatus {
    guarded(|| {
        if map.is_null() || out.is_null() {
            return fail(BijmapNullArgument, "map and out must be non-null");
        }
        let map = unsafe { &*map };
        let m = match map2_of(map) {
            Ok(m) => m,
            Err(e) => return fail(BijmapInvalidArgument, &e),
        };
        unsafe { *out = preimage_count(&m, Vector2::new(x, y)).count };
        BijmapOk
    })
}
