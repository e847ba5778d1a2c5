//! C ABI for porohom.
//!
//! Objects are exposed as opaque handles created by `porohom_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible
//! function returns a [`PorohomStatus`]; on failure a description is kept
//! per thread and can be read with [`porohom_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use porohom::cell::{compute_effective_tensor, EffectiveTensor};
use porohom::fem::CgOptions;
use porohom::geometry::{
    build_cell_mesh, build_perforated_mesh, geometric_coefficients, CellGeometry, DomainSpec, Mesh,
    ObstaclePolygon,
};
use porohom::harness::output::write_report;
use porohom::harness::{
    parse_config, run_convergence_study, ConvergenceReport, StudyStatus, Verdict,
};
use porohom::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PorohomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Config = 4,
    Convergence = 5,
    Constraint = 6,
    Location = 7,
    Consistency = 8,
    Unsupported = 9,
    Parse = 10,
    Io = 11,
    /// A Rust panic was caught at the boundary.
    Panic = 12,
}

impl From<&Error> for PorohomStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Geometry(_) => Self::Geometry,
            Error::Config(_) => Self::Config,
            Error::Argument(_) => Self::InvalidArgument,
            Error::Constraint(_) => Self::Constraint,
            Error::Convergence { .. } => Self::Convergence,
            Error::Location { .. } => Self::Location,
            Error::Consistency(_) => Self::Consistency,
            Error::Unsupported(_) => Self::Unsupported,
            Error::Parse(_) => Self::Parse,
            Error::Io(_) => Self::Io,
        }
    }
}

/// Outcome of the ε sweep, see [`porohom_report_verdict`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PorohomVerdict {
    Decreasing = 0,
    NotDecreasing = 1,
    NotApplicable = 2,
}

/// One row of the sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PorohomEpsRecord {
    pub eps: f64,
    pub h: f64,
    pub dofs: usize,
    pub nsteps: usize,
    pub error_l2_final: f64,
    pub rel_error_l2_final: f64,
    pub error_l2_timeavg: f64,
    pub rel_error_l2_timeavg: f64,
    pub max_l2_norm: f64,
    pub boundary_measure: f64,
    pub runtime: f64,
}

/// Periodic cell with an optional obstacle.
pub struct PorohomCell(CellGeometry);
/// Triangle mesh.
pub struct PorohomMesh(Mesh);
/// Homogenized tensor with its geometric coefficients.
pub struct PorohomTensor(EffectiveTensor);
/// Result of a convergence study.
pub struct PorohomReport(ConvergenceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PorohomStatus, msg: impl Into<String>) -> PorohomStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), PorohomStatus>) -> PorohomStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PorohomStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PorohomStatus::Panic, msg)
        }
    }
}

fn check<T>(r: porohom::Result<T>) -> Result<T, PorohomStatus> {
    r.map_err(|e| fail(PorohomStatus::from(&e), e.to_string()))
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, PorohomStatus> {
    p.as_ref()
        .ok_or_else(|| fail(PorohomStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), PorohomStatus> {
    if out.is_null() {
        return Err(fail(PorohomStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, value: T) -> Result<(), PorohomStatus> {
    if out.is_null() {
        return Err(fail(PorohomStatus::NullPointer, "null output pointer"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, PorohomStatus> {
    if s.is_null() {
        return Err(fail(PorohomStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PorohomStatus::InvalidArgument, "string is not UTF-8"))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn porohom_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn porohom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Cell without obstacle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_new_empty(out: *mut *mut PorohomCell) -> PorohomStatus {
    guard(|| put_box(out, PorohomCell(CellGeometry::empty())))
}

/// Cell with a centered square obstacle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_new_square(
    side: f64,
    clearance: f64,
    out: *mut *mut PorohomCell,
) -> PorohomStatus {
    guard(|| {
        let p = check(ObstaclePolygon::square(side))?;
        put_box(
            out,
            PorohomCell(check(CellGeometry::with_obstacle(p, clearance))?),
        )
    })
}

/// Cell with a centered regular `n`-gon of circumradius `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_new_ngon(
    n: usize,
    r: f64,
    clearance: f64,
    out: *mut *mut PorohomCell,
) -> PorohomStatus {
    guard(|| {
        let p = check(ObstaclePolygon::regular(n, r))?;
        put_box(
            out,
            PorohomCell(check(CellGeometry::with_obstacle(p, clearance))?),
        )
    })
}

/// Cell with an arbitrary simple counter-clockwise polygon given as
/// `n` interleaved coordinates `x0, y0, x1, y1, ...` (`2 n` doubles).
///
/// # Safety
/// `xy` must point to `2 n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_new_polygon(
    xy: *const f64,
    n: usize,
    clearance: f64,
    out: *mut *mut PorohomCell,
) -> PorohomStatus {
    guard(|| {
        if xy.is_null() {
            return Err(fail(PorohomStatus::NullPointer, "null coordinates"));
        }
        let c = std::slice::from_raw_parts(xy, 2 * n);
        let pts = c.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
        let p = check(ObstaclePolygon::new(pts))?;
        put_box(
            out,
            PorohomCell(check(CellGeometry::with_obstacle(p, clearance))?),
        )
    })
}

/// Fluid fraction and obstacle perimeter of the cell.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_coefficients(
    cell: *const PorohomCell,
    theta: *mut f64,
    sigma: *mut f64,
) -> PorohomStatus {
    guard(|| {
        let (t, s) = geometric_coefficients(&get(cell)?.0);
        put(theta, t)?;
        put(sigma, s)
    })
}

/// # Safety
/// `cell` must come from a `porohom_cell_new_*` call (or be NULL) and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn porohom_cell_free(cell: *mut PorohomCell) {
    if !cell.is_null() {
        drop(Box::from_raw(cell));
    }
}

/// Periodic mesh of the cell with `m` subdivisions per side.
///
/// # Safety
/// `cell` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_new_cell(
    cell: *const PorohomCell,
    m: usize,
    out: *mut *mut PorohomMesh,
) -> PorohomStatus {
    guard(|| {
        let mesh = check(build_cell_mesh(&get(cell)?.0, m))?;
        put_box(out, PorohomMesh(mesh))
    })
}

/// Mesh of `(0, L)^2` perforated by one `eps`-scaled obstacle per cell.
///
/// # Safety
/// `cell` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_new_perforated(
    side_length: f64,
    eps: f64,
    cell: *const PorohomCell,
    m: usize,
    out: *mut *mut PorohomMesh,
) -> PorohomStatus {
    guard(|| {
        let domain = check(DomainSpec::new(side_length, eps))?;
        let mesh = check(build_perforated_mesh(&domain, &get(cell)?.0, m))?;
        put_box(out, PorohomMesh(mesh))
    })
}

/// Vertex and triangle counts, largest triangle diameter and total area.
///
/// # Safety
/// `mesh` must be valid; output pointers may be NULL to skip a value.
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_info(
    mesh: *const PorohomMesh,
    num_vertices: *mut usize,
    num_triangles: *mut usize,
    h: *mut f64,
    area: *mut f64,
) -> PorohomStatus {
    guard(|| {
        let m = &get(mesh)?.0;
        if !num_vertices.is_null() {
            num_vertices.write(m.num_vertices());
        }
        if !num_triangles.is_null() {
            num_triangles.write(m.num_triangles());
        }
        if !h.is_null() {
            h.write(m.h());
        }
        if !area.is_null() {
            area.write(m.area());
        }
        Ok(())
    })
}

/// Copies vertex coordinates (`2 * num_vertices` doubles) into `xy`.
///
/// # Safety
/// `xy` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_vertices(
    mesh: *const PorohomMesh,
    xy: *mut f64,
    capacity: usize,
) -> PorohomStatus {
    guard(|| {
        let m = &get(mesh)?.0;
        let need = 2 * m.num_vertices();
        if xy.is_null() {
            return Err(fail(PorohomStatus::NullPointer, "null buffer"));
        }
        if capacity < need {
            return Err(fail(
                PorohomStatus::InvalidArgument,
                format!("buffer holds {capacity} doubles, {need} needed"),
            ));
        }
        let out = std::slice::from_raw_parts_mut(xy, need);
        for (o, p) in out.chunks_exact_mut(2).zip(m.vertices()) {
            o.copy_from_slice(p);
        }
        Ok(())
    })
}

/// Copies triangle vertex indices (`3 * num_triangles` entries).
///
/// # Safety
/// `tri` must have room for `capacity` entries.
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_triangles(
    mesh: *const PorohomMesh,
    tri: *mut usize,
    capacity: usize,
) -> PorohomStatus {
    guard(|| {
        let m = &get(mesh)?.0;
        let need = 3 * m.num_triangles();
        if tri.is_null() {
            return Err(fail(PorohomStatus::NullPointer, "null buffer"));
        }
        if capacity < need {
            return Err(fail(
                PorohomStatus::InvalidArgument,
                format!("buffer holds {capacity} entries, {need} needed"),
            ));
        }
        let out = std::slice::from_raw_parts_mut(tri, need);
        for (o, t) in out.chunks_exact_mut(3).zip(m.triangles()) {
            o.copy_from_slice(t);
        }
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from a `porohom_mesh_new_*` call (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn porohom_mesh_free(mesh: *mut PorohomMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Solves the cell problems on an `m`-subdivided cell mesh.
///
/// # Safety
/// `cell` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_tensor_compute(
    cell: *const PorohomCell,
    m: usize,
    cg_tol: f64,
    out: *mut *mut PorohomTensor,
) -> PorohomStatus {
    guard(|| {
        if !(cg_tol > 0.0 && cg_tol < 1.0) {
            return Err(fail(
                PorohomStatus::InvalidArgument,
                format!("cg_tol must lie in (0, 1), got {cg_tol}"),
            ));
        }
        let t = check(compute_effective_tensor(
            &get(cell)?.0,
            m,
            &CgOptions::with_tol(cg_tol),
        ))?;
        put_box(out, PorohomTensor(t))
    })
}

/// `Q` in row-major order (`q11, q12, q21, q22`), plus `theta` and `sigma`.
///
/// # Safety
/// `q` must have room for 4 doubles; `theta` and `sigma` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn porohom_tensor_values(
    tensor: *const PorohomTensor,
    q: *mut f64,
    theta: *mut f64,
    sigma: *mut f64,
) -> PorohomStatus {
    guard(|| {
        let t = &get(tensor)?.0;
        if q.is_null() {
            return Err(fail(PorohomStatus::NullPointer, "null q buffer"));
        }
        std::slice::from_raw_parts_mut(q, 4)
            .copy_from_slice(&[t.q[0][0], t.q[0][1], t.q[1][0], t.q[1][1]]);
        if !theta.is_null() {
            theta.write(t.theta);
        }
        if !sigma.is_null() {
            sigma.write(t.sigma);
        }
        Ok(())
    })
}

/// # Safety
/// `tensor` must come from [`porohom_tensor_compute`] (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn porohom_tensor_free(tensor: *mut PorohomTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Parses `config` and runs the ε sweep. When the study stops early the
/// partial report is still returned through `out` together with the
/// status of the failure; configuration errors return no report.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_study_run(
    config: *const c_char,
    out: *mut *mut PorohomReport,
) -> PorohomStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(PorohomStatus::NullPointer, "null output pointer"));
        }
        out.write(ptr::null_mut());
        let cfg = check(parse_config(c_str(config)?))?;
        let report = run_convergence_study(&cfg);
        let status = match &report.status {
            StudyStatus::Complete => None,
            StudyStatus::Incomplete(e) => Some(fail(PorohomStatus::from(e), e.to_string())),
        };
        put_box(out, PorohomReport(report))?;
        status.map_or(Ok(()), Err)
    })
}

/// Number of ε records.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_report_len(
    report: *const PorohomReport,
    len: *mut usize,
) -> PorohomStatus {
    guard(|| put(len, get(report)?.0.records.len()))
}

/// Record `index`, ordered by decreasing ε.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_report_record(
    report: *const PorohomReport,
    index: usize,
    record: *mut PorohomEpsRecord,
) -> PorohomStatus {
    guard(|| {
        let r = get(report)?.0.records.get(index).ok_or_else(|| {
            fail(
                PorohomStatus::InvalidArgument,
                format!("record index {index} out of range"),
            )
        })?;
        put(
            record,
            PorohomEpsRecord {
                eps: r.eps,
                h: r.h,
                dofs: r.dofs,
                nsteps: r.nsteps,
                error_l2_final: r.error_l2_final,
                rel_error_l2_final: r.rel_error_l2_final,
                error_l2_timeavg: r.error_l2_timeavg,
                rel_error_l2_timeavg: r.rel_error_l2_timeavg,
                max_l2_norm: r.max_l2_norm,
                boundary_measure: r.boundary_measure,
                runtime: r.runtime,
            },
        )
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn porohom_report_verdict(
    report: *const PorohomReport,
    verdict: *mut PorohomVerdict,
) -> PorohomStatus {
    guard(|| {
        let v = match get(report)?.0.verdict {
            Verdict::Decreasing => PorohomVerdict::Decreasing,
            Verdict::NotDecreasing => PorohomVerdict::NotDecreasing,
            Verdict::NotApplicable => PorohomVerdict::NotApplicable,
        };
        put(verdict, v)
    })
}

/// Writes the CSV outputs of the report into directory `dir`.
///
/// # Safety
/// `report` must be valid and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn porohom_report_write(
    report: *const PorohomReport,
    dir: *const c_char,
) -> PorohomStatus {
    guard(|| {
        let r = get(report)?;
        check(write_report(Path::new(c_str(dir)?), &r.0)).map(|_| ())
    })
}

/// # Safety
/// `report` must come from [`porohom_study_run`] (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn porohom_report_free(report: *mut PorohomReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
