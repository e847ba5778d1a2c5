use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use porohom_ffi::*;

fn last_error() -> String {
    let p = porohom_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn cell_coefficients_and_mesh() {
    unsafe {
        let mut cell = ptr::null_mut();
        assert_eq!(
            porohom_cell_new_square(0.5, 0.05, &mut cell),
            PorohomStatus::Ok
        );
        let (mut theta, mut sigma) = (0.0, 0.0);
        assert_eq!(
            porohom_cell_coefficients(cell, &mut theta, &mut sigma),
            PorohomStatus::Ok
        );
        assert_eq!((theta, sigma), (0.75, 2.0));

        let mut mesh = ptr::null_mut();
        assert_eq!(porohom_mesh_new_cell(cell, 8, &mut mesh), PorohomStatus::Ok);
        let (mut nv, mut nt, mut area) = (0usize, 0usize, 0.0);
        assert_eq!(
            porohom_mesh_info(mesh, &mut nv, &mut nt, ptr::null_mut(), &mut area),
            PorohomStatus::Ok
        );
        assert!((area - 0.75).abs() < 1e-12);
        let mut xy = vec![0.0; 2 * nv];
        assert_eq!(
            porohom_mesh_vertices(mesh, xy.as_mut_ptr(), xy.len()),
            PorohomStatus::Ok
        );
        assert!(xy.iter().all(|c| c.abs() <= 0.5));
        let mut tri = vec![0usize; 3 * nt];
        assert_eq!(
            porohom_mesh_triangles(mesh, tri.as_mut_ptr(), tri.len() - 1),
            PorohomStatus::InvalidArgument
        );
        assert_eq!(
            porohom_mesh_triangles(mesh, tri.as_mut_ptr(), tri.len()),
            PorohomStatus::Ok
        );
        assert!(tri.iter().all(|&v| v < nv));
        porohom_mesh_free(mesh);
        porohom_cell_free(cell);
    }
}

#[test]
fn perforated_mesh_area() {
    unsafe {
        let mut cell = ptr::null_mut();
        assert_eq!(
            porohom_cell_new_ngon(16, 0.25, 0.05, &mut cell),
            PorohomStatus::Ok
        );
        let (mut theta, mut sigma) = (0.0, 0.0);
        porohom_cell_coefficients(cell, &mut theta, &mut sigma);
        let mut mesh = ptr::null_mut();
        assert_eq!(
            porohom_mesh_new_perforated(2.0, 0.5, cell, 8, &mut mesh),
            PorohomStatus::Ok
        );
        let mut area = 0.0;
        porohom_mesh_info(
            mesh,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
            &mut area,
        );
        assert!((area - 4.0 * theta).abs() < 1e-10);
        porohom_mesh_free(mesh);

        let mut bad = ptr::null_mut();
        assert_eq!(
            porohom_mesh_new_perforated(1.0, 0.3, cell, 8, &mut bad),
            PorohomStatus::Config
        );
        assert!(bad.is_null());
        assert!(last_error().contains("not integer"));
        porohom_cell_free(cell);
    }
}

#[test]
fn tensor_of_empty_cell_is_identity() {
    unsafe {
        let mut cell = ptr::null_mut();
        assert_eq!(porohom_cell_new_empty(&mut cell), PorohomStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(
            porohom_tensor_compute(cell, 8, 1e-10, &mut t),
            PorohomStatus::Ok
        );
        let mut q = [0.0; 4];
        let mut theta = 0.0;
        assert_eq!(
            porohom_tensor_values(t, q.as_mut_ptr(), &mut theta, ptr::null_mut()),
            PorohomStatus::Ok
        );
        assert_eq!(theta, 1.0);
        for (a, b) in q.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            porohom_tensor_compute(cell, 8, 0.0, &mut t),
            PorohomStatus::InvalidArgument
        );
        porohom_tensor_free(t);
        porohom_cell_free(cell);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut cell = ptr::null_mut();
        assert_eq!(
            porohom_cell_new_ngon(8, 0.49, 0.05, &mut cell),
            PorohomStatus::Geometry
        );
        assert!(!last_error().is_empty());
        let bowtie = [-0.2, -0.2, 0.2, 0.2, 0.2, -0.2, -0.2, 0.2];
        assert_eq!(
            porohom_cell_new_polygon(bowtie.as_ptr(), 4, 0.05, &mut cell),
            PorohomStatus::Geometry
        );
        assert_eq!(
            porohom_cell_new_polygon(ptr::null(), 4, 0.05, &mut cell),
            PorohomStatus::NullPointer
        );
        assert_eq!(
            porohom_cell_coefficients(ptr::null(), ptr::null_mut(), ptr::null_mut()),
            PorohomStatus::NullPointer
        );
        assert_eq!(
            porohom_cell_new_empty(ptr::null_mut()),
            PorohomStatus::NullPointer
        );
        // A successful call clears the message.
        assert_eq!(porohom_cell_new_empty(&mut cell), PorohomStatus::Ok);
        assert!(porohom_last_error().is_null());
        porohom_cell_free(cell);
        porohom_cell_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(porohom_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn study_round_trip() {
    let cfg = CString::new(
        "sweep.eps = [0.5, 0.25]\nmesh.m = 8\ncell.m = 8\ncell.obstacle = square\ncell.side = 0.5\ntime.T = 0.1",
    )
    .unwrap();
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(
            porohom_study_run(cfg.as_ptr(), &mut report),
            PorohomStatus::Ok
        );
        let mut len = 0;
        assert_eq!(porohom_report_len(report, &mut len), PorohomStatus::Ok);
        assert_eq!(len, 2);
        let mut rec = PorohomEpsRecord::default();
        assert_eq!(
            porohom_report_record(report, 1, &mut rec),
            PorohomStatus::Ok
        );
        assert_eq!(rec.eps, 0.25);
        assert!(rec.error_l2_final >= 0.0 && rec.dofs > 0);
        assert!((rec.boundary_measure - 2.0).abs() < 1e-10);
        assert_eq!(
            porohom_report_record(report, 2, &mut rec),
            PorohomStatus::InvalidArgument
        );
        let mut v = PorohomVerdict::NotApplicable;
        assert_eq!(porohom_report_verdict(report, &mut v), PorohomStatus::Ok);

        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(porohom_report_write(report, d.as_ptr()), PorohomStatus::Ok);
        assert!(dir.path().join("errors.csv").exists());
        assert!(dir.path().join("tensor.csv").exists());
        porohom_report_free(report);

        let bad = CString::new("sweep.eps = [0.3]\nnope = 2").unwrap();
        assert_eq!(
            porohom_study_run(bad.as_ptr(), &mut report),
            PorohomStatus::Config
        );
        assert!(report.is_null());
        let msg = last_error();
        assert!(
            msg.contains("nope") && msg.contains("L/ε not integer"),
            "{msg}"
        );
    }
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "porohom.h"
int main(void) {
    PorohomCell *cell = NULL;
    PorohomMesh *mesh = NULL;
    double theta, sigma;
    if (porohom_cell_new_ngon(64, 0.25, 0.05, &cell) != POROHOM_STATUS_OK) return 1;
    porohom_cell_coefficients(cell, &theta, &sigma);
    if (porohom_mesh_new_cell(cell, 16, &mesh) != POROHOM_STATUS_OK) return 2;
    porohom_mesh_free(mesh);
    porohom_cell_free(cell);
    return porohom_last_error() == NULL ? 0 : 3;
}
"#,
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&header)
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler available; skipping");
            return;
        }
    };
    assert!(status.success());
}
