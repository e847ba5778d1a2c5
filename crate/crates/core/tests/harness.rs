use std::fs;
use std::process::Command;

use porohom::geometry::geometric_coefficients;
use porohom::harness::output::{parse_tensor, tensor_csv, write_report};
use porohom::harness::{parse_config, run_convergence_study, StudyStatus, Verdict};
use porohom::Error;

const SMALL: &str = "cell.obstacle = ngon\ncell.n = 16\ncell.r = 0.25\ncell.m = 16\n\
                     sweep.eps = [0.5, 0.25]\nmesh.m = 8\ntime.T = 0.2\n";

/// CSV text with the `runtime` column blanked out.
fn without_runtime(text: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "runtime");
    let mut out = vec![header.join(",")];
    for l in lines {
        let mut f: Vec<&str> = l.split(',').collect();
        if let Some(c) = col {
            f[c] = "";
        }
        out.push(f.join(","));
    }
    out.join("\n")
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = parse_config(SMALL).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let report = run_convergence_study(&cfg);
        assert!(report.is_complete());
        write_report(dir.path(), &report).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        let x = fs::read_to_string(a.path().join(&n)).unwrap();
        let y = fs::read_to_string(b.path().join(&n)).unwrap();
        assert_eq!(without_runtime(&x), without_runtime(&y), "{n:?}");
    }
}

#[test]
fn report_shape_and_coefficient_chain() {
    let cfg = parse_config(SMALL).unwrap();
    let report = run_convergence_study(&cfg);
    let t = report.tensor.as_ref().unwrap();
    let (theta, sigma) = geometric_coefficients(&cfg.cell().unwrap());
    assert!((t.theta - theta).abs() <= 1e-14 && (t.sigma - sigma).abs() <= 1e-14);
    assert_eq!(report.records.len(), 2);
    assert!(report.records.windows(2).all(|w| w[0].eps > w[1].eps));
    for r in &report.records {
        assert!(r.error_l2_final >= 0.0 && r.error_l2_timeavg >= 0.0);
        assert!((r.boundary_measure - sigma).abs() < 1e-10);
        assert_eq!(r.trace.len(), r.nsteps + 1);
        assert_eq!(r.nsteps % 5, 0);
    }
    assert_ne!(report.verdict, Verdict::NotApplicable);
    // The tensor record round-trips exactly.
    let back = parse_tensor(std::str::from_utf8(&tensor_csv(t).unwrap()).unwrap()).unwrap();
    assert_eq!(back, t.coefficients());
}

#[test]
fn single_eps_without_obstacle_matches_limit() {
    let cfg = parse_config("sweep.eps = [0.25]\nmesh.m = 8\ntime.T = 0.2\ncell.m = 8").unwrap();
    let report = run_convergence_study(&cfg);
    assert!(report.is_complete());
    assert_eq!(report.records.len(), 1);
    assert_eq!(report.verdict, Verdict::NotApplicable);
    let r = &report.records[0];
    assert!(
        r.error_l2_final <= 10.0 * cfg.cg_tol,
        "{}",
        r.error_l2_final
    );
    assert!(r.error_l2_timeavg <= 10.0 * cfg.cg_tol);
}

#[test]
fn failure_gives_incomplete_report() {
    // A tolerance CG cannot reach in double precision.
    let cfg = parse_config(&format!("{SMALL}solver.cg_tol = 1e-30\n")).unwrap();
    let report = run_convergence_study(&cfg);
    assert!(matches!(
        report.status,
        StudyStatus::Incomplete(Error::Convergence { .. })
    ));
    assert!(report.records.is_empty());
}

fn porohom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_porohom"))
}

#[test]
fn cli_cell_dns_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");

    let o = porohom()
        .arg("--out")
        .arg(&out)
        .arg("cell")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in [
        "theta",
        "sigma",
        "q11",
        "q12",
        "q21",
        "q22",
        "m 16",
        "cg_iterations_1",
        "residual_2",
    ] {
        assert!(text.contains(key), "{key} missing in {text}");
    }
    let tensor = out.join("tensor.csv");
    assert!(tensor.exists());

    let csv = dir.path().join("d.csv");
    let o = porohom()
        .args(["dns"])
        .arg(&cfg)
        .args([
            "--eps", "0.25", "--dt", "0.05", "--preset", "decay", "--csv",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(&csv).unwrap();
    assert!(trace.starts_with("step,time,l2_norm,energy,residual"));
    assert_eq!(trace.lines().count(), 1 + 5);

    let o = porohom()
        .arg("--out")
        .arg(&out)
        .arg("limit")
        .arg(&cfg)
        .arg("--tensor")
        .arg(&tensor)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trace_limit.csv").exists());
}

#[test]
fn cli_converge_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let o = porohom()
        .args(["--threads", "2", "--seed", "7", "--out"])
        .arg(dir.path().join("o"))
        .arg("converge")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let errors = fs::read_to_string(dir.path().join("o/errors.csv")).unwrap();
    assert!(errors.starts_with("eps,h,dofs,nsteps,error_L2_final"));
    assert!(dir.path().join("o/trace_eps_0.25.csv").exists());

    let bad = dir.path().join("bad.cfg");
    fs::write(
        &bad,
        "sweep.eps = [0.3]\ncell.obstacle = ngon\ncell.n = 8\ncell.r = 0.49\n",
    )
    .unwrap();
    let o = porohom().arg("converge").arg(&bad).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.contains("L/ε not integer") && err.contains("clearance"),
        "{err}"
    );
}
