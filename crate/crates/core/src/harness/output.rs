//! CSV outputs. Floats are written in shortest round-trip form.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cell::{EffectiveTensor, HomogenizedCoefficients};
use crate::harness::study::{ConvergenceReport, EpsRecord};
use crate::stepping::StepRecord;
use crate::{Error, Result};

pub const TENSOR_HEADER: [&str; 12] = [
    "theta",
    "sigma",
    "q11",
    "q12",
    "q21",
    "q22",
    "m",
    "obstacle",
    "cg_iterations_1",
    "cg_iterations_2",
    "residual_1",
    "residual_2",
];

pub const ERRORS_HEADER: [&str; 11] = [
    "eps",
    "h",
    "dofs",
    "nsteps",
    "error_L2_final",
    "rel_error_L2_final",
    "error_L2_timeavg",
    "rel_error_L2_timeavg",
    "max_l2_norm",
    "boundary_measure",
    "runtime",
];

pub const TRACE_HEADER: [&str; 5] = ["step", "time", "l2_norm", "energy", "residual"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Writes through a temporary file in the same directory and renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn tensor_csv(t: &EffectiveTensor) -> Result<Vec<u8>> {
    let q = t.q;
    let row = vec![
        t.theta.to_string(),
        t.sigma.to_string(),
        q[0][0].to_string(),
        q[0][1].to_string(),
        q[1][0].to_string(),
        q[1][1].to_string(),
        t.subdivisions.to_string(),
        t.obstacle.clone(),
        t.correctors[0].iterations.to_string(),
        t.correctors[1].iterations.to_string(),
        t.correctors[0].residual.to_string(),
        t.correctors[1].residual.to_string(),
    ];
    to_csv(&TENSOR_HEADER, [row])
}

pub fn write_tensor(path: &Path, t: &EffectiveTensor) -> Result<()> {
    write_atomic(path, &tensor_csv(t)?)
}

/// Reads `theta`, `sigma` and `Q` from a tensor record.
pub fn read_tensor(path: &Path) -> Result<HomogenizedCoefficients> {
    let text = fs::read_to_string(path)?;
    parse_tensor(&text)
}

pub fn parse_tensor(text: &str) -> Result<HomogenizedCoefficients> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    let row = r
        .records()
        .next()
        .ok_or_else(|| Error::Parse("tensor record has no data row".into()))?
        .map_err(csv_err)?;
    let get = |name: &str| -> Result<f64> {
        let i = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("tensor record lacks column {name}")))?;
        let s = row.get(i).unwrap_or("");
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("column {name}: not a number: {s:?}")))
    };
    Ok(HomogenizedCoefficients {
        q: [[get("q11")?, get("q12")?], [get("q21")?, get("q22")?]],
        theta: get("theta")?,
        sigma: get("sigma")?,
    })
}

pub fn errors_csv(records: &[EpsRecord]) -> Result<Vec<u8>> {
    to_csv(
        &ERRORS_HEADER,
        records.iter().map(|r| {
            vec![
                r.eps.to_string(),
                r.h.to_string(),
                r.dofs.to_string(),
                r.nsteps.to_string(),
                r.error_l2_final.to_string(),
                r.rel_error_l2_final.to_string(),
                r.error_l2_timeavg.to_string(),
                r.rel_error_l2_timeavg.to_string(),
                r.max_l2_norm.to_string(),
                r.boundary_measure.to_string(),
                r.runtime.to_string(),
            ]
        }),
    )
}

pub fn trace_csv(trace: &[StepRecord]) -> Result<Vec<u8>> {
    to_csv(
        &TRACE_HEADER,
        trace.iter().map(|s| {
            vec![
                s.step.to_string(),
                s.time.to_string(),
                s.l2_norm.to_string(),
                s.energy.to_string(),
                s.residual.to_string(),
            ]
        }),
    )
}

pub fn trace_file_name(eps: f64) -> String {
    format!("trace_eps_{eps}.csv")
}

pub fn write_trace(path: &Path, trace: &[StepRecord]) -> Result<()> {
    write_atomic(path, &trace_csv(trace)?)
}

/// Writes `tensor.csv`, `errors.csv` and one trace per ε into `dir`
/// (created if missing). Returns the written paths.
pub fn write_report(dir: &Path, report: &ConvergenceReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(t) = &report.tensor {
        let p = dir.join("tensor.csv");
        write_tensor(&p, t)?;
        written.push(p);
    }
    let p = dir.join("errors.csv");
    write_atomic(&p, &errors_csv(&report.records)?)?;
    written.push(p);
    for r in &report.records {
        let p = dir.join(trace_file_name(r.eps));
        write_trace(&p, &r.trace)?;
        written.push(p);
    }
    Ok(written)
}
