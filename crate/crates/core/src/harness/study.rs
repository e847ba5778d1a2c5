//! The ε-sweep: tensor, one limit run, one perforated run per ε, errors.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::cell::{compute_effective_tensor, EffectiveTensor};
use crate::dns::{run_dns_with, DnsOperators};
use crate::fem::CgOptions;
use crate::geometry::{build_perforated_mesh, CellGeometry, Mesh};
use crate::harness::config::{ExperimentConfig, EVAL_TIMES};
use crate::harness::transfer::{mass_error, Transfer};
use crate::limit::{run_limit_with, LimitProblem};
use crate::stepping::{StepOptions, StepRecord, TransientSolution};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsRecord {
    pub eps: f64,
    /// Largest triangle diameter of the perforated mesh.
    pub h: f64,
    /// Free unknowns of the perforated problem.
    pub dofs: usize,
    pub nsteps: usize,
    pub error_l2_final: f64,
    pub rel_error_l2_final: f64,
    /// Mean over the evaluation times `k T / 5`, `k = 1..5`.
    pub error_l2_timeavg: f64,
    pub rel_error_l2_timeavg: f64,
    /// Largest `sqrt(u^T M u)` over the run.
    pub max_l2_norm: f64,
    /// `1^T (eps B) 1`.
    pub boundary_measure: f64,
    /// Wall-clock seconds of the perforated run (meshing included).
    pub runtime: f64,
    pub trace: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Decreasing,
    NotDecreasing,
    /// Fewer than two records.
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Decreasing => "decreasing",
            Verdict::NotDecreasing => "not-decreasing",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyStatus {
    Complete,
    /// The first failure in sweep order; records hold what finished.
    Incomplete(Error),
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub tensor: Option<EffectiveTensor>,
    /// Sorted by decreasing ε.
    pub records: Vec<EpsRecord>,
    pub verdict: Verdict,
    pub status: StudyStatus,
}

impl ConvergenceReport {
    pub fn is_complete(&self) -> bool {
        self.status == StudyStatus::Complete
    }

    /// Observed exponents `log(e_k / e_{k+1}) / log(eps_k / eps_{k+1})` of
    /// the relative final-time error.
    pub fn observed_rates(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|w| {
                (w[0].rel_error_l2_final / w[1].rel_error_l2_final).ln()
                    / (w[0].eps / w[1].eps).ln()
            })
            .collect()
    }
}

pub fn verdict(records: &[EpsRecord]) -> Verdict {
    if records.len() < 2 {
        Verdict::NotApplicable
    } else if records
        .windows(2)
        .all(|w| w[1].error_l2_final < w[0].error_l2_final)
    {
        Verdict::Decreasing
    } else {
        Verdict::NotDecreasing
    }
}

/// The limit run shared by every ε: the unperforated mesh with the
/// background resolution of the finest ε and the finest time grid, storing
/// the evaluation times only.
pub fn limit_for_config(
    config: &ExperimentConfig,
    tensor: &EffectiveTensor,
) -> Result<TransientSolution> {
    let eps_min = *config
        .eps
        .last()
        .ok_or_else(|| Error::config("sweep.eps: empty"))?;
    let mesh = build_perforated_mesh(&config.domain(eps_min)?, &CellGeometry::empty(), config.m)?;
    let grid = config.time_grid(eps_min)?;
    let problem = LimitProblem::new(tensor.coefficients(), config.data()?, Arc::new(mesh), grid)?;
    run_limit_with(&problem, &eval_options(config, grid.nsteps()))
}

fn eval_options(config: &ExperimentConfig, nsteps: usize) -> StepOptions {
    StepOptions {
        cg: CgOptions::with_tol(config.cg_tol),
        store_stride: nsteps / EVAL_TIMES,
    }
}

fn run_one(
    config: &ExperimentConfig,
    cell: &CellGeometry,
    eps: f64,
    limit: &TransientSolution,
    limit_mesh: &Mesh,
) -> Result<EpsRecord> {
    let start = Instant::now();
    let mesh = Arc::new(build_perforated_mesh(&config.domain(eps)?, cell, config.m)?);
    let grid = config.time_grid(eps)?;
    let data = config.data()?;
    let sol = run_dns_with(
        mesh.clone(),
        &data,
        &grid,
        eps,
        &eval_options(config, grid.nsteps()),
    )?;
    let runtime = start.elapsed().as_secs_f64();

    let ops = DnsOperators::assemble(&mesh, eps, data.kappa())?;
    let transfer = Transfer::new(limit_mesh, mesh.vertices())?;
    let mut errors = Vec::with_capacity(EVAL_TIMES);
    for (k, u) in sol.states().iter().enumerate().skip(1) {
        let lim = limit
            .states()
            .get(k)
            .ok_or_else(|| Error::Argument("limit run lacks an evaluation time".into()))?;
        errors.push(mass_error(&ops.mass, u, &transfer.apply(lim)?));
    }
    let n = errors.len() as f64;
    let (final_abs, final_rel) = *errors.last().expect("five evaluation times");
    let dofs = crate::fem::DofMap::for_mesh(&mesh)?.num_free();
    Ok(EpsRecord {
        eps,
        h: mesh.h(),
        dofs,
        nsteps: grid.nsteps(),
        error_l2_final: final_abs,
        rel_error_l2_final: final_rel,
        error_l2_timeavg: errors.iter().map(|e| e.0).sum::<f64>() / n,
        rel_error_l2_timeavg: errors.iter().map(|e| e.1).sum::<f64>() / n,
        max_l2_norm: sol.max_l2_norm(),
        boundary_measure: ops.scaled_boundary_measure(),
        runtime,
        trace: sol.records().to_vec(),
    })
}

pub fn run_convergence_study(config: &ExperimentConfig) -> ConvergenceReport {
    let mut report = ConvergenceReport {
        tensor: None,
        records: Vec::new(),
        verdict: Verdict::NotApplicable,
        status: StudyStatus::Complete,
    };
    let fail = |mut r: ConvergenceReport, e: Error| {
        r.verdict = verdict(&r.records);
        r.status = StudyStatus::Incomplete(e);
        r
    };
    let cell = match config.cell() {
        Ok(c) => c,
        Err(e) => return fail(report, e),
    };
    let tensor =
        match compute_effective_tensor(&cell, config.cell_m, &CgOptions::with_tol(config.cg_tol)) {
            Ok(t) => t,
            Err(e) => return fail(report, e),
        };
    report.tensor = Some(tensor.clone());
    let limit = match limit_for_config(config, &tensor) {
        Ok(l) => l,
        Err(e) => return fail(report, e),
    };
    let limit_mesh = limit.mesh().clone();
    let results: Vec<Result<EpsRecord>> = config
        .eps
        .par_iter()
        .map(|&eps| run_one(config, &cell, eps, &limit, &limit_mesh))
        .collect();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rec) => report.records.push(rec),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => fail(report, e),
        None => {
            report.verdict = verdict(&report.records);
            report
        }
    }
}
