//! Experiment configuration.
//!
//! Either a JSON object (nested objects become dotted keys) or a flat text
//! document with one `key = value` per line, where each value is read as
//! JSON when possible and as a bare string otherwise. `#` starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde_json::Value;

use crate::geometry::{
    cells_per_side, CellGeometry, DomainSpec, ObstaclePolygon, DEFAULT_CLEARANCE,
};
use crate::problem::{ProblemData, TimeGrid};
use crate::{Error, Result};

pub const DEFAULT_EPS: [f64; 3] = [0.25, 0.125, 0.0625];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObstacleSpec {
    None,
    Square { side: f64 },
    Ngon { n: usize, r: f64 },
}

impl ObstacleSpec {
    pub fn polygon(&self) -> Result<Option<ObstaclePolygon>> {
        match *self {
            ObstacleSpec::None => Ok(None),
            ObstacleSpec::Square { side } => ObstaclePolygon::square(side).map(Some),
            ObstacleSpec::Ngon { n, r } => ObstaclePolygon::regular(n, r).map(Some),
        }
    }
}

/// Analytic data triples `(f, g, u0)`, all scaled to the domain side `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataPreset {
    /// `f = g = u0 = 0`.
    Zero,
    /// `f = sin(pi x/L) sin(pi y/L)`, `g = 1`, `u0 = 0`.
    Standard,
    /// `f = g = 0`, `u0 = sin(pi x/L) sin(pi y/L)`.
    Decay,
    /// `f = 1`, `g = 0`, `u0 = 0`.
    UnitSource,
}

impl DataPreset {
    pub const ALL: [DataPreset; 4] = [
        DataPreset::Zero,
        DataPreset::Standard,
        DataPreset::Decay,
        DataPreset::UnitSource,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataPreset::Zero => "zero",
            DataPreset::Standard => "standard",
            DataPreset::Decay => "decay",
            DataPreset::UnitSource => "unit_source",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    pub fn data(self, kappa: f64, final_time: f64, side_length: f64) -> Result<ProblemData> {
        let d = ProblemData::new(kappa, final_time)?;
        let k = PI / side_length;
        let bump = move |p: crate::Point| (k * p[0]).sin() * (k * p[1]).sin();
        Ok(match self {
            DataPreset::Zero => d,
            DataPreset::Standard => d
                .with_source(move |p, _| bump(p))
                .with_boundary_source(|_, _| 1.0),
            DataPreset::Decay => d.with_initial(bump),
            DataPreset::UnitSource => d.with_source(|_, _| 1.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeRule {
    /// Target step `scale * eps`.
    Linear {
        scale: f64,
    },
    /// Target step `scale * eps^2`.
    Quadratic {
        scale: f64,
    },
    Fixed {
        nsteps: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub obstacle: ObstacleSpec,
    pub clearance: f64,
    /// Subdivisions of the cell mesh used for the tensor.
    pub cell_m: usize,
    pub side_length: f64,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    /// Subdivisions per cell of the perforated meshes.
    pub m: usize,
    pub kappa: f64,
    pub preset: DataPreset,
    pub final_time: f64,
    pub time_rule: TimeRule,
    pub cg_tol: f64,
    pub output_dir: Option<PathBuf>,
}

/// Number of evenly spaced evaluation times; step counts are multiples of it.
pub const EVAL_TIMES: usize = 5;

impl ExperimentConfig {
    pub fn cell(&self) -> Result<CellGeometry> {
        match self.obstacle.polygon()? {
            None => Ok(CellGeometry::empty()),
            Some(p) => CellGeometry::with_obstacle(p, self.clearance),
        }
    }

    pub fn domain(&self, eps: f64) -> Result<DomainSpec> {
        DomainSpec::new(self.side_length, eps)
    }

    pub fn data(&self) -> Result<ProblemData> {
        self.preset
            .data(self.kappa, self.final_time, self.side_length)
    }

    pub fn time_grid(&self, eps: f64) -> Result<TimeGrid> {
        let target = match self.time_rule {
            TimeRule::Fixed { nsteps } => return TimeGrid::new(self.final_time, nsteps),
            TimeRule::Linear { scale } => scale * eps,
            TimeRule::Quadratic { scale } => scale * eps * eps,
        };
        let blocks = (self.final_time / (EVAL_TIMES as f64 * target) - 1e-9)
            .ceil()
            .max(1.0);
        TimeGrid::new(self.final_time, EVAL_TIMES * blocks as usize)
    }

    /// Same config with a single `eps`.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut c = self.clone();
        c.eps = vec![eps];
        c.validate().map_err(Error::Config)?;
        Ok(c)
    }

    fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let errs = eps_violations(self.side_length, &self.eps);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

fn eps_violations(side_length: f64, eps: &[f64]) -> Vec<String> {
    let mut errs = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        if !(e > 0.0) || cells_per_side(side_length, e).is_none() {
            errs.push(format!(
                "sweep.eps[{i}]: L/ε not integer (L = {side_length}, ε = {e})"
            ));
        }
        if i > 0 && e >= eps[i - 1] {
            errs.push(format!("sweep.eps[{i}]: list must be strictly decreasing"));
        }
    }
    errs
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>, errs: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out, errs);
            }
        }
        _ if prefix.is_empty() => errs.push("document must be an object".into()),
        _ => {
            if out.insert(prefix.to_string(), v.clone()).is_some() {
                errs.push(format!("{prefix}: duplicate key"));
            }
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn read_document(text: &str) -> std::result::Result<BTreeMap<String, Value>, Vec<String>> {
    let mut out = BTreeMap::new();
    let mut errs = Vec::new();
    if text.trim_start().starts_with('{') {
        match serde_json::from_str::<Value>(text) {
            Ok(v) => flatten("", &v, &mut out, &mut errs),
            Err(e) => errs.push(format!("invalid JSON: {e}")),
        }
    } else {
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errs.push(format!("line {}: expected `key = value`", lineno + 1));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            match value {
                Value::Object(_) => flatten(k, &value, &mut out, &mut errs),
                _ => {
                    if out.insert(k.to_string(), value).is_some() {
                        errs.push(format!("{k}: duplicate key"));
                    }
                }
            }
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

const KEYS: [&str; 16] = [
    "cell.obstacle",
    "cell.side",
    "cell.n",
    "cell.r",
    "cell.clearance",
    "cell.m",
    "domain.L",
    "sweep.eps",
    "mesh.m",
    "problem.kappa",
    "problem.preset",
    "time.T",
    "time.rule",
    "time.scale",
    "time.nsteps",
    "solver.cg_tol",
];

struct Reader<'a> {
    doc: &'a BTreeMap<String, Value>,
    errs: Vec<String>,
}

impl Reader<'_> {
    fn num(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        match self.doc.get(key) {
            None => {
                if default.is_none() {
                    self.errs.push(format!("{key}: required"));
                }
                default
            }
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.errs.push(format!("{key}: expected a number, got {v}"));
                    None
                }
            },
        }
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        let x = self.num(key, default)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.errs.push(format!("{key}: must be positive, got {x}"));
            None
        }
    }

    fn int(&mut self, key: &str, default: Option<usize>, min: usize) -> Option<usize> {
        let x = match self.doc.get(key) {
            None => {
                if default.is_none() {
                    self.errs.push(format!("{key}: required"));
                }
                default?
            }
            Some(v) => match v.as_u64() {
                Some(x) => x as usize,
                None => {
                    self.errs
                        .push(format!("{key}: expected a non-negative integer, got {v}"));
                    return None;
                }
            },
        };
        if x < min {
            self.errs
                .push(format!("{key}: must be at least {min}, got {x}"));
            return None;
        }
        Some(x)
    }

    fn string(&mut self, key: &str, default: &str) -> Option<String> {
        match self.doc.get(key) {
            None => Some(default.to_string()),
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                self.errs.push(format!("{key}: expected a string, got {v}"));
                None
            }
        }
    }

    fn num_list(&mut self, key: &str, default: &[f64]) -> Option<Vec<f64>> {
        match self.doc.get(key) {
            None => Some(default.to_vec()),
            Some(Value::Number(n)) => n.as_f64().map(|x| vec![x]),
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for (i, v) in items.iter().enumerate() {
                    match v.as_f64() {
                        Some(x) => out.push(x),
                        None => self
                            .errs
                            .push(format!("{key}[{i}]: expected a number, got {v}")),
                    }
                }
                if items.is_empty() {
                    self.errs.push(format!("{key}: must not be empty"));
                }
                Some(out)
            }
            Some(v) => {
                self.errs
                    .push(format!("{key}: expected a list of numbers, got {v}"));
                None
            }
        }
    }
}

/// Parses and validates a configuration, reporting every violation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc = read_document(text).map_err(Error::Config)?;
    let mut r = Reader {
        doc: &doc,
        errs: Vec::new(),
    };
    for k in doc.keys() {
        if !KEYS.contains(&k.as_str()) && k != "output.dir" {
            r.errs.push(format!("{k}: unknown key"));
        }
    }

    let obstacle = match r.string("cell.obstacle", "none").as_deref() {
        Some("none") => Some(ObstacleSpec::None),
        Some("square") => r
            .positive("cell.side", None)
            .map(|side| ObstacleSpec::Square { side }),
        Some("ngon") => {
            let n = r.int("cell.n", None, 3);
            let rad = r.positive("cell.r", None);
            n.zip(rad).map(|(n, r)| ObstacleSpec::Ngon { n, r })
        }
        Some(other) => {
            r.errs.push(format!(
                "cell.obstacle: expected none, square or ngon, got {other}"
            ));
            None
        }
        None => None,
    };
    let clearance = r.num("cell.clearance", Some(DEFAULT_CLEARANCE));
    let cell_m = r.int("cell.m", Some(64), 2);
    let side_length = r.positive("domain.L", Some(1.0));
    let eps = r.num_list("sweep.eps", &DEFAULT_EPS);
    let m = r.int("mesh.m", Some(16), 2);
    let kappa = r.positive("problem.kappa", Some(1.0));
    let preset = match r.string("problem.preset", "standard") {
        Some(s) => match DataPreset::parse(&s) {
            Some(p) => Some(p),
            None => {
                let ids: Vec<_> = DataPreset::ALL.iter().map(|p| p.as_str()).collect();
                r.errs.push(format!(
                    "problem.preset: unknown preset {s} (expected one of {})",
                    ids.join(", ")
                ));
                None
            }
        },
        None => None,
    };
    let final_time = r.positive("time.T", Some(0.5));
    let time_rule = match r.string("time.rule", "linear").as_deref() {
        Some("linear") => r
            .positive("time.scale", Some(0.1))
            .map(|scale| TimeRule::Linear { scale }),
        Some("quadratic") => r
            .positive("time.scale", Some(1.0))
            .map(|scale| TimeRule::Quadratic { scale }),
        Some("fixed") => match r.int("time.nsteps", None, 1) {
            Some(n) if n % EVAL_TIMES != 0 => {
                r.errs.push(format!(
                    "time.nsteps: must be a multiple of {EVAL_TIMES}, got {n}"
                ));
                None
            }
            n => n.map(|nsteps| TimeRule::Fixed { nsteps }),
        },
        Some(other) => {
            r.errs.push(format!(
                "time.rule: expected linear, quadratic or fixed, got {other}"
            ));
            None
        }
        None => None,
    };
    let cg_tol = r.positive("solver.cg_tol", Some(crate::fem::DEFAULT_CG_TOL));
    if cg_tol.is_some_and(|t| t >= 1.0) {
        r.errs.push("solver.cg_tol: must be below 1".into());
    }
    let output_dir = match doc.get("output.dir") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => {
            r.errs.push(format!("output.dir: expected a path, got {v}"));
            None
        }
    };

    // Geometry admissibility.
    if let (Some(obstacle), Some(clearance)) = (obstacle, clearance) {
        if !(clearance > 0.0 && clearance < 0.5) {
            r.errs.push(format!(
                "cell.clearance: must lie in (0, 1/2), got {clearance}"
            ));
        } else {
            match obstacle.polygon() {
                Err(e) => r.errs.push(format!("cell: {e}")),
                Ok(None) => {}
                Ok(Some(p)) => {
                    let c = p.clearance();
                    if c < clearance {
                        r.errs.push(format!(
                            "cell: obstacle {} violates clearance {clearance} (distance to the cell boundary {c})",
                            p.label()
                        ));
                    }
                    for (key, mm) in [("mesh.m", m), ("cell.m", cell_m)] {
                        if let Some(mm) = mm {
                            if c < 2.0 / mm as f64 - 1e-12 {
                                r.errs.push(format!(
                                    "{key}: obstacle clearance {c} is below 2/m for m = {mm}"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    if let (Some(l), Some(eps)) = (side_length, &eps) {
        r.errs.extend(eps_violations(l, eps));
    }
    let errs = r.errs;
    let config = match (
        obstacle,
        clearance,
        cell_m,
        side_length,
        eps,
        m,
        kappa,
        preset,
        final_time,
        time_rule,
        cg_tol,
    ) {
        (
            Some(obstacle),
            Some(clearance),
            Some(cell_m),
            Some(side_length),
            Some(eps),
            Some(m),
            Some(kappa),
            Some(preset),
            Some(final_time),
            Some(time_rule),
            Some(cg_tol),
        ) => Some(ExperimentConfig {
            obstacle,
            clearance,
            cell_m,
            side_length,
            eps,
            m,
            kappa,
            preset,
            final_time,
            time_rule,
            cg_tol,
            output_dir,
        }),
        _ => None,
    };
    match config {
        Some(c) if errs.is_empty() => Ok(c),
        _ => Err(Error::Config(errs)),
    }
}
