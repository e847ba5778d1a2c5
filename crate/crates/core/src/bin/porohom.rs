use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use porohom::cell::{compute_effective_tensor, HomogenizedCoefficients};
use porohom::dns::{run_dns_with, DnsOperators};
use porohom::fem::CgOptions;
use porohom::geometry::{build_perforated_mesh, CellGeometry};
use porohom::harness::output::{
    read_tensor, trace_file_name, write_report, write_tensor, write_trace,
};
use porohom::harness::{
    parse_config, run_convergence_study, DataPreset, ExperimentConfig, StudyStatus,
};
use porohom::limit::{run_limit_with, LimitProblem};
use porohom::problem::TimeGrid;
use porohom::{Error, Result, StepOptions, StepRecord};

#[derive(Parser)]
#[command(
    name = "porohom",
    version,
    about = "Homogenization toolkit for perforated domains"
)]
struct Cli {
    /// Output directory (overrides output.dir of the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the ε sweep.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; has no numerical effect.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the cell problems and write tensor.csv.
    Cell {
        config: PathBuf,
        /// Cell mesh subdivisions (default: cell.m).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Run the perforated simulation for one ε.
    Dns {
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the homogenized problem.
    Limit {
        config: PathBuf,
        /// Stored tensor record; computed from the config when absent.
        #[arg(long)]
        tensor: Option<PathBuf>,
        /// ε whose background grid fixes the mesh (default: smallest in the sweep).
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the full ε sweep.
    Converge { config: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Subdivisions per cell.
    #[arg(long)]
    m: Option<usize>,
    /// Time step; rounded down so that it divides T.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    final_time: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// zero, standard, decay or unit_source.
    #[arg(long)]
    preset: Option<String>,
    /// Trace CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn out_dir(cli_out: &Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn apply_run_args(config: &mut ExperimentConfig, run: &RunArgs) -> Result<Option<TimeGrid>> {
    if let Some(m) = run.m {
        config.m = m;
    }
    if let Some(t) = run.final_time {
        config.final_time = t;
    }
    if let Some(k) = run.kappa {
        config.kappa = k;
    }
    if let Some(p) = &run.preset {
        config.preset =
            DataPreset::parse(p).ok_or_else(|| Error::Argument(format!("unknown preset {p}")))?;
    }
    run.dt
        .map(|dt| {
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::Argument(format!("--dt must be positive, got {dt}")));
            }
            TimeGrid::new(
                config.final_time,
                (config.final_time / dt - 1e-9).ceil().max(1.0) as usize,
            )
        })
        .transpose()
}

fn trace_summary(trace: &[StepRecord]) -> (f64, f64, f64) {
    let last = trace.last().expect("initial record");
    let max_res = trace.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    (last.l2_norm, last.energy, max_res)
}

fn cell(cli: &Cli, config: &Path, m: Option<usize>) -> Result<()> {
    let cfg = load_config(config)?;
    let m = m.unwrap_or(cfg.cell_m);
    let t = compute_effective_tensor(&cfg.cell()?, m, &CgOptions::with_tol(cfg.cg_tol))?;
    println!("obstacle {}", t.obstacle);
    println!("m {m}");
    println!("theta {}", t.theta);
    println!("sigma {}", t.sigma);
    println!("q11 {}", t.q[0][0]);
    println!("q12 {}", t.q[0][1]);
    println!("q21 {}", t.q[1][0]);
    println!("q22 {}", t.q[1][1]);
    for c in &t.correctors {
        println!("cg_iterations_{} {}", c.direction, c.iterations);
        println!("residual_{} {:e}", c.direction, c.residual);
    }
    let dir = out_dir(&cli.out, &cfg);
    fs::create_dir_all(&dir)?;
    write_tensor(&dir.join("tensor.csv"), &t)?;
    Ok(())
}

fn dns(cli: &Cli, config: &Path, eps: f64, run: &RunArgs) -> Result<()> {
    let mut cfg = load_config(config)?.with_eps(eps)?;
    let grid = match apply_run_args(&mut cfg, run)? {
        Some(g) => g,
        None => cfg.time_grid(eps)?,
    };
    let cell = cfg.cell()?;
    let mesh = Arc::new(build_perforated_mesh(&cfg.domain(eps)?, &cell, cfg.m)?);
    let data = cfg.data()?;
    let opts = StepOptions {
        cg: CgOptions::with_tol(cfg.cg_tol),
        store_stride: grid.nsteps(),
    };
    let sol = run_dns_with(mesh.clone(), &data, &grid, eps, &opts)?;
    let ops = DnsOperators::assemble(&mesh, eps, data.kappa())?;
    let (l2, energy, max_res) = trace_summary(sol.records());
    println!("eps {eps}");
    println!("h {}", mesh.h());
    println!("vertices {}", mesh.num_vertices());
    println!("nsteps {}", grid.nsteps());
    println!("boundary_measure {}", ops.scaled_boundary_measure());
    println!("final_l2_norm {l2}");
    println!("final_energy {energy}");
    println!("max_abs_residual {max_res:e}");
    let path = run
        .csv
        .clone()
        .unwrap_or_else(|| out_dir(&cli.out, &cfg).join(trace_file_name(eps)));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    write_trace(&path, sol.records())
}

fn limit(
    cli: &Cli,
    config: &Path,
    tensor: Option<&Path>,
    eps: Option<f64>,
    run: &RunArgs,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    let explicit = apply_run_args(&mut cfg, run)?;
    let eps = match eps {
        Some(e) => e,
        None => *cfg
            .eps
            .last()
            .ok_or_else(|| Error::config("sweep.eps: empty"))?,
    };
    let cfg = cfg.with_eps(eps)?;
    let grid = match explicit {
        Some(g) => g,
        None => cfg.time_grid(eps)?,
    };
    let coeffs: HomogenizedCoefficients = match tensor {
        Some(p) => read_tensor(p)?,
        None => {
            compute_effective_tensor(&cfg.cell()?, cfg.cell_m, &CgOptions::with_tol(cfg.cg_tol))?
                .coefficients()
        }
    };
    let mesh = Arc::new(build_perforated_mesh(
        &cfg.domain(eps)?,
        &CellGeometry::empty(),
        cfg.m,
    )?);
    let problem = LimitProblem::new(coeffs, cfg.data()?, mesh.clone(), grid)?;
    let opts = StepOptions {
        cg: CgOptions::with_tol(cfg.cg_tol),
        store_stride: grid.nsteps(),
    };
    let sol = run_limit_with(&problem, &opts)?;
    let (l2, energy, max_res) = trace_summary(sol.records());
    println!("theta {}", coeffs.theta);
    println!("sigma {}", coeffs.sigma);
    println!("h {}", mesh.h());
    println!("vertices {}", mesh.num_vertices());
    println!("nsteps {}", grid.nsteps());
    println!("final_l2_norm {l2}");
    println!("final_energy {energy}");
    println!("max_abs_residual {max_res:e}");
    let path = run
        .csv
        .clone()
        .unwrap_or_else(|| out_dir(&cli.out, &cfg).join("trace_limit.csv"));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    write_trace(&path, sol.records())
}

fn converge(cli: &Cli, config: &Path) -> Result<bool> {
    let cfg = load_config(config)?;
    let report = run_convergence_study(&cfg);
    if let Some(t) = &report.tensor {
        println!(
            "theta {} sigma {} q11 {} q12 {} q22 {}",
            t.theta, t.sigma, t.q[0][0], t.q[0][1], t.q[1][1]
        );
    }
    println!(
        "{:>10} {:>10} {:>8} {:>14} {:>14} {:>9}",
        "eps", "h", "dofs", "err_final", "rel_final", "runtime"
    );
    for r in &report.records {
        println!(
            "{:>10} {:>10.4e} {:>8} {:>14.6e} {:>14.6e} {:>9.2}",
            r.eps, r.h, r.dofs, r.error_l2_final, r.rel_error_l2_final, r.runtime
        );
    }
    let rates = report.observed_rates();
    if !rates.is_empty() {
        let s: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
        println!("observed rates {}", s.join(" "));
    }
    println!("verdict {}", report.verdict.as_str());
    let dir = out_dir(&cli.out, &cfg);
    for p in write_report(&dir, &report)? {
        println!("wrote {}", p.display());
    }
    match &report.status {
        StudyStatus::Complete => Ok(true),
        StudyStatus::Incomplete(e) => {
            eprintln!("study incomplete: {e}");
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Cell { config, m } => cell(&cli, config, *m).map(|_| true),
        Command::Dns { config, eps, run } => dns(&cli, config, *eps, run).map(|_| true),
        Command::Limit {
            config,
            tensor,
            eps,
            run,
        } => limit(&cli, config, tensor.as_deref(), *eps, run).map(|_| true),
        Command::Converge { config } => converge(&cli, config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(Error::Config(list)) => {
            eprintln!("error: invalid configuration");
            for item in list {
                eprintln!("  {item}");
            }
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
