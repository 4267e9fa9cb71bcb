//! The `fracvar` command line: configuration, report files and exit codes.
//!
//! Exit codes: 0 converged, 1 configuration or I/O error, 2 numerical
//! non-convergence. Diagnostics go to stderr only; no files are written when
//! the configuration is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Error;
use crate::operators::Grid;
use crate::problem::{builtin_problem, Boundary, BoundarySpec, Params, Problem};
use crate::residuals::ResidualOptions;
use crate::solver::{
    solve_direct, study, ConvergenceTable, Method, Reference, SolveOptions, SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fracvar",
    version,
    about = "Direct-method solver for Caputo fractional variational problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem; writes solution.csv and report.json.
    Solve(RunArgs),
    /// Solve on several grids; writes convergence.csv.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Registry problem name.
    #[arg(long, value_name = "NAME")]
    pub problem: Option<String>,
    /// Configuration entry, repeatable; overrides the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_name = "INT")]
    pub n: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated grid sizes, e.g. "100,200,400".
    #[arg(long, value_name = "N1,N2,...")]
    pub grids: Option<String>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem_name: String,
    /// Real parameters passed to the registry, `n` included when given.
    pub params: Params,
    pub left: Option<BoundaryOverride>,
    pub right: Option<BoundaryOverride>,
    pub solver: SolveOptions,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub seed: u64,
    pub grid_sizes: Vec<usize>,
    pub reference: Option<Reference>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundaryOverride {
    Fixed(f64),
    Free(FreeTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeTag {
    Free,
}

impl BoundaryOverride {
    fn boundary(self) -> Boundary {
        match self {
            BoundaryOverride::Fixed(v) => Boundary::Fixed(v),
            BoundaryOverride::Free(_) => Boundary::Free,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn as_real(key: &str, v: &Value) -> Result<f64, Error> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| config_err(format!("'{key}' must be a finite number, got {v}")))
}

fn as_count(key: &str, v: &Value) -> Result<u64, Error> {
    v.as_u64()
        .or_else(|| {
            v.as_f64()
                .filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x < 2f64.powi(53))
                .map(|x| x as u64)
        })
        .ok_or_else(|| config_err(format!("'{key}' must be a non-negative integer, got {v}")))
}

fn parse_grids(text: &str) -> Result<Vec<usize>, Error> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| config_err(format!("invalid grid size '{}'", s.trim())))
        })
        .collect()
}

#[derive(Debug, Default)]
struct Builder {
    problem_name: Option<String>,
    params: Params,
    left: Option<BoundaryOverride>,
    right: Option<BoundaryOverride>,
    solver: SolveOptions,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    grid_sizes: Option<Vec<usize>>,
    reference: Option<Reference>,
}

impl Builder {
    fn set(&mut self, key: &str, v: &Value) -> Result<(), Error> {
        let text = || {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| config_err(format!("'{key}' must be a string, got {v}")))
        };
        match key {
            "problem_name" => self.problem_name = Some(text()?),
            "output_dir" => self.output_dir = Some(PathBuf::from(text()?)),
            "seed" => self.seed = Some(as_count(key, v)?),
            "n" => {
                let n = as_count(key, v)?;
                self.params.insert("n".into(), n as f64);
            }
            "grid_sizes" => {
                self.grid_sizes = Some(match v {
                    Value::Array(items) => items
                        .iter()
                        .map(|x| as_count(key, x).map(|n| n as usize))
                        .collect::<Result<_, _>>()?,
                    Value::String(s) => parse_grids(s)?,
                    _ => return Err(config_err(format!("'grid_sizes' must be a list, got {v}"))),
                })
            }
            "left" | "right" => {
                let b = match v {
                    Value::String(s) if s == "free" => BoundaryOverride::Free(FreeTag::Free),
                    _ => BoundaryOverride::Fixed(as_real(key, v).map_err(|_| {
                        config_err(format!("'{key}' must be \"free\" or a number, got {v}"))
                    })?),
                };
                if key == "left" {
                    self.left = Some(b);
                } else {
                    self.right = Some(b);
                }
            }
            "reference" => {
                self.reference = match text()?.as_str() {
                    "classical_candidate" => Some(Reference::ClassicalCandidate),
                    "none" => None,
                    other => return Err(config_err(format!("unknown reference '{other}'"))),
                }
            }
            "method" => {
                self.solver.method = match text()?.as_str() {
                    "newton" => Method::Newton,
                    "steepest_descent" => Method::SteepestDescent,
                    other => return Err(config_err(format!("unknown method '{other}'"))),
                }
            }
            "max_iters" => self.solver.max_iters = as_count(key, v)? as usize,
            "grad_tol" => self.solver.grad_tol = as_real(key, v)?,
            "step_init" => self.solver.step_init = as_real(key, v)?,
            "armijo_c" => self.solver.armijo_c = as_real(key, v)?,
            "backtrack_factor" => self.solver.backtrack_factor = as_real(key, v)?,
            "perturbation" => self.solver.perturbation = as_real(key, v)?,
            _ => {
                let x = as_real(key, v)?;
                self.params.insert(key.to_owned(), x);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, Error> {
        let problem_name = self
            .problem_name
            .ok_or_else(|| config_err("no problem given (use --problem or 'problem_name')"))?;
        let seed = self.seed.unwrap_or(0);
        let solver = SolveOptions {
            seed,
            ..self.solver
        };
        solver.validate()?;
        Ok(RunConfig {
            problem_name,
            params: self.params,
            left: self.left,
            right: self.right,
            solver,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            seed,
            grid_sizes: self.grid_sizes.unwrap_or_default(),
            reference: self.reference,
        })
    }
}

/// `--set` values are read as JSON when possible, otherwise as plain strings.
fn flag_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()))
}

impl RunConfig {
    /// Merges the optional config file with command-line flags; flags win.
    pub fn from_args(args: &RunArgs, grids: Option<&str>) -> Result<Self, Error> {
        let mut b = Builder::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let obj: Map<String, Value> = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            for (k, v) in &obj {
                b.set(k, v)?;
            }
        }
        for entry in &args.set {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got '{entry}'")))?;
            b.set(k.trim(), &flag_value(v.trim()))?;
        }
        if let Some(p) = &args.problem {
            b.problem_name = Some(p.clone());
        }
        if let Some(n) = args.n {
            b.params.insert("n".into(), n as f64);
        }
        if let Some(out) = &args.out {
            b.output_dir = Some(out.clone());
        }
        if let Some(seed) = args.seed {
            b.seed = Some(seed);
        }
        if let Some(g) = grids {
            b.grid_sizes = Some(parse_grids(g)?);
        }
        b.finish()
    }

    /// The registry problem with boundary overrides applied.
    pub fn problem(&self, params: &Params) -> Result<Problem, Error> {
        let p = builtin_problem(&self.problem_name, params)?;
        if self.left.is_none() && self.right.is_none() {
            return Ok(p);
        }
        let bc = p.boundary();
        p.with_boundary(BoundarySpec {
            left: self.left.map_or(bc.left, BoundaryOverride::boundary),
            right: self.right.map_or(bc.right, BoundaryOverride::boundary),
        })
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn solution_csv(r: &SolveReport) -> String {
    let y = &r.minimizer;
    let grid = y.grid();
    let (lo, hi) = ResidualOptions::default().admissible(grid.n());
    let el = &r.residuals.el_pointwise;
    let mut out = String::from("x,y,el_residual\n");
    for i in 0..grid.len() {
        let shown = (lo..=hi).contains(&i) && !el.is_singular(i);
        let res = if shown {
            real(el.values()[i])
        } else {
            String::new()
        };
        let _ = writeln!(out, "{},{},{}", real(grid.x(i)), real(y.values()[i]), res);
    }
    out
}

fn report_json(cfg: &RunConfig, r: &SolveReport) -> String {
    #[derive(Serialize)]
    struct Report<'a> {
        j_value: f64,
        grad_norm: f64,
        el_norm: f64,
        nbc_left: Option<f64>,
        nbc_right: Option<f64>,
        iterations: usize,
        converged: bool,
        config: &'a RunConfig,
        version: &'static str,
    }
    let report = Report {
        j_value: r.j_value,
        grad_norm: r.grad_norm,
        el_norm: r.el_residual_norm,
        nbc_left: r.nbc_left_residual,
        nbc_right: r.nbc_right_residual,
        iterations: r.iterations,
        converged: r.converged,
        config: cfg,
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report is serializable");
    s.push('\n');
    s
}

fn convergence_csv(t: &ConvergenceTable) -> String {
    let mut out = String::from("n,j_value,el_norm,nbc_left,nbc_right,max_dev_from_reference\n");
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            real(r.j_value),
            real(r.el_norm),
            opt_real(r.nbc_left),
            opt_real(r.nbc_right),
            opt_real(r.max_dev_from_reference)
        );
    }
    out
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn report(self) -> i32 {
        match self {
            Failure::Config(m) => {
                eprintln!("fracvar: {m}");
                EXIT_CONFIG
            }
            Failure::Numerical(m) => {
                eprintln!("fracvar: {m}");
                EXIT_NOT_CONVERGED
            }
        }
    }
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_solve(args: &RunArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(args, None).map_err(|e| Failure::Config(e.to_string()))?;
    let problem = cfg
        .problem(&cfg.params)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let report =
        solve_direct(&problem, &cfg.solver).map_err(|e| Failure::Numerical(e.to_string()))?;
    write_files(
        &cfg.output_dir,
        &[
            ("solution.csv", solution_csv(&report)),
            ("report.json", report_json(&cfg, &report)),
        ],
    )?;
    println!(
        "J = {:.12e}  |grad| = {:.3e}  el_norm = {:.3e}  iterations = {}",
        report.j_value, report.grad_norm, report.el_residual_norm, report.iterations
    );
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "fracvar: solver stopped after {} iterations with |grad| = {:.3e} > {:.3e}",
            report.iterations, report.grad_norm, cfg.solver.grad_tol
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn run_convergence(args: &ConvergenceArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(&args.run, args.grids.as_deref())
        .map_err(|e| Failure::Config(e.to_string()))?;
    if cfg.grid_sizes.is_empty() {
        return Err(Failure::Config(
            "no grid sizes given (use --grids or 'grid_sizes')".into(),
        ));
    }
    let mut jobs = Vec::with_capacity(cfg.grid_sizes.len());
    for &n in &cfg.grid_sizes {
        let mut params: BTreeMap<String, f64> = cfg.params.clone();
        params.insert("n".into(), n as f64);
        let build = || -> Result<_, Error> {
            let problem = cfg.problem(&params)?;
            let grid: Grid = *problem.grid();
            let reference = cfg.reference.map(|r| r.sample(&params, grid)).transpose()?;
            Ok((problem, reference))
        };
        jobs.push(build().map_err(|e| Failure::Config(e.to_string()))?);
    }
    let table = study(&jobs, &cfg.solver).map_err(|e| Failure::Numerical(e.to_string()))?;
    write_files(
        &cfg.output_dir,
        &[("convergence.csv", convergence_csv(&table))],
    )?;
    match table.residuals_monotone() {
        Some(m) => println!(
            "residual norms non-increasing under refinement: {}",
            if m { "yes" } else { "no" }
        ),
        None => println!("residual monotonicity not assessed"),
    }
    if table.all_converged() {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<String> = table
            .rows
            .iter()
            .filter(|r| !r.converged)
            .map(|r| r.n.to_string())
            .collect();
        eprintln!("fracvar: no convergence for n = {}", failed.join(", "));
        Ok(EXIT_NOT_CONVERGED)
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Convergence(a) => run_convergence(a),
    };
    outcome.unwrap_or_else(Failure::report)
}
