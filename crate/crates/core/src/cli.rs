//! JSON interchange formats and the `solve`, `verify`, `generate` and
//! `bench` commands behind the `lyapgrad` binary.
//!
//! Exit codes: 0 solved / feasible, 1 input error, 2 not solved,
//! 3 verification found the candidate infeasible.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    enumerate_vertices, generate_triangular_interval, Family, FiniteFamily, IntervalFamily, ProblemSpec,
    TriangularIntervalParams,
};
use crate::functionals::FunctionalChoice;
use crate::solver::{self, InitialGuess, Scheduler, SolverConfig, SolverOutcome, Status, Variant};
use crate::symcone::{matrix_from_rows, matrix_to_rows, SymmetricMatrix};
use crate::verify::{default_cert_tol, verify_finite, verify_interval_via_vertices, Certificate};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_NOT_SOLVED: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyFile {
    Finite(Vec<Rows>),
    Interval { lower: Rows, upper: Rows },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub n: usize,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rows>,
    pub family: FamilyFile,
}

fn square(rows: &Rows, n: usize, what: &str) -> Result<nalgebra::DMatrix<f64>> {
    let m = matrix_from_rows(rows)?;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Schema(format!(
            "{what} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

impl ProblemFile {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let family = match spec.family() {
            Family::Finite(f) => FamilyFile::Finite(f.matrices().iter().map(matrix_to_rows).collect()),
            Family::Interval(f) => FamilyFile::Interval {
                lower: matrix_to_rows(f.lower()),
                upper: matrix_to_rows(f.upper()),
            },
        };
        let q = spec.q();
        let q = (q != &SymmetricMatrix::identity(q.dim())).then(|| q.to_rows());
        Self {
            schema_version: SCHEMA_VERSION,
            n: spec.dim(),
            q,
            family,
        }
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let n = self.n;
        if n == 0 {
            return Err(Error::Schema("n must be at least 1".into()));
        }
        let family: Family = match &self.family {
            FamilyFile::Finite(list) => {
                let matrices = list
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| square(rows, n, &format!("family member {i}")))
                    .collect::<Result<Vec<_>>>()?;
                FiniteFamily::new(matrices)?.into()
            }
            FamilyFile::Interval { lower, upper } => {
                IntervalFamily::new(square(lower, n, "lower bound")?, square(upper, n, "upper bound")?)?.into()
            }
        };
        let q = match &self.q {
            Some(rows) => {
                let m = square(rows, n, "Q")?;
                if m != m.transpose() {
                    return Err(Error::Schema("Q must be symmetric".into()));
                }
                SymmetricMatrix::new(m)?
            }
            None => SymmetricMatrix::identity(n),
        };
        ProblemSpec::new(family, q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub r: f64,
    pub functional: FunctionalChoice,
    pub variant: Variant,
    pub scheduler: Scheduler,
    pub seed: u64,
    pub max_iters: u64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<SymmetricMatrix>,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(c: &SolverConfig) -> Self {
        Self {
            alpha: c.alpha,
            r: c.r,
            functional: c.functional,
            variant: c.variant,
            scheduler: c.scheduler,
            seed: c.seed,
            max_iters: c.max_iters,
            tol: c.feasibility_tol,
            p0: match &c.p0 {
                InitialGuess::Identity => None,
                InitialGuess::Given(p) => Some(p.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub status: Status,
    #[serde(rename = "P")]
    pub p: SymmetricMatrix,
    pub iterations: u64,
    pub corrections: u64,
    /// Absent when the family is too large to certify exhaustively.
    pub worst_residual: Option<f64>,
    #[serde(rename = "lambda_min_P")]
    pub lambda_min_p: f64,
    pub config: ConfigEcho,
}

impl SolutionFile {
    pub fn new(outcome: &SolverOutcome, config: &SolverConfig) -> Result<Self> {
        let lambda_min_p = match &outcome.certificate {
            Some(cert) => cert.lambda_min_p,
            None => outcome.p_final.lambda_min()?,
        };
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            status: outcome.status,
            p: outcome.p_final.clone(),
            iterations: outcome.iterations,
            corrections: outcome.corrections,
            worst_residual: outcome.certificate.as_ref().map(|c| c.worst_residual),
            lambda_min_p,
            config: config.into(),
        })
    }
}

pub fn read_problem(path: &Path) -> Result<ProblemFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Reads a candidate `P` from a solution file or a bare JSON matrix.
pub fn read_candidate(path: &Path) -> Result<SymmetricMatrix> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let matrix = match value {
        serde_json::Value::Object(mut map) => map
            .remove("P")
            .ok_or_else(|| Error::Schema("object has no \"P\" field".into()))?,
        other => other,
    };
    Ok(serde_json::from_value(matrix)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalArg {
    Sqnorm,
    Lambdamax,
}

impl From<FunctionalArg> for FunctionalChoice {
    fn from(f: FunctionalArg) -> Self {
        match f {
            FunctionalArg::Sqnorm => FunctionalChoice::SquaredPositivePart,
            FunctionalArg::Lambdamax => FunctionalChoice::MaxEigenvalue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Plain,
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    Roundrobin,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, value_enum, default_value = "sqnorm")]
    pub functional: FunctionalArg,
    #[arg(long, value_enum, default_value = "plain")]
    pub variant: VariantArg,
    /// Defaults to roundrobin for finite families and random for interval ones.
    #[arg(long, value_enum)]
    pub scheduler: Option<SchedulerArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: u64,
    /// Corrections fire only when v exceeds this.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    /// Initial iterate (bare JSON matrix or a solution file); identity otherwise.
    #[arg(long)]
    pub p0: Option<PathBuf>,
    /// Write the iteration trace as newline-delimited JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Solution file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SolveArgs {
    pub fn new(problem: impl Into<PathBuf>) -> Self {
        Self {
            problem: problem.into(),
            alpha: 1.0,
            r: 1.0,
            functional: FunctionalArg::Sqnorm,
            variant: VariantArg::Plain,
            scheduler: None,
            seed: 0,
            max_iters: 1_000_000,
            tol: 0.0,
            p0: None,
            trace: None,
            out: None,
        }
    }

    pub fn solver_config(&self, family: &Family) -> Result<SolverConfig> {
        let scheduler = match (self.scheduler, family) {
            (Some(SchedulerArg::Roundrobin), _) => Scheduler::RoundRobin,
            (Some(SchedulerArg::Random), _) | (None, Family::Interval(_)) => Scheduler::Randomized,
            (None, Family::Finite(_)) => Scheduler::RoundRobin,
        };
        let p0 = match &self.p0 {
            Some(path) => InitialGuess::Given(read_candidate(path)?),
            None => InitialGuess::Identity,
        };
        Ok(SolverConfig {
            alpha: self.alpha,
            r: self.r,
            functional: self.functional.into(),
            variant: match self.variant {
                VariantArg::Plain => Variant::Plain,
                VariantArg::Projected => Variant::Projected,
            },
            scheduler,
            seed: self.seed,
            max_iters: self.max_iters,
            feasibility_tol: self.tol,
            p0,
            record_trace: self.trace.is_some(),
            ..Default::default()
        })
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let spec = read_problem(&args.problem)?.to_spec()?;
    let config = args.solver_config(spec.family())?;
    let outcome = solver::run(&spec, config.clone())?;

    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        let mut buf = Vec::new();
        for record in trace {
            serde_json::to_writer(&mut buf, record)?;
            buf.push(b'\n');
        }
        fs::write(path, buf)?;
    }
    write_json(&SolutionFile::new(&outcome, &config)?, args.out.as_deref())?;
    Ok(match outcome.status {
        Status::Solved => EXIT_OK,
        Status::MaxItersReached | Status::DegeneracyStall => EXIT_NOT_SOLVED,
    })
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub problem: PathBuf,
    /// Solution file, or a bare JSON matrix.
    pub candidate: PathBuf,
    /// Certification tolerance; defaults to 1e-9·(1 + ‖P‖).
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn certify(spec: &ProblemSpec, p: &SymmetricMatrix, tol: Option<f64>) -> Result<Certificate> {
    let tol = tol.unwrap_or_else(|| default_cert_tol(p));
    match spec.family() {
        Family::Finite(f) => verify_finite(p, f, spec.q(), tol),
        Family::Interval(f) => verify_interval_via_vertices(p, f, spec.q(), tol),
    }
}

pub fn write_report<W: Write>(cert: &Certificate, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{:>10}  {:>24}", "constraint", "residual")?;
    for r in &cert.residuals {
        writeln!(out, "{:>10}  {:>24.16e}", r.constraint, r.value)?;
    }
    writeln!(out, "worst_residual {:.16e}", cert.worst_residual)?;
    writeln!(out, "lambda_min_P {:.16e}", cert.lambda_min_p)?;
    writeln!(out, "cert_tol {:.3e}", cert.cert_tol)?;
    if cert.anomaly {
        writeln!(
            out,
            "warning: residuals within tolerance but P is not positive definite"
        )?;
    }
    writeln!(out, "feasible {}", cert.feasible)
}

pub fn cmd_verify<W: Write>(args: &VerifyArgs, out: &mut W) -> Result<i32> {
    let spec = read_problem(&args.problem)?.to_spec()?;
    let p = read_candidate(&args.candidate)?;
    let cert = certify(&spec, &p, args.tol)?;
    write_report(&cert, out)?;
    Ok(if cert.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    TriangularInterval,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "triangular-interval")]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub diag_lo: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub diag_hi: f64,
    #[arg(long, default_value_t = 0.25)]
    pub halfwidth: f64,
    /// Put the diagonal entries in intervals too.
    #[arg(long)]
    pub interval_diagonal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn params(&self) -> TriangularIntervalParams {
        TriangularIntervalParams {
            n: self.n,
            diag_range: (self.diag_lo, self.diag_hi),
            offdiag_halfwidth: self.halfwidth,
            interval_diagonal: self.interval_diagonal,
        }
    }
}

pub fn generate_problem(params: &TriangularIntervalParams, seed: u64) -> Result<ProblemFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = generate_triangular_interval(params, &mut rng)?;
    Ok(ProblemFile::from_spec(&ProblemSpec::with_identity_q(family)?))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let GenerateKind::TriangularInterval = args.kind;
    let problem = generate_problem(&args.params(), args.seed)?;
    write_json(&problem, args.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: u64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub diag_lo: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub diag_hi: f64,
    #[arg(long, default_value_t = 0.25)]
    pub halfwidth: f64,
    /// Also write the summary as JSON to this path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

impl BenchArgs {
    pub fn new(n: usize, trials: usize) -> Self {
        Self {
            n,
            trials,
            seed: 0,
            max_iters: 1_000_000,
            diag_lo: -2.0,
            diag_hi: -1.0,
            halfwidth: 0.25,
            summary: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTrial {
    pub trial: usize,
    pub seed: u64,
    pub vertices: usize,
    pub status: Status,
    pub iterations: u64,
    pub corrections: u64,
    pub correction_fraction: f64,
    pub worst_residual: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub n: usize,
    pub trials: usize,
    pub solved: usize,
    pub solved_rate: f64,
    pub median_iterations: Option<f64>,
    pub median_correction_fraction: Option<f64>,
    pub wall_seconds: f64,
    pub results: Vec<BenchTrial>,
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

fn bench_trial(args: &BenchArgs, trial: usize) -> Result<BenchTrial> {
    let start = Instant::now();
    let seed = args.seed.wrapping_add(trial as u64);
    let params = TriangularIntervalParams {
        n: args.n,
        diag_range: (args.diag_lo, args.diag_hi),
        offdiag_halfwidth: args.halfwidth,
        interval_diagonal: true,
    };
    let family = generate_triangular_interval(&params, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let vertices = enumerate_vertices(&family)?;
    let spec = ProblemSpec::with_identity_q(vertices)?;
    let config = SolverConfig {
        seed,
        max_iters: args.max_iters,
        ..Default::default()
    };
    let outcome = solver::run(&spec, config)?;
    Ok(BenchTrial {
        trial,
        seed,
        vertices: family.vertex_count()?,
        status: outcome.status,
        iterations: outcome.iterations,
        corrections: outcome.corrections,
        correction_fraction: if outcome.iterations == 0 {
            0.0
        } else {
            outcome.corrections as f64 / outcome.iterations as f64
        },
        worst_residual: outcome.certificate.map(|c| c.worst_residual),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Generates `trials` triangular interval families (diagonal intervaled
/// too) and solves each over its vertices with round-robin scheduling.
pub fn run_bench(args: &BenchArgs) -> Result<BenchSummary> {
    let start = Instant::now();
    let results = (0..args.trials)
        .into_par_iter()
        .map(|t| bench_trial(args, t))
        .collect::<Result<Vec<_>>>()?;
    let solved: Vec<&BenchTrial> = results.iter().filter(|t| t.status == Status::Solved).collect();
    Ok(BenchSummary {
        n: args.n,
        trials: args.trials,
        solved: solved.len(),
        solved_rate: if args.trials == 0 {
            1.0
        } else {
            solved.len() as f64 / args.trials as f64
        },
        median_iterations: median(results.iter().map(|t| t.iterations as f64).collect()),
        median_correction_fraction: median(results.iter().map(|t| t.correction_fraction).collect()),
        wall_seconds: start.elapsed().as_secs_f64(),
        results,
    })
}

pub fn write_bench_table<W: Write>(summary: &BenchSummary, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>5} {:>20} {:>8} {:>18} {:>10} {:>11} {:>9} {:>9}",
        "trial", "seed", "vertices", "status", "iters", "corrections", "fraction", "wall_s"
    )?;
    for t in &summary.results {
        writeln!(
            out,
            "{:>5} {:>20} {:>8} {:>18} {:>10} {:>11} {:>9.4} {:>9.3}",
            t.trial,
            t.seed,
            t.vertices,
            t.status.to_string(),
            t.iterations,
            t.corrections,
            t.correction_fraction,
            t.wall_seconds
        )?;
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    writeln!(
        out,
        "n={} solved {}/{} median_iterations {} median_correction_fraction {} wall {:.3}s",
        summary.n,
        summary.solved,
        summary.trials,
        fmt(summary.median_iterations),
        fmt(summary.median_correction_fraction),
        summary.wall_seconds
    )
}

pub fn cmd_bench<W: Write>(args: &BenchArgs, out: &mut W) -> Result<i32> {
    let summary = run_bench(args)?;
    write_bench_table(&summary, out)?;
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    if let Some(path) = &args.summary {
        write_json(&summary, Some(path))?;
    }
    Ok(if summary.solved == summary.trials {
        EXIT_OK
    } else {
        EXIT_NOT_SOLVED
    })
}
