//! Python bindings for `lyapgrad_core`.
//!
//! Matrices cross the boundary as lists of row lists of floats. Problems are
//! held in an opaque `Problem` object that can be built from matrices, parsed
//! from the JSON problem format, or generated.

use lyapgrad_core::cli::{certify, generate_problem, run_bench, BenchArgs, ProblemFile, SolutionFile};
use lyapgrad_core::symcone::{matrix_from_rows, matrix_to_rows};
use lyapgrad_core::{
    enumerate_vertices, Error, Family, FiniteFamily, FunctionalChoice, InitialGuess, IntervalFamily, ProblemSpec,
    Scheduler, SolverConfig, SolverOutcome, SymmetricMatrix, TriangularIntervalParams, Variant,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn sym(rows: &Rows) -> PyResult<SymmetricMatrix> {
    SymmetricMatrix::from_rows(rows).map_err(to_py)
}

fn sym_or_identity(rows: Option<&Rows>, n: usize) -> PyResult<SymmetricMatrix> {
    match rows {
        Some(r) => sym(r),
        None => Ok(SymmetricMatrix::identity(n)),
    }
}

fn functional(name: &str) -> PyResult<FunctionalChoice> {
    name.parse().map_err(to_py)
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Orthogonal projection of a symmetric matrix onto the PSD cone.
#[pyfunction]
fn psd_projection(r: Rows) -> PyResult<Rows> {
    Ok(lyapgrad_core::psd_projection(&sym(&r)?).map_err(to_py)?.to_rows())
}

/// Negative semidefinite part, `R - R⁺`.
#[pyfunction]
fn nsd_part(r: Rows) -> PyResult<Rows> {
    Ok(lyapgrad_core::nsd_part(&sym(&r)?).map_err(to_py)?.to_rows())
}

#[pyfunction]
fn frobenius_norm(r: Rows) -> PyResult<f64> {
    Ok(sym(&r)?.frobenius_norm())
}

/// Eigenvalues in descending order and the matching eigenvectors as columns.
#[pyfunction]
fn eigh(r: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let eig = lyapgrad_core::sym_eigendecompose(&sym(&r)?).map_err(to_py)?;
    Ok((eig.eigenvalues.as_slice().to_vec(), matrix_to_rows(&eig.eigenvectors)))
}

#[pyfunction]
fn hurwitz_check(a: Rows) -> PyResult<bool> {
    lyapgrad_core::hurwitz_check(&matrix_from_rows(&a).map_err(to_py)?).map_err(to_py)
}

/// `λmax(PA + AᵀP + Q)`.
#[pyfunction]
fn residual(p: Rows, a: Rows, q: Rows) -> PyResult<f64> {
    let a = matrix_from_rows(&a).map_err(to_py)?;
    lyapgrad_core::residual(&sym(&p)?, &a, &sym(&q)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, a, q, functional="sqnorm"))]
fn v_eval(p: Rows, a: Rows, q: Rows, functional: &str) -> PyResult<f64> {
    let choice = self::functional(functional)?;
    let a = matrix_from_rows(&a).map_err(to_py)?;
    lyapgrad_core::v_eval(&sym(&p)?, &a, &sym(&q)?, choice).map_err(to_py)
}

/// Value and gradient with respect to `P`; raises on a repeated top eigenvalue
/// under `lambdamax`.
#[pyfunction]
#[pyo3(signature = (p, a, q, functional="sqnorm"))]
fn v_grad(p: Rows, a: Rows, q: Rows, functional: &str) -> PyResult<(f64, Rows)> {
    let choice = self::functional(functional)?;
    let a = matrix_from_rows(&a).map_err(to_py)?;
    let report = lyapgrad_core::v_grad(&sym(&p)?, &a, &sym(&q)?, choice).map_err(to_py)?;
    if report.degenerate_top_eigenvalue {
        return Err(PyValueError::new_err(
            "top eigenvalue is repeated; gradient is not unique",
        ));
    }
    Ok((report.value, report.gradient.to_rows()))
}

#[pyfunction]
fn inner_ball_bound(p: Rows, family: Vec<Rows>, q: Rows, gamma: f64) -> PyResult<f64> {
    let family = finite_family(&family)?;
    lyapgrad_core::inner_ball_bound(&sym(&p)?, &family, &sym(&q)?, gamma).map_err(to_py)
}

fn finite_family(matrices: &[Rows]) -> PyResult<FiniteFamily> {
    let matrices = matrices
        .iter()
        .map(|m| matrix_from_rows(m))
        .collect::<lyapgrad_core::Result<Vec<_>>>()
        .map_err(to_py)?;
    FiniteFamily::new(matrices).map_err(to_py)
}

fn interval_family(lower: &Rows, upper: &Rows) -> PyResult<IntervalFamily> {
    let lower = matrix_from_rows(lower).map_err(to_py)?;
    let upper = matrix_from_rows(upper).map_err(to_py)?;
    IntervalFamily::new(lower, upper).map_err(to_py)
}

/// All vertices of the box `[lower, upper]`, in bit-pattern order.
#[pyfunction]
fn vertices(lower: Rows, upper: Rows) -> PyResult<Vec<Rows>> {
    let family = enumerate_vertices(&interval_family(&lower, &upper)?).map_err(to_py)?;
    Ok(family.matrices().iter().map(matrix_to_rows).collect())
}

/// A family of Hurwitz matrices together with `Q`.
#[pyclass(frozen, name = "Problem")]
struct PyProblem {
    spec: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (matrices, q=None))]
    fn finite(matrices: Vec<Rows>, q: Option<Rows>) -> PyResult<Self> {
        let family = finite_family(&matrices)?;
        let q = sym_or_identity(q.as_ref(), family.dim())?;
        Ok(Self {
            spec: ProblemSpec::new(family, q).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (lower, upper, q=None))]
    fn interval(lower: Rows, upper: Rows, q: Option<Rows>) -> PyResult<Self> {
        let family = interval_family(&lower, &upper)?;
        let q = sym_or_identity(q.as_ref(), lower.len())?;
        Ok(Self {
            spec: ProblemSpec::new(family, q).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| to_py(e.into()))?;
        Ok(Self {
            spec: file.to_spec().map_err(to_py)?,
        })
    }

    /// Random upper-triangular interval family with Hurwitz vertices.
    #[staticmethod]
    #[pyo3(signature = (n=4, seed=0, diag_lo=-2.0, diag_hi=-1.0, halfwidth=0.25, interval_diagonal=false))]
    fn generate(
        n: usize,
        seed: u64,
        diag_lo: f64,
        diag_hi: f64,
        halfwidth: f64,
        interval_diagonal: bool,
    ) -> PyResult<Self> {
        let params = TriangularIntervalParams {
            n,
            diag_range: (diag_lo, diag_hi),
            offdiag_halfwidth: halfwidth,
            interval_diagonal,
        };
        let file = generate_problem(&params, seed).map_err(to_py)?;
        Ok(Self {
            spec: file.to_spec().map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&ProblemFile::from_spec(&self.spec)).map_err(|e| to_py(e.into()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.dim()
    }

    #[getter]
    fn q(&self) -> Rows {
        self.spec.q().to_rows()
    }

    #[getter]
    fn is_interval(&self) -> bool {
        matches!(self.spec.family(), Family::Interval(_))
    }

    /// Number of family members, or of box vertices for an interval family.
    fn constraint_count(&self) -> PyResult<usize> {
        match self.spec.family() {
            Family::Finite(f) => Ok(f.len()),
            Family::Interval(f) => f.vertex_count().map_err(to_py),
        }
    }

    fn __repr__(&self) -> String {
        let kind = if self.is_interval() { "interval" } else { "finite" };
        format!("Problem(n={}, {kind})", self.spec.dim())
    }
}

#[pyclass(frozen, name = "Certificate")]
struct PyCertificate {
    #[pyo3(get)]
    p: Rows,
    #[pyo3(get)]
    residuals: Vec<f64>,
    #[pyo3(get)]
    worst_residual: f64,
    #[pyo3(get)]
    lambda_min_p: f64,
    #[pyo3(get)]
    cert_tol: f64,
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    anomaly: bool,
}

impl From<&lyapgrad_core::Certificate> for PyCertificate {
    fn from(c: &lyapgrad_core::Certificate) -> Self {
        Self {
            p: c.p.to_rows(),
            residuals: c.residuals.iter().map(|r| r.value).collect(),
            worst_residual: c.worst_residual,
            lambda_min_p: c.lambda_min_p,
            cert_tol: c.cert_tol,
            feasible: c.feasible,
            anomaly: c.anomaly,
        }
    }
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(feasible={}, worst_residual={:e}, constraints={})",
            self.feasible,
            self.worst_residual,
            self.residuals.len()
        )
    }
}

#[pyclass(frozen, name = "Outcome")]
struct PyOutcome {
    outcome: SolverOutcome,
    config: SolverConfig,
}

#[pymethods]
impl PyOutcome {
    #[getter]
    fn status(&self) -> String {
        self.outcome.status.to_string()
    }

    #[getter]
    fn solved(&self) -> bool {
        self.outcome.status == lyapgrad_core::Status::Solved
    }

    #[getter]
    fn p(&self) -> Rows {
        self.outcome.p_final.to_rows()
    }

    #[getter]
    fn iterations(&self) -> u64 {
        self.outcome.iterations
    }

    #[getter]
    fn corrections(&self) -> u64 {
        self.outcome.corrections
    }

    #[getter]
    fn certificate(&self) -> Option<PyCertificate> {
        self.outcome.certificate.as_ref().map(PyCertificate::from)
    }

    /// Per-iteration records as dicts, or `None` when tracing was off.
    #[getter]
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        let Some(trace) = &self.outcome.trace else {
            return Ok(None);
        };
        let text = serde_json::to_string(trace).map_err(|e| to_py(e.into()))?;
        json_loads(py, &text).map(Some)
    }

    /// The solution file the command-line `solve` would write.
    fn to_json(&self) -> PyResult<String> {
        let file = SolutionFile::new(&self.outcome, &self.config).map_err(to_py)?;
        serde_json::to_string_pretty(&file).map_err(|e| to_py(e.into()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Outcome(status={}, iterations={}, corrections={})",
            self.outcome.status, self.outcome.iterations, self.outcome.corrections
        )
    }
}

/// Run the gradient iteration on `problem`. The scheduler defaults to
/// round-robin for finite families and random sampling for interval ones.
#[pyfunction]
#[pyo3(signature = (
    problem, *, alpha=1.0, r=1.0, functional="sqnorm", variant="plain", scheduler=None,
    seed=0, max_iters=1_000_000, tol=0.0, p0=None, trace=false
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    alpha: f64,
    r: f64,
    functional: &str,
    variant: &str,
    scheduler: Option<&str>,
    seed: u64,
    max_iters: u64,
    tol: f64,
    p0: Option<Rows>,
    trace: bool,
) -> PyResult<PyOutcome> {
    let variant = match variant {
        "plain" => Variant::Plain,
        "projected" => Variant::Projected,
        other => return Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    };
    let scheduler = match (scheduler, problem.spec.family()) {
        (Some("roundrobin"), _) => Scheduler::RoundRobin,
        (Some("random"), _) | (None, Family::Interval(_)) => Scheduler::Randomized,
        (None, Family::Finite(_)) => Scheduler::RoundRobin,
        (Some(other), _) => return Err(PyValueError::new_err(format!("unknown scheduler {other:?}"))),
    };
    let config = SolverConfig {
        alpha,
        r,
        functional: self::functional(functional)?,
        variant,
        scheduler,
        seed,
        max_iters,
        feasibility_tol: tol,
        p0: match p0 {
            Some(rows) => InitialGuess::Given(sym(&rows)?),
            None => InitialGuess::Identity,
        },
        record_trace: trace,
        ..Default::default()
    };
    let spec = &problem.spec;
    let outcome = py.detach(|| lyapgrad_core::run(spec, config.clone())).map_err(to_py)?;
    Ok(PyOutcome { outcome, config })
}

/// Certify `p` against every member (or every vertex) of `problem`.
#[pyfunction]
#[pyo3(signature = (problem, p, tol=None))]
fn verify(py: Python<'_>, problem: &PyProblem, p: Rows, tol: Option<f64>) -> PyResult<PyCertificate> {
    let p = sym(&p)?;
    let spec = &problem.spec;
    let cert = py.detach(|| certify(spec, &p, tol)).map_err(to_py)?;
    Ok(PyCertificate::from(&cert))
}

/// Solve generated triangular interval problems over their vertices and
/// return the summary as a dict.
#[pyfunction(name = "bench")]
#[pyo3(signature = (n=4, trials=10, seed=0, max_iters=1_000_000, diag_lo=-2.0, diag_hi=-1.0, halfwidth=0.25))]
#[allow(clippy::too_many_arguments)]
fn run_trials<'py>(
    py: Python<'py>,
    n: usize,
    trials: usize,
    seed: u64,
    max_iters: u64,
    diag_lo: f64,
    diag_hi: f64,
    halfwidth: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let args = BenchArgs {
        seed,
        max_iters,
        diag_lo,
        diag_hi,
        halfwidth,
        ..BenchArgs::new(n, trials)
    };
    let summary = py.detach(|| run_bench(&args)).map_err(to_py)?;
    let text = serde_json::to_string(&summary).map_err(|e| to_py(e.into()))?;
    json_loads(py, &text)
}

#[pymodule]
fn lyapgrad(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(psd_projection, m)?)?;
    m.add_function(wrap_pyfunction!(nsd_part, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_norm, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(hurwitz_check, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(v_eval, m)?)?;
    m.add_function(wrap_pyfunction!(v_grad, m)?)?;
    m.add_function(wrap_pyfunction!(inner_ball_bound, m)?)?;
    m.add_function(wrap_pyfunction!(vertices, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    Ok(())
}
