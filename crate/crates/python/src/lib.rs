//! Python bindings for the projected-search solvers.

use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use projsearch_core::bench::{self, Limits, Metric, RunRecord, RunStatus, Solver};
use projsearch_core::termination::SolverStatus;
use projsearch_core::{problems, BoxProblem, Bounds, Error, Objective, SolverReport};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Dimension { .. }
        | Error::InvalidBounds { .. }
        | Error::InvalidParameter(_)
        | Error::UnknownProblem(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn bounds(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Bounds> {
    Bounds::new(lower, upper).map_err(to_py)
}

/// Objective backed by Python callables. Exceptions and non-numeric
/// results surface as NaN, which the solvers treat as evaluation failures.
struct PyObjective {
    f: Py<PyAny>,
    grad: Py<PyAny>,
    hess: Option<Py<PyAny>>,
}

impl Objective for PyObjective {
    fn value(&self, x: &[f64]) -> f64 {
        Python::attach(|py| {
            self.f
                .call1(py, (x.to_vec(),))
                .and_then(|v| v.bind(py).extract::<f64>())
                .unwrap_or(f64::NAN)
        })
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let g = Python::attach(|py| {
            self.grad
                .call1(py, (x.to_vec(),))
                .and_then(|v| v.bind(py).extract::<Vec<f64>>())
        });
        match g {
            Ok(g) if g.len() == out.len() => out.copy_from_slice(&g),
            _ => out.fill(f64::NAN),
        }
    }

    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let h = self.hess.as_ref()?;
        let n = x.len();
        // Either a list of rows or a flat row-major list.
        let dense = Python::attach(|py| {
            let v = h.call1(py, (x.to_vec(),)).ok()?;
            let v = v.bind(py);
            if let Ok(rows) = v.extract::<Vec<Vec<f64>>>() {
                (rows.len() == n && rows.iter().all(|r| r.len() == n)).then(|| rows.concat())
            } else {
                v.extract::<Vec<f64>>().ok().filter(|flat| flat.len() == n * n)
            }
        });
        Some(dense.unwrap_or_else(|| vec![f64::NAN; n * n]))
    }

    fn has_hessian(&self) -> bool {
        self.hess.is_some()
    }
}

/// A bound-constrained problem, from the catalog or from Python callables.
#[pyclass(name = "Problem", module = "projsearch", frozen)]
struct PyProblem {
    inner: BoxProblem,
}

#[pymethods]
impl PyProblem {
    /// Builds a catalog problem; `n` applies to scalable problems only.
    #[staticmethod]
    #[pyo3(signature = (name, n=None))]
    fn from_catalog(name: &str, n: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: problems::build(name, n).map_err(to_py)?,
        })
    }

    /// `hess`, when given, returns the Hessian as a list of rows or a flat
    /// row-major list.
    #[staticmethod]
    #[pyo3(signature = (f, grad, lower, upper, x0, hess=None, name="custom"))]
    fn from_functions(
        f: Py<PyAny>,
        grad: Py<PyAny>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        x0: Vec<f64>,
        hess: Option<Py<PyAny>>,
        name: &str,
    ) -> PyResult<Self> {
        let obj = PyObjective { f, grad, hess };
        let inner = BoxProblem::new(name, obj, bounds(lower, upper)?, x0).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn start(&self) -> Vec<f64> {
        self.inner.start().to_vec()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.bounds().lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.bounds().upper().to_vec()
    }

    #[getter]
    fn has_hessian(&self) -> bool {
        self.inner.has_hessian()
    }

    fn value(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<f64> {
        self.check(&x)?;
        Ok(py.detach(|| self.inner.objective().value(&x)))
    }

    fn gradient(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        let mut g = vec![0.0; x.len()];
        py.detach(|| self.inner.objective().gradient(&x, &mut g));
        Ok(g)
    }

    /// Largest relative gradient and Hessian discrepancies against finite
    /// differences at the start and `points` further points.
    #[pyo3(signature = (points=10))]
    fn check_derivatives(&self, py: Python<'_>, points: usize) -> (f64, Option<f64>) {
        let c = py.detach(|| problems::derivative_check(&self.inner, points));
        (c.gradient, c.hessian)
    }

    fn __repr__(&self) -> String {
        format!("Problem(name={:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

impl PyProblem {
    fn check(&self, x: &[f64]) -> PyResult<()> {
        if x.len() == self.inner.dim() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("expected {} entries, got {}", self.inner.dim(), x.len())))
        }
    }
}

#[pyclass(name = "Report", module = "projsearch", frozen, get_all)]
struct PyReport {
    status: String,
    converged: bool,
    x_final: Vec<f64>,
    f_final: f64,
    proj_grad_norm: f64,
    iterations: usize,
    n_f: usize,
    n_g: usize,
    n_h: usize,
    updates_applied: usize,
    updates_skipped: usize,
    hessian_modifications: usize,
    kkt_measure: Option<f64>,
}

impl From<SolverReport> for PyReport {
    fn from(r: SolverReport) -> Self {
        Self {
            status: r.status.to_string(),
            converged: r.status == SolverStatus::Converged,
            x_final: r.x_final,
            f_final: r.f_final,
            proj_grad_norm: r.proj_grad_norm,
            iterations: r.iterations,
            n_f: r.counters.n_f,
            n_g: r.counters.n_g,
            n_h: r.counters.n_h,
            updates_applied: r.updates_applied,
            updates_skipped: r.updates_skipped,
            hessian_modifications: r.hessian_modifications,
            kkt_measure: r.kkt_measure,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(status={}, f_final={:e}, iterations={}, n_f={})",
            self.status, self.f_final, self.iterations, self.n_f
        )
    }
}

/// Solver names accepted by `solve`.
#[pyfunction]
fn solver_names() -> Vec<&'static str> {
    Solver::ALL.iter().map(|s| s.as_str()).collect()
}

#[pyfunction]
fn problem_names() -> Vec<String> {
    problems::names()
}

#[pyfunction]
#[pyo3(signature = (problem, solver="as-qwolfe", tol=1e-5, max_iter=500, time_limit=60.0))]
fn solve(py: Python<'_>, problem: &PyProblem, solver: &str, tol: f64, max_iter: usize, time_limit: f64) -> PyResult<PyReport> {
    let solver: Solver = solver.parse().map_err(PyValueError::new_err)?;
    if !(time_limit > 0.0) {
        return Err(PyValueError::new_err("time_limit must be positive"));
    }
    let limits = Limits {
        tol,
        max_iter,
        time_limit: Some(Duration::from_secs_f64(time_limit)),
    };
    let report = py.detach(|| bench::run_solver(&problem.inner, solver, &limits)).map_err(to_py)?;
    Ok(report.into())
}

#[pyfunction]
fn project(x: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Vec<f64>> {
    let b = bounds(lower, upper)?;
    if x.len() != b.len() {
        return Err(PyValueError::new_err("x and bounds differ in length"));
    }
    Ok(projsearch_core::project(&x, &b))
}

#[pyfunction]
fn projected_direction(x: Vec<f64>, p: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Vec<f64>> {
    let b = bounds(lower, upper)?;
    if x.len() != b.len() || p.len() != b.len() {
        return Err(PyValueError::new_err("x, p and bounds differ in length"));
    }
    Ok(projsearch_core::projected_direction(&x, &p, &b))
}

/// Sorted `(step, index)` pairs at which coordinates reach a bound along
/// `proj(x + alpha p)`.
#[pyfunction]
fn kink_steps(x: Vec<f64>, p: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Vec<(f64, usize)>> {
    let b = bounds(lower, upper)?;
    if x.len() != b.len() || p.len() != b.len() {
        return Err(PyValueError::new_err("x, p and bounds differ in length"));
    }
    Ok(projsearch_core::kink_steps(&x, &p, &b)
        .into_iter()
        .map(|k| (k.step, k.index))
        .collect())
}

/// Performance profile from `(problem, solver, cost, solved)` tuples.
/// Returns `{solver: [(tau, pi), ...]}`.
#[pyfunction]
fn performance_profile(runs: Vec<(String, String, usize, bool)>) -> PyResult<Vec<(String, Vec<(f64, f64)>)>> {
    let records: Vec<RunRecord> = runs
        .into_iter()
        .map(|(problem, solver, cost, solved)| RunRecord {
            problem,
            solver,
            status: RunStatus::Solver(if solved { SolverStatus::Converged } else { SolverStatus::IterLimit }),
            n_f: cost,
            n_g: 0,
            n_h: 0,
            iterations: 0,
            wall_time_s: 0.0,
            f_final: 0.0,
            proj_grad_norm: 0.0,
            updates_skipped: 0,
        })
        .collect();
    let profile = bench::performance_profile(&records, Metric::FunctionEvaluations).map_err(to_py)?;
    Ok(profile.curves.into_iter().map(|c| (c.solver, c.points)).collect())
}

#[pymodule]
fn projsearch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solver_names, m)?)?;
    m.add_function(wrap_pyfunction!(problem_names, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(projected_direction, m)?)?;
    m.add_function(wrap_pyfunction!(kink_steps, m)?)?;
    m.add_function(wrap_pyfunction!(performance_profile, m)?)?;
    Ok(())
}
