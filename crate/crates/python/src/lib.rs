//! Python bindings: instances, the three solvers, the validator and the
//! exhaustive oracle.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mprp::cli::format::{parse_instance, parse_solution, write_instance, write_solution};
use mprp::cli::{generate_instance, GeneratorParams};
use mprp::discretize;
use mprp::reassign;
use mprp::{Instance, Mode, OracleLimits, Point, Solution, SolveError, SolverConfig};

fn solve_err(e: SolveError) -> PyErr {
    match e {
        SolveError::Internal(_) | SolveError::Precondition { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(PyValueError::new_err)
}

/// `(site, arrival, pickup)`
type VisitTuple = (usize, f64, f64);

#[pyclass(name = "Instance", module = "pymprp", frozen)]
struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        parse_instance(text)
            .map(|inner| Self { inner })
            .map_err(PyValueError::new_err)
    }

    fn to_toml(&self) -> String {
        write_instance(&self.inner)
    }

    #[staticmethod]
    #[pyo3(signature = (seed, n, m, mode = "mprp", side = 100.0, capacity = 100.0, horizon = 480.0, q_min = 10.0, q_max = 50.0))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        seed: u64,
        n: usize,
        m: usize,
        mode: &str,
        side: f64,
        capacity: f64,
        horizon: f64,
        q_min: f64,
        q_max: f64,
    ) -> PyResult<Self> {
        let params = GeneratorParams {
            seed,
            stream: 0,
            sites: n,
            fleet: m,
            mode: parse_mode(mode)?,
            side,
            capacity,
            horizon,
            q_min,
            q_max,
        };
        generate_instance(&params)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.inner.num_sites()
    }

    #[getter]
    fn fleet_size(&self) -> usize {
        self.inner.fleet_size()
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.inner.capacity()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode().name()
    }

    /// Travel time between nodes; 0 is the depot, sites are 1..n.
    fn travel(&self, a: usize, b: usize) -> PyResult<f64> {
        let nodes = self.inner.num_sites() + 1;
        if a >= nodes || b >= nodes {
            return Err(PyValueError::new_err("node id out of range"));
        }
        Ok(self.inner.travel(a, b))
    }

    fn with_mode(&self, mode: &str) -> PyResult<Self> {
        self.inner
            .with_mode(parse_mode(mode)?)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(mode={}, sites={}, fleet={}, capacity={}, horizon={})",
            self.inner.mode(),
            self.inner.num_sites(),
            self.inner.fleet_size(),
            self.inner.capacity(),
            self.inner.horizon()
        )
    }
}

#[pyclass(name = "Solution", module = "pymprp", frozen)]
struct PySolution {
    inner: Solution,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        parse_solution(text)
            .map(|inner| Self { inner })
            .map_err(PyValueError::new_err)
    }

    fn to_toml(&self) -> String {
        write_solution(&self.inner)
    }

    #[getter]
    fn profit(&self) -> f64 {
        self.inner.claimed.profit
    }

    #[getter]
    fn reward(&self) -> f64 {
        self.inner.claimed.reward
    }

    #[getter]
    fn cost(&self) -> f64 {
        self.inner.claimed.cost
    }

    /// `[(vehicle, [(site, arrival, pickup), ...]), ...]`
    #[getter]
    fn tours(&self) -> Vec<(usize, Vec<VisitTuple>)> {
        self.inner
            .tours
            .iter()
            .map(|t| (t.vehicle, t.visits.iter().map(|v| (v.site, v.arrival, v.pickup)).collect()))
            .collect()
    }

    fn visit_count(&self) -> usize {
        self.inner.visit_count()
    }

    fn __repr__(&self) -> String {
        format!("Solution(profit={}, tours={})", self.inner.claimed.profit, self.inner.tours.len())
    }
}

#[pyclass(name = "ValidationReport", module = "pymprp", frozen, get_all)]
struct PyValidationReport {
    feasible: bool,
    /// `(kind, vehicle, site, magnitude)`
    violations: Vec<(String, Option<usize>, Option<usize>, f64)>,
    reward: f64,
    cost: f64,
    profit: f64,
}

#[pyfunction]
#[pyo3(signature = (instance, exact_threshold = 8))]
fn solve_baseline(instance: &PyInstance, exact_threshold: usize) -> PyResult<PySolution> {
    let config = SolverConfig {
        exact_threshold,
        ..SolverConfig::default()
    };
    mprp::solve_baseline(&instance.inner, &config)
        .map(|inner| PySolution { inner })
        .map_err(solve_err)
}

#[pyfunction]
fn solve_mprp_m(instance: &PyInstance) -> PyResult<PySolution> {
    mprp::solve_mprp_m(&instance.inner, &SolverConfig::default())
        .map(|inner| PySolution { inner })
        .map_err(solve_err)
}

#[pyfunction]
fn solve_mprp_mvs(instance: &PyInstance, epsilon: f64) -> PyResult<PySolution> {
    mprp::solve_mprp_mvs(&instance.inner, epsilon, &SolverConfig::default())
        .map(|inner| PySolution { inner })
        .map_err(solve_err)
}

#[pyfunction]
fn validate(instance: &PyInstance, solution: &PySolution) -> PyValidationReport {
    let report = mprp::validate(&instance.inner, &solution.inner);
    PyValidationReport {
        feasible: report.is_feasible(),
        violations: report
            .violations
            .iter()
            .map(|v| (v.kind.name().to_string(), v.vehicle, v.site, v.magnitude))
            .collect(),
        reward: report.audited.reward,
        cost: report.audited.cost,
        profit: report.audited.profit,
    }
}

#[pyfunction]
#[pyo3(signature = (instance, max_sites = 6, max_vehicles = 2))]
fn brute_force_optimum(instance: &PyInstance, max_sites: usize, max_vehicles: usize) -> PyResult<(PySolution, f64)> {
    let limits = OracleLimits {
        max_sites,
        max_vehicles,
    };
    mprp::brute_force_optimum(&instance.inner, &limits)
        .map(|(inner, optimum)| (PySolution { inner }, optimum))
        .map_err(solve_err)
}

#[pyfunction]
fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    mprp::distance(Point::new(a.0, a.1), Point::new(b.0, b.1))
}

/// `(x, y, z)` maximizing `x + y + z` for one re-assignment.
#[pyfunction]
fn solve_reassignment_lp(q_u: f64, q_shared: f64, owner_room: f64) -> PyResult<(f64, f64, f64)> {
    reassign::solve_reassignment_lp(q_u, q_shared, owner_room)
        .map(|lp| (lp.x, lp.y, lp.z))
        .map_err(solve_err)
}

#[pyfunction]
fn compute_alpha(instance: &PyInstance) -> PyResult<f64> {
    discretize::compute_alpha(&instance.inner).map_err(solve_err)
}

#[pyfunction]
fn num_intervals(alpha: f64, epsilon: f64) -> PyResult<usize> {
    discretize::num_intervals(alpha, epsilon).map_err(solve_err)
}

/// `[(lo, hi), ...]` for one site of a ramped-supply instance.
#[pyfunction]
fn split_intervals(instance: &PyInstance, site: usize, levels: usize, epsilon: f64) -> PyResult<Vec<(f64, f64)>> {
    let site = instance
        .inner
        .site(site)
        .ok_or_else(|| PyValueError::new_err(format!("unknown site id {site}")))?;
    discretize::split_intervals(site, levels, epsilon)
        .map(|v| v.iter().map(|i| (i.lo, i.hi)).collect())
        .map_err(solve_err)
}

#[pymodule]
fn pymprp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyValidationReport>()?;
    m.add_function(wrap_pyfunction!(solve_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mprp_m, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mprp_mvs, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(solve_reassignment_lp, m)?)?;
    m.add_function(wrap_pyfunction!(compute_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(num_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(split_intervals, m)?)?;
    Ok(())
}
