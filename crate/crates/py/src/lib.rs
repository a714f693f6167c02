//! Python module `esdg`. The `api` functions are plain Rust and hold the
//! logic; the Python wrappers only convert types and errors.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

pub mod api;

create_exception!(esdg, SolverError, PyException);

fn to_py(e: api::ApiError) -> PyErr {
    match e {
        api::ApiError::Argument(msg) => PyValueError::new_err(msg),
        other => SolverError::new_err(other.to_string()),
    }
}

/// Nodes, weights and the derivative matrix (row-major) of order `order`.
#[pyfunction]
fn sbp_operators(order: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    api::sbp_operators(order).map_err(to_py)
}

/// `(name, passed, detail)` for every operator identity.
#[pyfunction]
#[pyo3(signature = (max_order = 10, max_projection_order = 8))]
fn operator_checks(
    max_order: usize,
    max_projection_order: usize,
) -> PyResult<Vec<(String, bool, String)>> {
    api::operator_checks(max_order, max_projection_order).map_err(to_py)
}

/// RMS growth rates over random diagonal-jump states:
/// `(primary[4], entropy, evaluated, not_evaluable)`.
#[pyfunction]
#[pyo3(signature = (coupling, level = 3, orders = [3, 4, 3], trials = 100, seed = 0))]
fn entropy_ensemble(
    coupling: &str,
    level: usize,
    orders: [usize; 3],
    trials: usize,
    seed: u64,
) -> PyResult<([f64; 4], f64, usize, usize)> {
    api::entropy_ensemble(coupling, level, orders, trials, seed).map_err(to_py)
}

/// `(level, dofs, l2)` for each vortex run and the final EOC.
#[pyfunction]
#[pyo3(signature = (orders, min_level, max_level, coupling = "es", cfl = 0.2, t_end = 1.0))]
fn convergence(
    orders: [usize; 3],
    min_level: usize,
    max_level: usize,
    coupling: &str,
    cfl: f64,
    t_end: f64,
) -> PyResult<(Vec<(usize, usize, f64)>, Option<f64>)> {
    api::convergence(orders, min_level, max_level, coupling, cfl, t_end).map_err(to_py)
}

/// Runs a TOML configuration; returns the time series CSV and the checks.
#[pyfunction]
fn run_config(toml: &str) -> PyResult<(String, Vec<(String, bool, String)>)> {
    api::run_config(toml).map_err(to_py)
}

/// Euler discretization on the three-region mesh with its current state.
#[pyclass(module = "esdg")]
struct Solver {
    inner: api::EulerSolver,
}

#[pymethods]
impl Solver {
    /// Three-region mesh over `domain = (x0, x1, y0, y1)`, initialised with
    /// the near-stationary diagonal jump.
    #[new]
    #[pyo3(signature = (level, orders, coupling = "es", domain = (0.0, 1.0, 0.0, 1.0), periodic = true))]
    fn new(
        level: usize,
        orders: [usize; 3],
        coupling: &str,
        domain: (f64, f64, f64, f64),
        periodic: bool,
    ) -> PyResult<Self> {
        let inner = api::EulerSolver::three_region(
            level,
            orders,
            coupling,
            [domain.0, domain.1, domain.2, domain.3],
            periodic,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Replaces the state with random constant states either side of `x = y`.
    fn set_random_jump(&mut self, seed: u64) -> PyResult<()> {
        self.inner.set_random_jump(seed).map_err(to_py)
    }

    /// Replaces the state with the isentropic vortex at time `t`.
    fn set_vortex(&mut self, t: f64) -> PyResult<()> {
        self.inner.set_vortex(t).map_err(to_py)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn dofs(&self) -> usize {
        self.inner.dofs()
    }

    fn total_entropy(&self) -> PyResult<f64> {
        self.inner.total_entropy().map_err(to_py)
    }

    /// `(primary[4], entropy)` growth rates of the current state.
    fn growth(&self) -> PyResult<([f64; 4], f64)> {
        self.inner.growth().map_err(to_py)
    }

    /// Integrates to `t_end`; returns the number of steps.
    #[pyo3(signature = (t_end, cfl = 0.5))]
    fn advance(&mut self, t_end: f64, cfl: f64) -> PyResult<usize> {
        self.inner.advance(t_end, cfl).map_err(to_py)
    }

    /// `(x, y, rho, rho_u, rho_v, energy)` at every node.
    fn nodal_values(&self) -> Vec<(f64, f64, f64, f64, f64, f64)> {
        self.inner.nodal_values()
    }

    fn __repr__(&self) -> String {
        format!(
            "Solver(dofs={}, t={})",
            self.inner.dofs(),
            self.inner.time()
        )
    }
}

#[pymodule]
fn esdg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(sbp_operators, m)?)?;
    m.add_function(wrap_pyfunction!(operator_checks, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_class::<Solver>()?;
    Ok(())
}
