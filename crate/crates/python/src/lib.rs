//! Python bindings for the masked ridge estimator and its deterministic
//! equivalents.
//!
//! Matrices cross the boundary as lists of rows. Structured results come back
//! as plain dictionaries with the same field names as the Rust types.

use maskridge_core::asymptotics;
use maskridge_core::experiment::{self, ExperimentConfig};
use maskridge_core::{linalg, CovarianceSpec, Dataset, EntryDist, InversionPath, SpikeMode};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(maskridge, MaskridgeError, PyException);
create_exception!(maskridge, DivergentError, MaskridgeError);

fn to_py(err: maskridge_core::Error) -> PyErr {
    match err {
        maskridge_core::Error::InvalidParameter { .. }
        | maskridge_core::Error::DimensionMismatch { .. }
        | maskridge_core::Error::NotSymmetric { .. }
        | maskridge_core::Error::NotPositiveSemidefinite { .. } => PyValueError::new_err(err.to_string()),
        maskridge_core::Error::Divergent { .. } => DivergentError::new_err(err.to_string()),
        _ => MaskridgeError::new_err(err.to_string()),
    }
}

/// Serializes through JSON so Python sees ordinary dicts and lists.
fn to_object(py: Python<'_>, value: &impl Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| MaskridgeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_entry_dist(name: &str) -> PyResult<EntryDist> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown entry distribution `{name}`")))
}

fn parse_path(name: &str) -> PyResult<InversionPath> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown inversion path `{name}`; expected auto, primal or dual")))
}

#[pyclass(name = "CovarianceModel", module = "maskridge", frozen)]
struct PyCovarianceModel {
    inner: maskridge_core::CovarianceModel,
}

#[pymethods]
impl PyCovarianceModel {
    #[staticmethod]
    fn identity(dim: usize) -> PyResult<Self> {
        Self::wrap(maskridge_core::CovarianceModel::identity(dim))
    }

    #[staticmethod]
    fn toeplitz(rho: f64, dim: usize) -> PyResult<Self> {
        Self::wrap(maskridge_core::CovarianceModel::toeplitz(rho, dim))
    }

    /// `I + θ v vᵀ`; `v` is `e_basis_index` when given, else uniform on the sphere.
    #[staticmethod]
    #[pyo3(signature = (theta, dim, seed=0, basis_index=None))]
    fn spiked(theta: f64, dim: usize, seed: u64, basis_index: Option<usize>) -> PyResult<Self> {
        let mode = match basis_index {
            Some(index) => SpikeMode::Basis { index },
            None => SpikeMode::UniformSphere { seed: Some(seed) },
        };
        Self::wrap(maskridge_core::CovarianceModel::spiked(theta, mode, dim, seed))
    }

    #[staticmethod]
    fn power_law(beta: f64, dim: usize) -> PyResult<Self> {
        Self::wrap(maskridge_core::CovarianceModel::power_law(beta, dim))
    }

    #[staticmethod]
    fn custom(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        let m = linalg::from_rows(&matrix).map_err(to_py)?;
        Self::wrap(maskridge_core::CovarianceModel::custom(m))
    }

    /// Builds a model from a JSON spec such as `{"kind": "toeplitz", "rho": 0.5}`.
    #[staticmethod]
    #[pyo3(signature = (spec, dim, seed=0))]
    fn from_spec(spec: &str, dim: usize, seed: u64) -> PyResult<Self> {
        let spec: CovarianceSpec = serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::wrap(maskridge_core::build_covariance(&spec, dim, Some(seed)))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(self.inner.dense())
    }

    /// `1 / diag(Σ^{-1})`.
    fn diag_precision_inverse(&self) -> PyResult<Vec<f64>> {
        self.inner.diag_precision_inverse().map_err(to_py)
    }

    /// Draws `n` rows `x = Σ^{1/2} z` with standardized i.i.d. entries `z`.
    #[pyo3(signature = (n, seed, entry_dist="gaussian"))]
    fn sample(&self, n: usize, seed: u64, entry_dist: &str) -> PyResult<Vec<Vec<f64>>> {
        let data = experiment::sample_dataset(&self.inner, n, seed, parse_entry_dist(entry_dist)?).map_err(to_py)?;
        Ok(linalg::to_rows(data.x()))
    }

    fn __repr__(&self) -> String {
        format!("CovarianceModel({})", self.inner.describe())
    }
}

impl PyCovarianceModel {
    fn wrap(model: maskridge_core::Result<maskridge_core::CovarianceModel>) -> PyResult<Self> {
        model.map(|inner| Self { inner }).map_err(to_py)
    }
}

#[pyclass(name = "SsrEstimate", module = "maskridge", frozen)]
struct PySsrEstimate {
    inner: maskridge_core::SsrEstimate,
}

#[pymethods]
impl PySsrEstimate {
    #[getter]
    fn a_hat(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(self.inner.a_hat.as_ref())
    }

    #[getter]
    fn lambda_diag(&self) -> Vec<f64> {
        self.inner.lambda_diag.clone()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn population_risk(&self, model: &PyCovarianceModel) -> PyResult<f64> {
        maskridge_core::population_risk(self.inner.a_hat.as_ref(), &model.inner).map_err(to_py)
    }

    fn empirical_risk(&self, x: Vec<Vec<f64>>) -> PyResult<f64> {
        let data = dataset(&x)?;
        maskridge_core::empirical_risk(self.inner.a_hat.as_ref(), &data).map_err(to_py)
    }

    /// Eigenvalues of `Â` in increasing order.
    fn spectrum(&self) -> PyResult<Vec<f64>> {
        maskridge_core::ssr_spectrum_empirical(&self.inner).map_err(to_py)
    }
}

fn dataset(x: &[Vec<f64>]) -> PyResult<Dataset> {
    let m = linalg::from_rows(x).map_err(to_py)?;
    Dataset::from_matrix(m).map_err(to_py)
}

/// Closed-form masked ridge fit on the rows of `x`.
#[pyfunction]
#[pyo3(signature = (x, lam, path="auto"))]
fn fit_ssr(x: Vec<Vec<f64>>, lam: f64, path: &str) -> PyResult<PySsrEstimate> {
    let data = dataset(&x)?;
    let inner = maskridge_core::fit_ssr_with(&data, lam, parse_path(path)?).map_err(to_py)?;
    Ok(PySsrEstimate { inner })
}

/// `(1/d) Tr((I − A)ᵀ Σ (I − A))` for any square `a`.
#[pyfunction]
fn population_risk(a: Vec<Vec<f64>>, model: &PyCovarianceModel) -> PyResult<f64> {
    let m = linalg::from_rows(&a).map_err(to_py)?;
    maskridge_core::population_risk(m.as_ref(), &model.inner).map_err(to_py)
}

/// Smallest achievable population risk over zero-diagonal predictors.
#[pyfunction]
fn approximation_error(model: &PyCovarianceModel) -> PyResult<f64> {
    maskridge_core::approximation_optimum(&model.inner).map(|r| r.l_app).map_err(to_py)
}

#[pyfunction]
fn solve_kappa(py: Python<'_>, model: &PyCovarianceModel, n: usize, lam: f64) -> PyResult<Py<PyAny>> {
    let solution = maskridge_core::solve_kappa(&model.inner, n, lam).map_err(to_py)?;
    to_object(py, &solution)
}

/// Deterministic-equivalent generalization and training error.
#[pyfunction]
fn predict_risk(py: Python<'_>, model: &PyCovarianceModel, n: usize, lam: f64) -> PyResult<Py<PyAny>> {
    let prediction = asymptotics::predict_risk(&model.inner, n, lam).map_err(to_py)?;
    to_object(py, &prediction)
}

/// Predicted eigenvalue density of `Â`; a default grid is chosen when none is given.
#[pyfunction]
#[pyo3(signature = (model, n, lam, grid=None, eta=None))]
fn spectral_density(
    py: Python<'_>,
    model: &PyCovarianceModel,
    n: usize,
    lam: f64,
    grid: Option<Vec<f64>>,
    eta: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let result = match grid {
        Some(grid) => {
            let span = grid.last().copied().unwrap_or(0.0) - grid.first().copied().unwrap_or(0.0);
            let eta = eta.unwrap_or(1e-3 * span.abs());
            asymptotics::predicted_spectral_density(&model.inner, n, lam, &grid, eta)
        }
        None => asymptotics::predicted_spectral_density_auto(&model.inner, n, lam),
    }
    .map_err(to_py)?;
    // Complex traces do not survive JSON; keep the real fields only.
    let mut value = serde_json::to_value(&result).map_err(|e| MaskridgeError::new_err(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("chi_trace");
    }
    to_object(py, &value)
}

/// Ridgeless isotropic density on `grid`, or on a default grid over its support.
#[pyfunction]
#[pyo3(signature = (alpha, grid=None))]
fn universal_density(py: Python<'_>, alpha: f64, grid: Option<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let result = asymptotics::universal_density(alpha, grid.as_deref()).map_err(to_py)?;
    let mut value = serde_json::to_value(&result).map_err(|e| MaskridgeError::new_err(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("chi_trace");
    }
    to_object(py, &value)
}

#[pyfunction]
fn universal_support(alpha: f64) -> PyResult<(f64, f64)> {
    asymptotics::universal_support(alpha).map_err(to_py)
}

/// Top two eigenvalues of `Â` under a delocalized spike of strength `theta`.
#[pyfunction]
fn bbp(py: Python<'_>, alpha: f64, theta: f64) -> PyResult<Py<PyAny>> {
    let prediction = asymptotics::bbp_prediction(alpha, theta).map_err(to_py)?;
    to_object(py, &prediction)
}

/// Component fraction where PCA and the masked estimator tie under AR(1) correlation `rho`.
#[pyfunction]
fn phase_boundary(rho: f64) -> PyResult<f64> {
    asymptotics::ar1_phase_boundary(rho).map_err(to_py)
}

/// Runs a Monte Carlo comparison from a JSON experiment config and returns the report.
#[pyfunction]
#[pyo3(signature = (config, threads=0))]
fn run_experiment(py: Python<'_>, config: &str, threads: usize) -> PyResult<Py<PyAny>> {
    let config: ExperimentConfig = serde_json::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let issues = config.validate();
    if !issues.is_empty() {
        let text = issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ");
        return Err(PyValueError::new_err(text));
    }
    experiment::configure_threads(threads);
    let report = py.detach(|| experiment::run_experiment(&config)).map_err(to_py)?;
    let value: serde_json::Value =
        serde_json::from_str(&report.to_json()).map_err(|e| MaskridgeError::new_err(e.to_string()))?;
    to_object(py, &value)
}

#[pymodule]
fn maskridge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MaskridgeError", m.py().get_type::<MaskridgeError>())?;
    m.add("DivergentError", m.py().get_type::<DivergentError>())?;
    m.add_class::<PyCovarianceModel>()?;
    m.add_class::<PySsrEstimate>()?;
    m.add_function(wrap_pyfunction!(fit_ssr, m)?)?;
    m.add_function(wrap_pyfunction!(population_risk, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_error, m)?)?;
    m.add_function(wrap_pyfunction!(solve_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(predict_risk, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_density, m)?)?;
    m.add_function(wrap_pyfunction!(universal_density, m)?)?;
    m.add_function(wrap_pyfunction!(universal_support, m)?)?;
    m.add_function(wrap_pyfunction!(bbp, m)?)?;
    m.add_function(wrap_pyfunction!(phase_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
