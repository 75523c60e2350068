//! Python bindings: the main model types and operations, driven in-process.
//!
//! Scalar results come back as floats or tuples; the Monte Carlo reports
//! come back as JSON strings (parse with `json.loads`), matching the CLI's
//! report schema.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use jumpmart_core::criteria;
use jumpmart_core::generators::{gen_path_with_step, RngStream};
use jumpmart_core::inequalities;
use jumpmart_core::model::{JumpLaw, ModelSpec, SamplePath};
use jumpmart_core::report::{to_json_pretty, Report};
use jumpmart_core::{calculus, Error};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Declarative model specification.
#[pyclass(frozen, name = "Model")]
struct PyModel {
    spec: ModelSpec,
}

#[pymethods]
impl PyModel {
    /// Scaled Brownian motion with the given volatility on [0, horizon].
    #[staticmethod]
    fn brownian(volatility: f64, horizon: f64) -> PyResult<Self> {
        Ok(PyModel {
            spec: ModelSpec::brownian(volatility, horizon).map_err(py_err)?,
        })
    }

    /// Compensated Poisson process a(N_t - intensity t).
    #[staticmethod]
    fn compensated_poisson(intensity: f64, jump_size: f64, horizon: f64) -> PyResult<Self> {
        Ok(PyModel {
            spec: ModelSpec::compensated_poisson(intensity, jump_size, horizon)
                .map_err(py_err)?,
        })
    }

    /// Compound Poisson martingale; law is "exponential" or "deterministic".
    #[staticmethod]
    #[pyo3(signature = (intensity, jump_mean, horizon, law = "exponential"))]
    fn compound_poisson(
        intensity: f64,
        jump_mean: f64,
        horizon: f64,
        law: &str,
    ) -> PyResult<Self> {
        let jump_law = match law {
            "exponential" => JumpLaw::Exponential { mean: jump_mean },
            "deterministic" => JumpLaw::Deterministic { size: jump_mean },
            other => return Err(PyValueError::new_err(format!("unknown jump law {other}"))),
        };
        Ok(PyModel {
            spec: ModelSpec::compound_poisson_martingale(intensity, jump_law, horizon)
                .map_err(py_err)?,
        })
    }

    /// a(N^{T_b} - t ∧ T_b), run until the first-passage time T_b.
    #[staticmethod]
    fn stopped_scaled_cpp(a: f64, b: f64) -> PyResult<Self> {
        Ok(PyModel {
            spec: ModelSpec::stopped_scaled_cpp(a, b).map_err(py_err)?,
        })
    }

    /// The constant zero martingale.
    #[staticmethod]
    fn zero(horizon: f64) -> PyResult<Self> {
        Ok(PyModel {
            spec: ModelSpec::zero(horizon).map_err(py_err)?,
        })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind_name()
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.spec)
    }
}

/// One realized trajectory.
#[pyclass(frozen, name = "Path")]
struct PyPath {
    path: SamplePath,
}

#[pymethods]
impl PyPath {
    /// M_t; accepts float('inf') for "at the stopping time" on stopped paths.
    fn evaluate(&self, t: f64) -> PyResult<f64> {
        self.path.evaluate(t).map_err(py_err)
    }

    #[getter]
    fn stop_time(&self) -> Option<f64> {
        self.path.stop_time
    }

    #[getter]
    fn terminal_time(&self) -> f64 {
        self.path.terminal_time()
    }

    #[getter]
    fn terminal_value(&self) -> f64 {
        self.path.terminal_value()
    }

    fn jump_times(&self) -> Vec<f64> {
        self.path.jumps.iter().map(|j| j.time).collect()
    }

    fn jump_sizes(&self) -> Vec<f64> {
        self.path.jumps.iter().map(|j| j.size).collect()
    }

    /// The t,value,is_jump CSV dump.
    fn dump_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.path
            .dump_csv(&mut buf)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    fn __repr__(&self) -> String {
        format!(
            "Path(model={}, jumps={}, terminal_time={})",
            self.path.model.kind_name(),
            self.path.jumps.len(),
            self.path.terminal_time()
        )
    }
}

/// Generate replication `replicate` of the model under `seed`.
#[pyfunction]
#[pyo3(signature = (model, seed, replicate = 0, step = None))]
fn generate(model: &PyModel, seed: u64, replicate: u64, step: Option<f64>) -> PyResult<PyPath> {
    let path = gen_path_with_step(&model.spec, RngStream::new(seed, replicate), step)
        .map_err(py_err)?;
    Ok(PyPath { path })
}

/// Quadratic variations at time t.
#[pyclass(frozen, name = "Variation")]
struct PyVariation {
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    qv: f64,
    #[pyo3(get)]
    pqv: f64,
    #[pyo3(get)]
    qv_cont: f64,
}

#[pymethods]
impl PyVariation {
    /// alpha*qv + (1-alpha)*pqv.
    fn blend(&self, alpha: f64) -> f64 {
        alpha * self.qv + (1.0 - alpha) * self.pqv
    }

    fn __repr__(&self) -> String {
        format!(
            "Variation(t={}, qv={}, pqv={}, qv_cont={})",
            self.t, self.qv, self.pqv, self.qv_cont
        )
    }
}

#[pyfunction]
fn quadratic_variation(path: &PyPath, t: f64) -> PyResult<PyVariation> {
    let v = calculus::quadratic_variation(&path.path, t).map_err(py_err)?;
    Ok(PyVariation {
        t: v.t,
        qv: v.qv,
        pqv: v.pqv,
        qv_cont: v.qv_cont,
    })
}

/// The Doléans-Dade exponential E(M)_t.
#[pyfunction]
fn stochastic_exponential(path: &PyPath, t: f64) -> PyResult<f64> {
    calculus::stochastic_exponential(&path.path, t).map_err(py_err)
}

/// Max relative residual of Z = 1 + ∫ Z_{s-} dM_s along a pure-jump path.
#[pyfunction]
fn sde_residual_check(path: &PyPath) -> PyResult<f64> {
    calculus::sde_residual_check(&path.path).map_err(py_err)
}

fn margin_tuple(m: inequalities::InequalityMargin) -> (f64, f64, f64) {
    (m.middle, m.lower_margin, m.upper_margin)
}

/// (middle, lower_margin, upper_margin) of log(1+λx) - λ log(1+x).
#[pyfunction]
fn margin_log1(x: f64, lam: f64) -> PyResult<(f64, f64, f64)> {
    inequalities::margin_log1(x, lam).map(margin_tuple).map_err(py_err)
}

/// (middle, lower_margin, upper_margin) of a log(1+x) - log(1+ax).
#[pyfunction]
fn margin_log2(x: f64, a: f64) -> PyResult<(f64, f64, f64)> {
    inequalities::margin_log2(x, a).map(margin_tuple).map_err(py_err)
}

/// (middle, lower_margin, upper_margin) of (1+λx) - (1+x)^λ.
#[pyfunction]
fn margin_pred1(x: f64, lam: f64) -> PyResult<(f64, f64, f64)> {
    inequalities::margin_pred1(x, lam).map(margin_tuple).map_err(py_err)
}

/// (middle, lower_margin, upper_margin) of (1+x)^a - (1+ax), 1 <= a <= 2.
#[pyfunction]
fn margin_pred2(x: f64, a: f64) -> PyResult<(f64, f64, f64)> {
    inequalities::margin_pred2(x, a).map(margin_tuple).map_err(py_err)
}

/// (middle, lower_margin, upper_margin) of the three-parameter inequality.
#[pyfunction]
fn margin_alpha_lambda(x: f64, lam: f64, alpha: f64) -> PyResult<(f64, f64, f64)> {
    inequalities::margin_alpha_lambda(x, lam, alpha)
        .map(margin_tuple)
        .map_err(py_err)
}

/// middle(x, λ, α) / x²; converges to αλ(1-λ)/2 as x -> 0.
#[pyfunction]
fn limit_ratio(x: f64, lam: f64, alpha: f64) -> PyResult<f64> {
    inequalities::limit_ratio(x, lam, alpha).map_err(py_err)
}

/// exp(-λ) + λ(1+b) - 1.
#[pyfunction]
fn fb(lam: f64, b: f64) -> f64 {
    criteria::fb(lam, b)
}

/// (1+b) log(1+b) - b, the largest finite exponential-moment rate of T_b.
#[pyfunction]
fn fb_boundary(b: f64) -> f64 {
    criteria::fb_boundary(b)
}

/// E exp(θ T_b); float('inf') past the boundary.
#[pyfunction]
fn laplace_oracle_tb(theta: f64, b: f64) -> PyResult<f64> {
    criteria::laplace_oracle_tb(theta, b).map_err(py_err)
}

/// (a, b) satisfying both counterexample conditions for the given δ.
#[pyfunction]
fn search_example_params(delta: f64) -> PyResult<(f64, f64)> {
    criteria::search_example_params(delta).map_err(py_err)
}

fn wrap_report<C: serde::Serialize, R: serde::Serialize>(
    command: &str,
    seed: u64,
    config: C,
    results: R,
) -> String {
    to_json_pretty(&Report {
        artifact: "jumpmart",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        seed,
        config,
        results,
    })
}

/// JSON report of the E[E(M)_t] = 1 Monte Carlo test.
#[pyfunction]
#[pyo3(signature = (model, t = None, reps = 100_000, seed = 42, ci_level = 0.99))]
fn martingale_test_json(
    model: &PyModel,
    t: Option<f64>,
    reps: u64,
    seed: u64,
    ci_level: f64,
) -> PyResult<String> {
    let params = criteria::MartingaleTestParams {
        n_reps: reps,
        seed,
        ci_level,
        ..Default::default()
    };
    let report = criteria::martingale_test(&model.spec, t, &params).map_err(py_err)?;
    Ok(wrap_report("martingale-test", seed, &params, &report))
}

/// JSON report of the criterion functional g(eps) over the grid.
#[pyfunction]
#[pyo3(signature = (model, alpha = 1.0, eps_grid = None, reps = 100_000, seed = 42, rate_scale = 1.0))]
fn novikov_json(
    model: &PyModel,
    alpha: f64,
    eps_grid: Option<Vec<f64>>,
    reps: u64,
    seed: u64,
    rate_scale: f64,
) -> PyResult<String> {
    let params = criteria::NovikovParams {
        alpha,
        eps_grid: eps_grid.unwrap_or_else(|| criteria::DEFAULT_EPS_GRID.to_vec()),
        n_reps: reps,
        seed,
        ci_level: 0.99,
        rate_scale,
    };
    let curve = criteria::novikov_functional(&model.spec, &params).map_err(py_err)?;
    Ok(wrap_report("novikov", seed, &params, &curve))
}

/// JSON report of both counterexample conditions at (δ, a, b, α).
#[pyfunction]
#[pyo3(signature = (delta, a, b, alpha = 1.0, reps = 100_000, seed = 42))]
fn example_conditions_json(
    delta: f64,
    a: f64,
    b: f64,
    alpha: f64,
    reps: u64,
    seed: u64,
) -> PyResult<String> {
    let params = criteria::ExampleParams {
        delta,
        a,
        b,
        alpha,
        n_reps: reps,
        seed,
        ..Default::default()
    };
    let report = criteria::example_conditions(&params).map_err(py_err)?;
    let json = wrap_report("example-optimality", seed, &params, &report);
    serde_json::from_str::<serde_json::Value>(&json).map_err(json_err)?;
    Ok(json)
}

#[pymodule]
fn jumpmart_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyVariation>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_variation, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(sde_residual_check, m)?)?;
    m.add_function(wrap_pyfunction!(margin_log1, m)?)?;
    m.add_function(wrap_pyfunction!(margin_log2, m)?)?;
    m.add_function(wrap_pyfunction!(margin_pred1, m)?)?;
    m.add_function(wrap_pyfunction!(margin_pred2, m)?)?;
    m.add_function(wrap_pyfunction!(margin_alpha_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(limit_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(fb, m)?)?;
    m.add_function(wrap_pyfunction!(fb_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_oracle_tb, m)?)?;
    m.add_function(wrap_pyfunction!(search_example_params, m)?)?;
    m.add_function(wrap_pyfunction!(martingale_test_json, m)?)?;
    m.add_function(wrap_pyfunction!(novikov_json, m)?)?;
    m.add_function(wrap_pyfunction!(example_conditions_json, m)?)?;
    Ok(())
}
