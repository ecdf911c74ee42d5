//! Python bindings: model formulas, the GEP engine, metrics, dataset tools
//! and the command-line entry point.

use embgep::dataset::{self, CaseHistory, SummaryTable};
use embgep::evolution::{self, GepConfig, TrainingData};
use embgep::karva;
use embgep::metrics::{self, PredictionSet};
use embgep::models::{self, ModelError, ModelId, ModelInput, ModelOptions};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(embgep_py, PoleError, PyValueError, "Input lies in the pole band of the evolved model.");

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Pole { .. } => PoleError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// ln D (meters) of the evolved model.
#[pyfunction]
#[pyo3(signature = (mw, ay_ratio, period_ratio, pole_epsilon=None))]
fn gep_ln_displacement(mw: f64, ay_ratio: f64, period_ratio: f64, pole_epsilon: Option<f64>) -> PyResult<f64> {
    let eps = pole_epsilon.unwrap_or(models::POLE_EPSILON);
    models::gep_ln_displacement_with(mw, ay_ratio, period_ratio, eps).map_err(model_err)
}

#[pyfunction]
fn model_ids() -> Vec<&'static str> {
    ModelId::ALL.iter().map(|m| m.id()).collect()
}

#[pyclass(get_all, frozen)]
struct Prediction {
    model: String,
    value: f64,
    scale: String,
    ln_d_meters: f64,
    d_meters: f64,
    in_range: bool,
}

#[pymethods]
impl Prediction {
    fn __repr__(&self) -> String {
        format!(
            "Prediction(model={:?}, value={}, scale={:?}, d_meters={}, in_range={})",
            self.model,
            self.value,
            self.scale,
            self.d_meters,
            if self.in_range { "True" } else { "False" }
        )
    }
}

/// Prediction of a registered model for one case.
#[pyfunction]
#[pyo3(signature = (model, mw, amax, tp, td, ay, tm=None, ambraseys_cm=false))]
#[allow(clippy::too_many_arguments)]
fn predict(
    model: &str,
    mw: f64,
    amax: f64,
    tp: f64,
    td: f64,
    ay: f64,
    tm: Option<f64>,
    ambraseys_cm: bool,
) -> PyResult<Prediction> {
    let id: ModelId = model.parse().map_err(model_err)?;
    let input = ModelInput::new(mw, amax, tp, td, ay, tm).map_err(model_err)?;
    let options = ModelOptions { ambraseys_in_centimeters: ambraseys_cm, ..ModelOptions::default() };
    let p = models::predict(id, &input, &options).map_err(model_err)?;
    Ok(Prediction {
        model: id.id().to_string(),
        value: p.value,
        scale: p.scale.tag().to_string(),
        ln_d_meters: p.ln_d_meters(),
        d_meters: p.d_meters,
        in_range: p.in_range,
    })
}

/// Multigenic chromosome in the `tokens | constants` text form.
#[pyclass(frozen)]
struct Chromosome {
    inner: karva::Chromosome,
}

#[pymethods]
impl Chromosome {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Chromosome { inner: text.parse().map_err(value_err)? })
    }

    /// Value at `inputs`, or None when the expression is not finite there.
    fn evaluate(&self, inputs: Vec<f64>) -> PyResult<Option<f64>> {
        self.inner.evaluate(&inputs).map_err(value_err)
    }

    fn infix(&self) -> PyResult<String> {
        self.inner.to_infix().map_err(value_err)
    }

    #[getter]
    fn num_genes(&self) -> usize {
        self.inner.genes.len()
    }

    #[getter]
    fn head_len(&self) -> usize {
        self.inner.head_len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Chromosome({:?})", self.inner.to_string())
    }
}

#[pyclass(get_all, frozen)]
struct RunResult {
    best: Py<Chromosome>,
    fitness: f64,
    rmse: Option<f64>,
    history: Vec<(usize, f64, f64)>,
}

/// Evolves a model of `targets` from `rows`. `config` is the TOML text of a
/// GEP configuration; omitted keys keep their defaults.
#[pyfunction]
#[pyo3(signature = (rows, targets, seed=0, config=None))]
fn evolve(py: Python<'_>, rows: Vec<Vec<f64>>, targets: Vec<f64>, seed: u64, config: Option<&str>) -> PyResult<RunResult> {
    let mut cfg = match config {
        Some(text) => GepConfig::from_toml_str(text).map_err(value_err)?,
        None => GepConfig::default(),
    };
    cfg.rng_seed = seed;
    let data = TrainingData::new(rows, targets).map_err(value_err)?;
    let outcome = py.detach(|| evolution::run(&cfg, &data)).map_err(value_err)?;
    Ok(RunResult {
        best: Py::new(py, Chromosome { inner: outcome.best })?,
        fitness: outcome.report.fitness,
        rmse: outcome.report.rmse,
        history: outcome.history.iter().map(|h| (h.generation, h.best_fitness, h.mean_fitness)).collect(),
    })
}

#[pyclass(get_all, frozen)]
struct Metrics {
    n: usize,
    r_squared: f64,
    mae_normalized: f64,
    mae_conventional: f64,
    rmse: f64,
    scatter_index: f64,
    bias: f64,
}

#[pyfunction]
fn metrics_report(measured: Vec<f64>, predicted: Vec<f64>) -> PyResult<Metrics> {
    let set = PredictionSet::new(measured, predicted).map_err(value_err)?;
    let m = metrics::MetricsReport::compute(&set).map_err(value_err)?;
    Ok(Metrics {
        n: m.n,
        r_squared: m.r_squared,
        mae_normalized: m.mae_normalized,
        mae_conventional: m.mae_conventional,
        rmse: m.rmse,
        scatter_index: m.scatter_index,
        bias: m.bias,
    })
}

#[pyfunction]
fn relative_error(measured: f64, predicted: f64) -> PyResult<f64> {
    metrics::relative_error(measured, predicted).map_err(value_err)
}

type Row = (String, f64, f64, f64, f64, f64, f64, Option<f64>);

fn to_row(r: &CaseHistory) -> Row {
    (r.id.clone(), r.mw, r.amax, r.tp, r.td, r.ay, r.d, r.tm)
}

/// Case histories as `(id, Mw, amax, Tp, Td, ay, D, Tm)` tuples.
#[pyfunction]
fn load_csv(path: &str) -> PyResult<Vec<Row>> {
    Ok(dataset::load(path).map_err(value_err)?.iter().map(to_row).collect())
}

/// Synthetic case histories drawn to the published statistics
/// (`targets` is `all`, `training` or `testing`), saved to `path` when given.
#[pyfunction]
#[pyo3(signature = (n, seed=0, targets="all", path=None))]
fn synthesize(n: usize, seed: u64, targets: &str, path: Option<&str>) -> PyResult<Vec<Row>> {
    let table = match targets {
        "all" => SummaryTable::published_all_data(),
        "training" => SummaryTable::published_training(),
        "testing" => SummaryTable::published_testing(),
        other => return Err(PyValueError::new_err(format!("unknown targets `{other}`"))),
    };
    let records = dataset::synthesize(&table, n, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(value_err)?;
    if let Some(path) = path {
        dataset::save(&records, path).map_err(value_err)?;
    }
    Ok(records.iter().map(to_row).collect())
}

/// Matched split of the records in `path`: `(training ids, testing ids, score)`.
#[pyfunction]
#[pyo3(signature = (path, fraction=0.75, trials=10_000, seed=0))]
fn split_csv(path: &str, fraction: f64, trials: usize, seed: u64) -> PyResult<(Vec<String>, Vec<String>, f64)> {
    let records = dataset::load(path).map_err(value_err)?;
    let split = dataset::split_matched(&records, fraction, trials, seed).map_err(value_err)?;
    let ids = |idx: &[usize]| idx.iter().map(|&i| records[i].id.clone()).collect();
    Ok((ids(&split.training), ids(&split.testing), split.score))
}

/// Runs the command-line tool with `args` (without the program name) and
/// returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> PyResult<i32> {
    let argv: Vec<String> = std::iter::once("embgep".to_string()).chain(args).collect();
    let code = py.detach(|| std::panic::catch_unwind(|| embgep::cli::run(argv)));
    code.map_err(|_| PyRuntimeError::new_err("embgep panicked"))
}

#[pymodule]
fn embgep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PoleError", m.py().get_type::<PoleError>())?;
    m.add("POLE_EPSILON", models::POLE_EPSILON)?;
    m.add("POLE_PERIOD_RATIO", models::POLE_PERIOD_RATIO)?;
    m.add_class::<Prediction>()?;
    m.add_class::<Chromosome>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<Metrics>()?;
    m.add_function(wrap_pyfunction!(gep_ln_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(model_ids, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(metrics_report, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(split_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
