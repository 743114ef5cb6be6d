//! Python bindings: the `lgga_py` extension module.

use std::path::PathBuf;

use lgga::bench::{self, BenchmarkProblem};
use lgga::dataset::{CsvOptions, DataPoint, Dataset};
use lgga::engine::{self, Engine, RunConfig, RunResult};
use lgga::expr::{
    parse_with_names, semantically_equivalent, Alphabet, BinaryOp, ConstantPolicy,
    EquivalenceCheck, Expr, UnaryOp,
};
use lgga::truths::{self, AuxiliaryTruth};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An expression tree together with the variable names it prints with.
#[pyclass(name = "Expr", module = "lgga_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyExpr {
    expr: Expr,
    names: Vec<String>,
}

#[pymethods]
impl PyExpr {
    #[staticmethod]
    fn parse(text: &str, names: Vec<String>) -> PyResult<PyExpr> {
        let expr = parse_with_names(text, &names).map_err(value_err)?;
        Ok(PyExpr { expr, names })
    }

    fn evaluate(&self, inputs: Vec<f64>) -> PyResult<f64> {
        self.expr.evaluate(&inputs).map_err(value_err)
    }

    #[getter]
    fn complexity(&self) -> usize {
        self.expr.complexity()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.expr.depth()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn __str__(&self) -> String {
        self.expr.to_text(&self.names)
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.__str__())
    }
}

/// Labelled input rows with per-row provenance.
#[pyclass(name = "Dataset", module = "lgga_py", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(names: Vec<String>, inputs: Vec<Vec<f64>>, labels: Vec<f64>) -> PyResult<PyDataset> {
        if inputs.len() != labels.len() {
            return Err(PyValueError::new_err(format!(
                "{} input rows but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        let points = inputs
            .into_iter()
            .zip(labels)
            .map(|(x, y)| DataPoint::original(x, y))
            .collect();
        let inner = Dataset::from_points(names, points).map_err(value_err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<PyDataset> {
        let inner = Dataset::load_csv(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(PyDataset { inner })
    }

    #[pyo3(signature = (path, strip_provenance = false))]
    fn save_csv(&self, path: PathBuf, strip_provenance: bool) -> PyResult<()> {
        self.inner
            .save_csv(&path, CsvOptions { strip_provenance })
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn inputs(&self) -> Vec<Vec<f64>> {
        self.inner.points().iter().map(|p| p.inputs.clone()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<f64> {
        self.inner.labels()
    }

    /// `original` or `generated:<truth>:<generation>` for each row.
    #[getter]
    fn provenance(&self) -> Vec<String> {
        self.inner.points().iter().map(|p| p.provenance.to_string()).collect()
    }

    #[getter]
    fn count_generated(&self) -> usize {
        self.inner.count_generated()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} rows over {})",
            self.inner.len(),
            self.inner.names().join(", ")
        )
    }
}

/// One parsed auxiliary truth.
#[pyclass(name = "Truth", module = "lgga_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyTruth {
    inner: AuxiliaryTruth,
}

#[pymethods]
impl PyTruth {
    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn generative(&self) -> bool {
        self.inner.is_generative()
    }

    fn violation(&self, candidate: &PyExpr, inputs: Vec<f64>) -> PyResult<f64> {
        self.inner.violation(&candidate.expr, &inputs).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Truth('{}')", self.inner.id)
    }
}

fn unwrap_truths(truths: &[PyTruth]) -> Vec<AuxiliaryTruth> {
    truths.iter().map(|t| t.inner.clone()).collect()
}

/// Parses truth lines (one per line, `#` comments allowed) over `names`.
#[pyfunction]
fn parse_truths(text: &str, names: Vec<String>) -> PyResult<Vec<PyTruth>> {
    let parsed = truths::parse_truths(text, &names).map_err(value_err)?;
    Ok(parsed.into_iter().map(|inner| PyTruth { inner }).collect())
}

/// Mean over truths of the largest violation across the dataset.
#[pyfunction]
fn truth_error(candidate: &PyExpr, dataset: &PyDataset, truths: Vec<PyTruth>) -> f64 {
    truths::truth_error(&unwrap_truths(&truths), &candidate.expr, &dataset.inner)
}

/// Returns `(mse, truth_error, total)` with `total = mse + lambda * truth_error`.
#[pyfunction]
#[pyo3(signature = (candidate, dataset, truths, lambda_truth = 1.0))]
fn total_loss(
    candidate: &PyExpr,
    dataset: &PyDataset,
    truths: Vec<PyTruth>,
    lambda_truth: f64,
) -> (f64, f64, f64) {
    let b = engine::total_loss(&candidate.expr, &dataset.inner, &unwrap_truths(&truths), lambda_truth);
    (b.mse, b.truth_error, b.total)
}

/// Outcome of one search.
#[pyclass(name = "RunResult", module = "lgga_py", frozen)]
struct PyRunResult {
    inner: RunResult,
    names: Vec<String>,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn best(&self) -> PyExpr {
        PyExpr {
            expr: self.inner.best.clone(),
            names: self.names.clone(),
        }
    }

    #[getter]
    fn best_mse(&self) -> f64 {
        self.inner.best_mse
    }

    #[getter]
    fn best_truth_error(&self) -> f64 {
        self.inner.best_truth_error
    }

    #[getter]
    fn augmented(&self) -> PyDataset {
        PyDataset {
            inner: self.inner.augmented.clone(),
        }
    }

    #[getter]
    fn generations(&self) -> usize {
        self.inner.reports.len()
    }

    #[getter]
    fn termination(&self) -> String {
        serde_json::to_value(self.inner.termination)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_else(|| format!("{:?}", self.inner.termination))
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged()
    }

    /// Per-generation reports as a JSON array.
    fn reports_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.reports).map_err(value_err)
    }
}

fn build_alphabet(
    names: &[String],
    unary: &[String],
    binary: &[String],
    constants: &str,
) -> PyResult<Alphabet> {
    let unary = unary
        .iter()
        .map(|n| UnaryOp::from_name(n).ok_or_else(|| PyValueError::new_err(format!("unknown unary operator `{n}`"))))
        .collect::<PyResult<Vec<_>>>()?;
    let binary = binary
        .iter()
        .map(|n| BinaryOp::from_name(n).ok_or_else(|| PyValueError::new_err(format!("unknown binary operator `{n}`"))))
        .collect::<PyResult<Vec<_>>>()?;
    let constants: ConstantPolicy = constants.parse().map_err(value_err)?;
    Alphabet::with_ops(names.iter().cloned(), unary, binary, constants).map_err(value_err)
}

fn default_unary() -> Vec<String> {
    ["neg", "sin", "cos"].map(String::from).to_vec()
}

fn default_binary() -> Vec<String> {
    ["add", "sub", "mul", "div"].map(String::from).to_vec()
}

/// Runs a search. `config` is a JSON run config; keyword overrides win.
#[pyfunction]
#[pyo3(signature = (
    dataset,
    truths = Vec::new(),
    config = None,
    mode = None,
    lambda_truth = None,
    generations = None,
    population_size = None,
    seed = None,
    unary = None,
    binary = None,
    constants = "int:-1:1",
))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    dataset: &PyDataset,
    truths: Vec<PyTruth>,
    config: Option<&str>,
    mode: Option<&str>,
    lambda_truth: Option<f64>,
    generations: Option<usize>,
    population_size: Option<usize>,
    seed: Option<u64>,
    unary: Option<Vec<String>>,
    binary: Option<Vec<String>>,
    constants: &str,
) -> PyResult<PyRunResult> {
    let mut cfg = match config {
        Some(text) => RunConfig::from_json(text).map_err(value_err)?,
        None => RunConfig::default(),
    };
    if let Some(m) = mode {
        cfg.mode = m.parse().map_err(value_err)?;
    }
    if let Some(l) = lambda_truth {
        cfg.lambda_truth = l;
    }
    if let Some(g) = generations {
        cfg.num_generations = g;
    }
    if let Some(p) = population_size {
        cfg.population_size = p;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let names = dataset.inner.names().to_vec();
    let alphabet = build_alphabet(
        &names,
        &unary.unwrap_or_else(default_unary),
        &binary.unwrap_or_else(default_binary),
        constants,
    )?;
    let truths = unwrap_truths(&truths);
    let data = dataset.inner.clone();
    let engine = Engine::new(cfg).map_err(value_err)?;
    let inner = py
        .detach(|| engine.run(data, &truths, &alphabet))
        .map_err(value_err)?;
    Ok(PyRunResult { inner, names })
}

/// A registered benchmark problem.
#[pyclass(name = "Problem", module = "lgga_py", frozen)]
struct PyProblem {
    inner: BenchmarkProblem,
}

#[pymethods]
impl PyProblem {
    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn slug(&self) -> String {
        self.inner.slug.clone()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn ranges(&self) -> Vec<(f64, f64)> {
        self.inner.ranges.clone()
    }

    #[getter]
    fn ground_truth(&self) -> PyExpr {
        PyExpr {
            expr: self.inner.ground_truth.clone(),
            names: self.inner.names().to_vec(),
        }
    }

    #[getter]
    fn truths_text(&self) -> String {
        self.inner.truths_dsl.clone()
    }

    #[getter]
    fn truths(&self) -> Vec<PyTruth> {
        self.inner
            .truths
            .iter()
            .map(|t| PyTruth { inner: t.clone() })
            .collect()
    }

    #[getter]
    fn unverified(&self) -> bool {
        self.inner.unverified
    }

    fn evaluate(&self, inputs: Vec<f64>) -> PyResult<f64> {
        if inputs.len() != self.inner.arity() {
            return Err(PyValueError::new_err(format!(
                "expected {} inputs, got {}",
                self.inner.arity(),
                inputs.len()
            )));
        }
        Ok(self.inner.evaluate(&inputs))
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> PyDataset {
        PyDataset {
            inner: self.inner.sample(n, seed),
        }
    }

    #[pyo3(signature = (candidate, seed = 0))]
    fn is_solved_by(&self, candidate: &PyExpr, seed: u64) -> bool {
        self.inner
            .is_solved_by(&candidate.expr, EquivalenceCheck::default(), seed)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}')", self.inner.slug)
    }
}

/// Slugs of the registered problems.
#[pyfunction]
#[pyo3(signature = (include_unverified = false))]
fn problems(include_unverified: bool) -> Vec<String> {
    let list = if include_unverified {
        bench::extended_registry()
    } else {
        bench::registry()
    };
    list.into_iter().map(|p| p.slug).collect()
}

/// Looks a problem up by name or slug.
#[pyfunction]
fn problem(name: &str) -> PyResult<PyProblem> {
    let inner = bench::problem(name).map_err(value_err)?;
    Ok(PyProblem { inner })
}

/// Draws `n` oracle rows for a problem.
#[pyfunction]
#[pyo3(signature = (name, n, seed = 0))]
fn sample(name: &str, n: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(problem(name)?.sample(n, seed))
}

/// Augments `initial_m` oracle rows and writes the CSV plus a JSON sidecar.
/// Returns the sidecar metadata as JSON.
#[pyfunction]
#[pyo3(signature = (name, initial_m, path, seed = 0, generations = None, strip_provenance = false))]
fn export(
    py: Python<'_>,
    name: &str,
    initial_m: usize,
    path: PathBuf,
    seed: u64,
    generations: Option<usize>,
    strip_provenance: bool,
) -> PyResult<String> {
    let p = bench::problem(name).map_err(value_err)?;
    let mut config = RunConfig {
        seed,
        ..RunConfig::default()
    };
    if let Some(g) = generations {
        config.num_generations = g;
    }
    let meta = py
        .detach(|| bench::export_augmented(&p, initial_m, &config, &path, CsvOptions { strip_provenance }))
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    serde_json::to_string(&meta).map_err(value_err)
}

/// Sampling-based equivalence of `a` against the reference `b`.
#[pyfunction]
#[pyo3(signature = (a, b, ranges, samples = 1000, rtol = 1e-6, seed = 0))]
fn equivalent(
    a: &PyExpr,
    b: &PyExpr,
    ranges: Vec<(f64, f64)>,
    samples: usize,
    rtol: f64,
    seed: u64,
) -> PyResult<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    semantically_equivalent(&a.expr, &b.expr, &ranges, &mut rng, EquivalenceCheck { samples, rtol })
        .map_err(value_err)
}

#[pymodule]
fn lgga_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTruth>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(parse_truths, m)?)?;
    m.add_function(wrap_pyfunction!(truth_error, m)?)?;
    m.add_function(wrap_pyfunction!(total_loss, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(problem, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(export, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    Ok(())
}
