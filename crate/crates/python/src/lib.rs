//! Python bindings. Pdfs cross the boundary as JSON in the same record
//! format as the JSON-lines dataset files.

#![allow(clippy::too_many_arguments)]

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use unn_core::baselines::most_probable_class_oracle;
use unn_core::io::{read_objects, write_objects, CertainDataset};
use unn_core::manet::ManetScenario;
use unn_core::seed::rng_from;
use unn_core::{
    CdfMode, ClassificationResult, Classifier, ManetParams, Pdf, Point, SpreadConfig,
    UncertainObject, UnnError, UnnParams,
};

create_exception!(unn, UnnException, PyValueError, "Invalid input to the classifier.");

fn err(e: UnnError) -> PyErr {
    UnnException::new_err(e.to_string())
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(err)
}

fn parse_pdf(json: &str) -> PyResult<Pdf> {
    let line = format!("{{\"pdf\":{json}}}");
    let mut objects = read_objects(line.as_bytes()).map_err(err)?;
    Ok(objects.pop().expect("one record").pdf().clone())
}

fn params(k: usize, h: usize, n_samples: Option<usize>, seed: u64, cdf: &str) -> PyResult<UnnParams> {
    let cdf_mode = match cdf {
        "auto" => CdfMode::Auto,
        "monte-carlo" => CdfMode::MonteCarlo,
        "exact" => CdfMode::Exact,
        other => return Err(UnnException::new_err(format!("unknown cdf mode `{other}`"))),
    };
    let p = UnnParams { k, h, n_samples, query_samples: n_samples, seed, cdf_mode, ..UnnParams::default() };
    p.validate().map_err(err)?;
    Ok(p)
}

/// Labeled uncertain training set.
#[pyclass(frozen, name = "Dataset", module = "unn")]
struct PyDataset {
    inner: unn_core::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Parses JSON-lines object records.
    #[staticmethod]
    fn from_json_lines(text: &str) -> PyResult<Self> {
        let objects = read_objects(text.as_bytes()).map_err(err)?;
        Ok(PyDataset { inner: unn_core::Dataset::new(objects).map_err(err)? })
    }

    /// Point masses at `points`.
    #[staticmethod]
    fn from_points(points: Vec<Vec<f64>>, labels: Vec<String>) -> PyResult<Self> {
        let data = certain(points, labels)?;
        Ok(PyDataset { inner: unn_core::Dataset::new(data.to_certain_objects()).map_err(err)? })
    }

    /// Injects uncertainty with spread `s` into certain points. `mode` is
    /// "mixed" (normal or uniform per dimension) or "gaussian".
    #[staticmethod]
    #[pyo3(signature = (points, labels, spread, seed=0, mode="mixed"))]
    fn inject(points: Vec<Vec<f64>>, labels: Vec<String>, spread: f64, seed: u64, mode: &str) -> PyResult<Self> {
        let data = certain(points, labels)?;
        let cfg = SpreadConfig::for_dataset(&data, spread, seed).map_err(err)?;
        let inner = match mode {
            "mixed" => unn_core::inject_uncertainty(&data, &cfg),
            "gaussian" => unn_core::inject_gaussian_uncertainty(&data, &cfg),
            other => return Err(UnnException::new_err(format!("unknown mode `{other}`"))),
        }
        .map_err(err)?;
        Ok(PyDataset { inner })
    }

    fn to_json_lines(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_objects(&mut buf, self.inner.objects()).map_err(err)?;
        Ok(String::from_utf8(buf).expect("json is utf-8"))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(len={}, dim={}, labels={:?})", self.inner.len(), self.inner.dim(), self.inner.labels())
    }
}

fn certain(points: Vec<Vec<f64>>, labels: Vec<String>) -> PyResult<CertainDataset> {
    let points = points.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
    CertainDataset::new(points, labels).map_err(err)
}

#[pyclass(frozen, get_all, name = "Classification", module = "unn")]
struct PyClassification {
    label: String,
    probs: BTreeMap<String, f64>,
    candidates: usize,
    tie: bool,
}

#[pymethods]
impl PyClassification {
    fn __repr__(&self) -> String {
        format!("Classification(label={:?}, probs={:?})", self.label, self.probs)
    }
}

impl From<ClassificationResult> for PyClassification {
    fn from(r: ClassificationResult) -> Self {
        PyClassification {
            label: r.label,
            probs: r.class_probs,
            candidates: r.candidates_examined,
            tie: r.tie,
        }
    }
}

/// UNN label and class probabilities for a certain query.
#[pyfunction]
#[pyo3(signature = (dataset, query, k=1, h=100, n_samples=None, seed=0, cdf="auto"))]
fn classify(
    py: Python<'_>,
    dataset: &PyDataset,
    query: Vec<f64>,
    k: usize,
    h: usize,
    n_samples: Option<usize>,
    seed: u64,
    cdf: &str,
) -> PyResult<PyClassification> {
    let p = params(k, h, n_samples, seed, cdf)?;
    let q = point(query)?;
    let r = py.detach(|| Classifier::new(&dataset.inner, &p).classify(&q)).map_err(err)?;
    Ok(r.into())
}

/// Like `classify` for a query given as a JSON pdf.
#[pyfunction]
#[pyo3(signature = (dataset, pdf_json, k=1, h=100, n_samples=None, seed=0, cdf="auto"))]
fn classify_uncertain(
    py: Python<'_>,
    dataset: &PyDataset,
    pdf_json: &str,
    k: usize,
    h: usize,
    n_samples: Option<usize>,
    seed: u64,
    cdf: &str,
) -> PyResult<PyClassification> {
    let p = params(k, h, n_samples, seed, cdf)?;
    let u = UncertainObject::new(parse_pdf(pdf_json)?, None).map_err(err)?;
    let r = py.detach(|| Classifier::new(&dataset.inner, &p).classify_uncertain(&u)).map_err(err)?;
    Ok(r.into())
}

/// Classifies many certain queries in parallel.
#[pyfunction]
#[pyo3(signature = (dataset, queries, k=1, h=100, n_samples=None, seed=0, cdf="auto"))]
fn classify_batch(
    py: Python<'_>,
    dataset: &PyDataset,
    queries: Vec<Vec<f64>>,
    k: usize,
    h: usize,
    n_samples: Option<usize>,
    seed: u64,
    cdf: &str,
) -> PyResult<Vec<PyClassification>> {
    let p = params(k, h, n_samples, seed, cdf)?;
    let queries = queries
        .into_iter()
        .map(|q| Ok(UncertainObject::certain(point(q)?, None)))
        .collect::<PyResult<Vec<_>>>()?;
    let results = py.detach(|| Classifier::new(&dataset.inner, &p).classify_batch(&queries));
    results.into_iter().map(|r| r.map(Into::into).map_err(err)).collect()
}

/// Probability that the k-th nearest neighbor from class `c` is closer than
/// the one from `c_prime`.
#[pyfunction]
#[pyo3(signature = (dataset, query, c, c_prime, k=1, h=100, n_samples=None, seed=0, cdf="auto"))]
fn nn_class_probability(
    py: Python<'_>,
    dataset: &PyDataset,
    query: Vec<f64>,
    c: &str,
    c_prime: &str,
    k: usize,
    h: usize,
    n_samples: Option<usize>,
    seed: u64,
    cdf: &str,
) -> PyResult<f64> {
    let p = params(k, h, n_samples, seed, cdf)?;
    let q = point(query)?;
    py.detach(|| Classifier::new(&dataset.inner, &p).nn_class_probability(&q, c, c_prime))
        .map_err(err)
}

/// Monte Carlo most-probable-class estimate: (label, class frequencies).
#[pyfunction]
#[pyo3(signature = (dataset, query, k=1, m=10_000, seed=0))]
fn oracle(
    py: Python<'_>,
    dataset: &PyDataset,
    query: Vec<f64>,
    k: usize,
    m: usize,
    seed: u64,
) -> PyResult<(String, BTreeMap<String, f64>)> {
    let q = Pdf::point(point(query)?);
    let vote = py.detach(|| most_probable_class_oracle(&q, &dataset.inner, k, m, seed)).map_err(err)?;
    Ok((vote.label, vote.frequencies))
}

/// Probability that at least `k` of the independent events `p` occur.
#[pyfunction]
fn class_cdf_at_radius(p: Vec<f64>, k: usize) -> PyResult<f64> {
    unn_core::class_cdf_at_radius(&p, k).map_err(err)
}

#[pyfunction]
fn brute_force_class_cdf(p: Vec<f64>, k: usize) -> PyResult<f64> {
    unn_core::brute_force_class_cdf(&p, k).map_err(err)
}

#[pyfunction]
fn waypoint_density(x: f64, y: f64, center: (f64, f64), side: f64) -> PyResult<f64> {
    let w = unn_core::WaypointPdf::new(point(vec![center.0, center.1])?, side).map_err(err)?;
    Ok(w.density(&[x, y]))
}

/// Mean of `d(v, nearest node)^alpha` over `n` outcomes of waypoint nodes
/// given as `(cx, cy, side)`.
#[pyfunction]
#[pyo3(signature = (v, nodes, alpha=2.0, n=10_000, seed=0))]
fn network_power(v: (f64, f64), nodes: Vec<(f64, f64, f64)>, alpha: f64, n: usize, seed: u64) -> PyResult<f64> {
    let network = nodes
        .into_iter()
        .map(|(cx, cy, side)| Pdf::waypoint(point(vec![cx, cy])?, side).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    unn_core::network_power(&[v.0, v.1], &network, alpha, n, &mut rng_from(seed)).map_err(err)
}

/// Runs the network demo; returns (unn accuracy, eknn accuracy).
#[pyfunction]
#[pyo3(signature = (seed=0, test_points=2500, power_samples=10_000, eknn_outcomes=1000, alpha=2.0))]
fn manet_experiment(
    py: Python<'_>,
    seed: u64,
    test_points: usize,
    power_samples: usize,
    eknn_outcomes: usize,
    alpha: f64,
) -> PyResult<(f64, f64)> {
    let scenario = ManetScenario::generate(seed, alpha).map_err(err)?;
    let params = ManetParams {
        test_points,
        power_samples,
        eknn_outcomes,
        grid_resolution: 0,
        seed,
        ..ManetParams::default()
    };
    let report = py.detach(|| unn_core::run_manet_experiment(&scenario, &params)).map_err(err)?;
    Ok((report.unn_accuracy, report.eknn_accuracy))
}

#[pymodule]
fn unn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UnnException", m.py().get_type::<UnnException>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyClassification>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_uncertain, m)?)?;
    m.add_function(wrap_pyfunction!(classify_batch, m)?)?;
    m.add_function(wrap_pyfunction!(nn_class_probability, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(class_cdf_at_radius, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_class_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(waypoint_density, m)?)?;
    m.add_function(wrap_pyfunction!(network_power, m)?)?;
    m.add_function(wrap_pyfunction!(manet_experiment, m)?)?;
    Ok(())
}
