//! Python bindings for `ealab`.

use ealab::bounds::{self, PhaseParams};
use ealab::harness::{self, FitnessChoice, Format, SweepSpec};
use ealab::seed::rng_from_seed;
use ealab::{tree, Ea0Spec, TakeoverSpec, TiePolicy, Variant};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

fn err(e: ealab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = ealab::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    match value {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(x) => match (x.as_i64(), x.as_u64()) {
            (Some(i), _) => i.into_bound_py_any(py),
            (None, Some(u)) => u.into_bound_py_any(py),
            _ => x.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, to_py(py, v)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// Bit string of fixed length.
#[pyclass(name = "BitString", module = "ealab_py")]
struct PyBitString {
    inner: ealab::BitString,
}

#[pymethods]
impl PyBitString {
    #[new]
    fn new(bits: &str) -> PyResult<Self> {
        Ok(PyBitString { inner: parse(bits)? })
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> Self {
        PyBitString {
            inner: ealab::BitString::random(n, &mut rng_from_seed(seed)),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BitString('{}')", self.inner)
    }

    fn __eq__(&self, other: PyRef<'_, PyBitString>) -> bool {
        self.inner == other.inner
    }

    fn count_ones(&self) -> usize {
        self.inner.count_ones()
    }

    fn hamming(&self, other: PyRef<'_, PyBitString>) -> PyResult<usize> {
        if other.inner.len() != self.inner.len() {
            return Err(PyValueError::new_err("length mismatch"));
        }
        Ok(self.inner.hamming(&other.inner))
    }

    /// Standard-bit mutation with flip probability `p`.
    fn mutate(&self, p: f64, seed: u64) -> PyResult<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PyValueError::new_err("p must lie in [0, 1]"));
        }
        Ok(PyBitString {
            inner: ealab::mutate(&self.inner, p, &mut rng_from_seed(seed)),
        })
    }
}

/// Outcome of one run.
#[pyclass(name = "RunResult", module = "ealab_py", get_all)]
struct PyRunResult {
    iterations_to_opt: Option<u64>,
    iterations: u64,
    evaluations: u64,
    hit_optimum: bool,
    best_fitness_trace: Vec<i64>,
}

impl From<ealab::RunResult> for PyRunResult {
    fn from(r: ealab::RunResult) -> Self {
        PyRunResult {
            iterations_to_opt: r.iterations_to_opt,
            iterations: r.iterations,
            evaluations: r.evaluations,
            hit_optimum: r.hit_optimum,
            best_fitness_trace: r.best_fitness_trace,
        }
    }
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(iterations={}, evaluations={}, hit_optimum={})",
            self.iterations, self.evaluations, self.hit_optimum
        )
    }
}

/// Configuration of one EA; `variant` is plus, comma or fair-plus.
#[pyclass(name = "EaConfig", module = "ealab_py")]
struct PyEaConfig {
    inner: ealab::EaConfig,
}

#[pymethods]
impl PyEaConfig {
    #[new]
    #[pyo3(signature = (n, mu=1, lambda_=1, variant="plus", c=1.0, tie_policy="offspring-first", seed=0, max_iterations=None, traces=true))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        mu: usize,
        lambda_: usize,
        variant: &str,
        c: f64,
        tie_policy: &str,
        seed: u64,
        max_iterations: Option<u64>,
        traces: bool,
    ) -> PyResult<Self> {
        let mut config = ealab::EaConfig::new(n, mu, lambda_, parse::<Variant>(variant)?)
            .with_rate(ealab::MutationRate::new(c).map_err(err)?)
            .with_tie_policy(parse::<TiePolicy>(tie_policy)?)
            .with_seed(seed)
            .with_traces(traces);
        if let Some(budget) = max_iterations {
            config = config.with_budget(budget);
        }
        config.validate().map_err(err)?;
        Ok(PyEaConfig { inner: config })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn mu(&self) -> usize {
        self.inner.mu
    }

    #[getter]
    fn lambda_(&self) -> usize {
        self.inner.lambda
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant.to_string()
    }

    #[getter]
    fn max_iterations(&self) -> u64 {
        self.inner.max_iterations
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// `fitness` is onemax or multi:<k>.
    #[pyo3(signature = (fitness="onemax"))]
    fn run(&self, py: Python<'_>, fitness: &str) -> PyResult<PyRunResult> {
        let f = parse::<FitnessChoice>(fitness)?.build(self.inner.n).map_err(err)?;
        let config = self.inner.clone();
        let result = py.detach(|| ealab::run(&config, &f)).map_err(err)?;
        Ok(result.into())
    }

    #[pyo3(signature = (replicates, fitness="onemax"))]
    fn run_batch(&self, py: Python<'_>, replicates: usize, fitness: &str) -> PyResult<Vec<PyRunResult>> {
        let f = parse::<FitnessChoice>(fitness)?.build(self.inner.n).map_err(err)?;
        let config = self.inner.clone();
        let results = py.detach(|| ealab::run_batch(&config, &f, replicates)).map_err(err)?;
        Ok(results.into_iter().map(Into::into).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "EaConfig(n={}, mu={}, lambda_={}, variant='{}', seed={})",
            self.inner.n, self.inner.mu, self.inner.lambda, self.inner.variant, self.inner.seed
        )
    }
}

/// Terms and total of the master runtime bound, plus phase parameters when
/// λ/μ > e.
#[pyfunction]
#[pyo3(name = "master_bound", signature = (n, mu, lambda_))]
fn py_master_bound(py: Python<'_>, n: f64, mu: f64, lambda_: f64) -> PyResult<Bound<'_, PyAny>> {
    let out = to_dict(py, &ealab::master_bound(n, mu, lambda_))?;
    if let Ok(phases) = PhaseParams::new(n, mu, lambda_) {
        out.set_item("phases", to_dict(py, &phases)?)?;
    }
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (mu, lambda_, j1, j2))]
fn takeover_bound_general(mu: f64, lambda_: f64, j1: u64, j2: u64) -> PyResult<f64> {
    bounds::takeover_bound_general(mu, lambda_, j1, j2).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (mu, lambda_, j1, j2))]
fn takeover_bound_fast(mu: f64, lambda_: f64, j1: u64, j2: u64) -> PyResult<f64> {
    bounds::takeover_bound_fast(mu, lambda_, j1, j2).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, mu, lambda_, i, mu0))]
fn level_bound_general(n: f64, mu: f64, lambda_: f64, i: u64, mu0: u64) -> PyResult<f64> {
    bounds::level_bound_general(n, mu, lambda_, i, mu0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, mu, lambda_, i, mu0))]
fn level_bound_fast(n: f64, mu: f64, lambda_: f64, i: u64, mu0: u64) -> PyResult<f64> {
    bounds::level_bound_fast(n, mu, lambda_, i, mu0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (mu, lambda_))]
fn sudholt_bound(mu: u64, lambda_: f64) -> PyResult<f64> {
    bounds::sudholt_bound(mu, lambda_).map_err(err)
}

/// Takeover-time statistics on OneMax at level `i`.
#[pyfunction]
#[pyo3(signature = (n, mu, lambda_, i, j1=1, j2=None, replicates=1000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn measure_takeover(
    py: Python<'_>,
    n: usize,
    mu: usize,
    lambda_: usize,
    i: usize,
    j1: usize,
    j2: Option<usize>,
    replicates: usize,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let spec = TakeoverSpec::new(n, mu, lambda_, i, j1, j2.unwrap_or(mu))
        .with_replicates(replicates)
        .with_seed(seed);
    let stats = py.detach(|| ealab::measure_takeover(&spec)).map_err(err)?;
    to_dict(py, &stats)
}

/// Statistics of the copy-only process.
#[pyfunction]
#[pyo3(signature = (n, mu, lambda_, j1=1, j2=None, replicates=1000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn run_ea0(
    py: Python<'_>,
    n: usize,
    mu: usize,
    lambda_: usize,
    j1: usize,
    j2: Option<usize>,
    replicates: usize,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let spec = Ea0Spec::new(n, mu, lambda_, j1, j2.unwrap_or(mu))
        .with_replicates(replicates)
        .with_seed(seed);
    let stats = py.detach(|| ealab::run_ea0(&spec)).map_err(err)?;
    to_dict(py, &stats)
}

#[pyfunction]
#[pyo3(signature = (t, lambda_, ell))]
fn count_at_distance(t: u64, lambda_: u64, ell: u64) -> BigUint {
    tree::count_at_distance(t, lambda_, ell)
}

/// Node count per distance of an explicitly built complete tree.
#[pyfunction]
#[pyo3(signature = (t, lambda_))]
fn tree_census(t: u32, lambda_: u32) -> PyResult<Vec<u64>> {
    Ok(tree::CompleteTree::build(t, lambda_).map_err(err)?.distance_census())
}

#[pyfunction]
fn p_opt(ell: u64, n: usize) -> f64 {
    tree::p_opt(ell, n)
}

#[pyfunction]
#[pyo3(signature = (root, target, ell, samples, seed=0))]
fn verify_p_opt<'py>(
    py: Python<'py>,
    root: PyRef<'py, PyBitString>,
    target: PyRef<'py, PyBitString>,
    ell: u64,
    samples: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let check = tree::verify_p_opt(&root.inner, &target.inner, ell, samples, &mut rng_from_seed(seed)).map_err(err)?;
    to_dict(py, &check)
}

#[pyfunction]
#[pyo3(signature = (t, n, mu, lambda_))]
fn q_opt_bound(py: Python<'_>, t: u64, n: usize, mu: f64, lambda_: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &tree::q_opt_bound(t, n, mu, lambda_))
}

/// Runs a grid and returns the table as CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (ns, mus=vec![1], lambdas=vec![1], variant="plus", fitness="onemax", replicates=100, seed=0, budget_mult=10.0, format="csv"))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    ns: Vec<usize>,
    mus: Vec<usize>,
    lambdas: Vec<usize>,
    variant: &str,
    fitness: &str,
    replicates: usize,
    seed: u64,
    budget_mult: f64,
    format: &str,
) -> PyResult<String> {
    let spec = SweepSpec {
        ns,
        mus,
        lambdas,
        variant: parse(variant)?,
        fitness: parse(fitness)?,
        replicates,
        master_seed: seed,
        budget_mult,
        ..SweepSpec::default()
    };
    let format: Format = parse(format)?;
    let table = py.detach(|| harness::sweep(&spec)).map_err(err)?;
    Ok(String::from_utf8(harness::emit(&table, format)).expect("emit writes UTF-8"))
}

/// Ratio fit of a CSV table produced by `sweep`.
#[pyfunction]
fn fit_ratio<'py>(py: Python<'py>, csv_text: &str) -> PyResult<Bound<'py, PyAny>> {
    let table = harness::parse_csv(csv_text).map_err(err)?;
    to_dict(py, &harness::fit_ratio(&table).map_err(err)?)
}

#[pymodule]
fn ealab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitString>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyEaConfig>()?;
    m.add_function(wrap_pyfunction!(py_master_bound, m)?)?;
    m.add_function(wrap_pyfunction!(takeover_bound_general, m)?)?;
    m.add_function(wrap_pyfunction!(takeover_bound_fast, m)?)?;
    m.add_function(wrap_pyfunction!(level_bound_general, m)?)?;
    m.add_function(wrap_pyfunction!(level_bound_fast, m)?)?;
    m.add_function(wrap_pyfunction!(sudholt_bound, m)?)?;
    m.add_function(wrap_pyfunction!(measure_takeover, m)?)?;
    m.add_function(wrap_pyfunction!(run_ea0, m)?)?;
    m.add_function(wrap_pyfunction!(count_at_distance, m)?)?;
    m.add_function(wrap_pyfunction!(tree_census, m)?)?;
    m.add_function(wrap_pyfunction!(p_opt, m)?)?;
    m.add_function(wrap_pyfunction!(verify_p_opt, m)?)?;
    m.add_function(wrap_pyfunction!(q_opt_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ratio, m)?)?;
    Ok(())
}
