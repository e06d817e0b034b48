//! Python bindings: states, channels, invariants and the protocol drivers.
//!
//! Matrices cross the boundary as nested lists of `complex`; structured
//! results (reports, transcripts) come back as plain dicts.

use std::collections::{BTreeMap, HashMap};

use invlab_core::channels::{ChannelFamily, ChannelKind, KrausChannel};
use invlab_core::invariants::{
    certify_invariant, count_independent, curated_invariants, discover, evaluate_invariant, hint_operators,
    CertifyOptions, DiscoveryOptions, InvariantKind, InvariantSpec,
};
use invlab_core::measurement::measure_observable;
use invlab_core::operators::{expectation, random_mixed_state, random_pure_state};
use invlab_core::protocols::{
    run_qecc_demo, run_qkd, run_remote_transfer, AliceOutcome, EveModel, QeccDemoConfig, QkdConfig,
    RemoteTransferConfig,
};
use invlab_core::{ComplexMatrix, RngSeed, C64};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(invlab, InvlabError, PyValueError);

fn err(e: invlab_core::Error) -> PyErr {
    InvlabError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

/// Round-trips through JSON so every report type maps onto dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| InvlabError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn kind(name: &str) -> PyResult<ChannelKind> {
    name.parse().map_err(err)
}

fn family(name: &str, dim: Option<usize>) -> PyResult<ChannelFamily> {
    let k = kind(name)?;
    let n = dim.or(k.fixed_dim()).ok_or_else(|| InvlabError::new_err(format!("dim is required for {k}")))?;
    ChannelFamily::new(k, n).map_err(err)
}

#[pyclass(name = "DensityMatrix", module = "invlab", from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: invlab_core::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validated state from a square nested list.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self { inner: invlab_core::DensityMatrix::new(matrix(rows)?).map_err(err)? })
    }

    #[staticmethod]
    fn from_bloch(r: [f64; 3]) -> PyResult<Self> {
        Ok(Self { inner: invlab_core::DensityMatrix::from_bloch(r).map_err(err)? })
    }

    #[staticmethod]
    fn from_pure(psi: Vec<C64>) -> PyResult<Self> {
        Ok(Self { inner: invlab_core::DensityMatrix::from_pure(&psi).map_err(err)? })
    }

    /// Ginibre-distributed full-rank state.
    #[staticmethod]
    #[pyo3(signature = (dim, seed = 0))]
    fn random_mixed(dim: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: random_mixed_state(dim, RngSeed::new(seed)).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, seed = 0))]
    fn random_pure(dim: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: random_pure_state(dim, RngSeed::new(seed)).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        self.inner.matrix().rows()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    /// `Tr(ρ O)`.
    fn expectation(&self, op: Vec<Vec<C64>>) -> PyResult<C64> {
        Ok(expectation(&self.inner, &matrix(op)?).map_err(err)?.value)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={}, purity={:.6})", self.inner.dim(), self.inner.purity())
    }
}

#[pyclass(name = "Channel", module = "invlab", from_py_object)]
#[derive(Clone)]
struct PyChannel {
    inner: KrausChannel,
}

#[pymethods]
impl PyChannel {
    /// Catalog channel from explicit parameters, e.g. `Channel("dephasing", 3, {"p": [...]})`.
    #[new]
    #[pyo3(signature = (name, dim = None, params = None))]
    fn new(name: &str, dim: Option<usize>, params: Option<HashMap<String, Vec<f64>>>) -> PyResult<Self> {
        let fam = family(name, dim)?;
        let params: BTreeMap<String, Vec<f64>> = params.unwrap_or_default().into_iter().collect();
        Ok(Self { inner: fam.build(&params).map_err(err)? })
    }

    /// Catalog channel with seeded random admissible parameters.
    #[staticmethod]
    #[pyo3(signature = (name, dim = None, seed = 0))]
    fn sample(name: &str, dim: Option<usize>, seed: u64) -> PyResult<Self> {
        let fam = family(name, dim)?;
        Ok(Self { inner: fam.sample(&mut RngSeed::new(seed).rng()).map_err(err)? })
    }

    /// Arbitrary Kraus list; rejected unless trace preserving.
    #[staticmethod]
    fn from_kraus(name: &str, kraus: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let ops = kraus.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        let dim = ops.first().map(|o| o.dim()).unwrap_or(0);
        Ok(Self { inner: KrausChannel::new(name, dim, ops, BTreeMap::new()).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn params(&self) -> BTreeMap<String, Vec<f64>> {
        self.inner.params.clone()
    }

    fn kraus(&self) -> Vec<Vec<Vec<C64>>> {
        self.inner.kraus.iter().map(|k| k.rows()).collect()
    }

    fn is_cptp(&self) -> bool {
        self.inner.is_cptp()
    }

    /// Largest entry of `Σ E†E - 1`.
    fn max_deviation(&self) -> f64 {
        self.inner.validate_cptp().max_deviation
    }

    fn apply(&self, state: &PyDensityMatrix) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix { inner: self.inner.apply(&state.inner).map_err(err)? })
    }

    /// Heisenberg-picture action `Σ E† O E`.
    fn adjoint_apply(&self, op: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        Ok(self.inner.adjoint_apply(&matrix(op)?).map_err(err)?.rows())
    }

    /// Eigenoperator groups and the three invariant families.
    #[pyo3(signature = (max_exp = 3, max_support = 3, hints = true))]
    fn discover<'py>(&self, py: Python<'py>, max_exp: i32, max_support: usize, hints: bool) -> PyResult<Bound<'py, PyAny>> {
        let hint_ops = match (hints, self.inner.name.parse::<ChannelKind>()) {
            (true, Ok(k)) => curated_invariants(k, self.inner.dim).map(|c| hint_operators(&c)).unwrap_or_default(),
            _ => Vec::new(),
        };
        let opts = DiscoveryOptions {
            max_exponent: max_exp,
            max_support,
            hints: hint_ops,
            ..DiscoveryOptions::default()
        };
        let d = discover(&self.inner, &opts).map_err(err)?;
        let out = pyo3::types::PyDict::new(py);
        out.set_item("lambdas", d.groups.iter().map(|g| g.lambda).collect::<Vec<_>>())?;
        out.set_item("group_dims", d.group_dims())?;
        for (key, list) in [("family1", &d.family1), ("family2", &d.family2), ("family3", &d.family3.invariants)] {
            let items: Vec<PyInvariant> = list.iter().cloned().map(|inner| PyInvariant { inner }).collect();
            out.set_item(key, items)?;
        }
        out.set_item("truncated", d.family3.truncated)?;
        Ok(out.into_any())
    }

    fn __repr__(&self) -> String {
        format!("Channel({:?}, dim={}, kraus={})", self.inner.name, self.inner.dim, self.inner.kraus.len())
    }
}

#[pyclass(name = "Invariant", module = "invlab", from_py_object)]
#[derive(Clone)]
struct PyInvariant {
    inner: InvariantSpec,
}

#[pymethods]
impl PyInvariant {
    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    /// `family1`, `family2` or `family3`.
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            InvariantKind::Family1 => "family1",
            InvariantKind::Family2Ratio => "family2",
            InvariantKind::Family3Product => "family3",
        }
    }

    #[getter]
    fn exponents(&self) -> Vec<i32> {
        self.inner.exponents.clone()
    }

    /// Real parameters carried by this invariant.
    #[getter]
    fn real_count(&self) -> usize {
        self.inner.real_count()
    }

    fn operators(&self) -> Vec<Vec<Vec<C64>>> {
        self.inner.operators.iter().map(|o| o.rows()).collect()
    }

    /// `∏ <O_α>^{r_α}` on `state`.
    fn evaluate(&self, state: &PyDensityMatrix) -> PyResult<C64> {
        evaluate_invariant(&self.inner, &state.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Invariant({:?})", self.inner.label)
    }
}

#[pyfunction]
fn channel_names() -> Vec<&'static str> {
    ChannelKind::ALL.iter().map(|k| k.name()).collect()
}

#[pyfunction(name = "curated_invariants")]
#[pyo3(signature = (channel, dim = None))]
fn py_curated(channel: &str, dim: Option<usize>) -> PyResult<Vec<PyInvariant>> {
    let fam = family(channel, dim)?;
    Ok(curated_invariants(fam.kind, fam.dim)
        .map_err(err)?
        .into_iter()
        .map(|inner| PyInvariant { inner })
        .collect())
}

#[pyfunction(name = "count_independent")]
#[pyo3(signature = (channel, dim = None))]
fn py_count<'py>(py: Python<'py>, channel: &str, dim: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let fam = family(channel, dim)?;
    to_py(py, &count_independent(fam.kind, fam.dim).map_err(err)?)
}

/// Drift of `invariant` over seeded parameter draws and random states.
#[pyfunction]
#[pyo3(signature = (channel, invariant, dim = None, draws = 5, states = 20, tol = 1e-7, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn certify<'py>(
    py: Python<'py>,
    channel: &str,
    invariant: &PyInvariant,
    dim: Option<usize>,
    draws: usize,
    states: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let fam = family(channel, dim)?;
    let opts = CertifyOptions {
        draws,
        states,
        tol,
        seed: RngSeed::new(seed),
        ..CertifyOptions::default()
    };
    let mut report = serde_json::to_value(certify_invariant(&fam, &invariant.inner, &opts).map_err(err)?)
        .map_err(|e| InvlabError::new_err(e.to_string()))?;
    if let Some(m) = report.as_object_mut() {
        m.remove("invariant");
    }
    to_py(py, &report)
}

/// Finite-shot estimate of `<H>` for a Hermitian `H`.
#[pyfunction(name = "measure_observable")]
#[pyo3(signature = (state, observable, shots, seed = 0))]
fn py_measure<'py>(
    py: Python<'py>,
    state: &PyDensityMatrix,
    observable: Vec<Vec<C64>>,
    shots: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = measure_observable(&state.inner, &matrix(observable)?, shots, RngSeed::new(seed)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction(name = "run_qkd")]
#[pyo3(signature = (p, states = 4, copies = 300_000, eve = "none", seed = 0, decoy_fraction = 0.1, threshold = None))]
#[allow(clippy::too_many_arguments)]
fn py_qkd<'py>(
    py: Python<'py>,
    p: f64,
    states: usize,
    copies: usize,
    eve: &str,
    seed: u64,
    decoy_fraction: f64,
    threshold: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let eve: EveModel = eve.parse().map_err(err)?;
    let mut cfg = QkdConfig::new(states, copies, p, eve, RngSeed::new(seed));
    cfg.decoy_fraction = decoy_fraction;
    if let Some(t) = threshold {
        cfg.detection_threshold = t;
    }
    to_py(py, &run_qkd(&cfg).map_err(err)?)
}

#[pyfunction(name = "run_remote_transfer")]
#[pyo3(signature = (m, p, shots = 1_000_000, seed = 0, branch = "plus"))]
fn py_remote<'py>(py: Python<'py>, m: [f64; 3], p: f64, shots: u64, seed: u64, branch: &str) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = RemoteTransferConfig::new(m, p, shots, RngSeed::new(seed));
    cfg.branch = match branch {
        "plus" => AliceOutcome::Plus,
        "minus" => AliceOutcome::Minus,
        other => return Err(InvlabError::new_err(format!("branch must be plus or minus, got {other}"))),
    };
    to_py(py, &run_remote_transfer(&cfg).map_err(err)?)
}

#[pyfunction(name = "run_qecc_demo")]
#[pyo3(signature = (alpha, beta, error_probs, trials = 10_000, seed = 0))]
fn py_qecc<'py>(
    py: Python<'py>,
    alpha: C64,
    beta: C64,
    error_probs: [f64; 3],
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = QeccDemoConfig {
        alpha,
        beta,
        error_probs,
        trials,
        seed: RngSeed::new(seed),
    };
    to_py(py, &run_qecc_demo(&cfg).map_err(err)?)
}

#[pymodule]
fn invlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("InvlabError", m.py().get_type::<InvlabError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyInvariant>()?;
    m.add_function(wrap_pyfunction!(channel_names, m)?)?;
    m.add_function(wrap_pyfunction!(py_curated, m)?)?;
    m.add_function(wrap_pyfunction!(py_count, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(py_measure, m)?)?;
    m.add_function(wrap_pyfunction!(py_qkd, m)?)?;
    m.add_function(wrap_pyfunction!(py_remote, m)?)?;
    m.add_function(wrap_pyfunction!(py_qecc, m)?)?;
    Ok(())
}
