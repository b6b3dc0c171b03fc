use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nusec_core::acceptance;
use nusec_core::distributions::{self, PermDistribution};
use nusec_core::matching_ext::kp_experiment;
use nusec_core::perm_core::{self, ValueOrdering};
use nusec_core::properties::{check_bip_exact, check_uiop_exact, PropertyReport};
use nusec_core::rng::SimRng;
use nusec_core::secretary_algs::{self, classic_threshold_policy, random_threshold_policy};

fn err(e: nusec_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Arrival order of items 1..n, stored as the position of each item.
#[pyclass(frozen, skip_from_py_object, module = "nusec")]
#[derive(Clone)]
struct Permutation(perm_core::Permutation);

#[pymethods]
impl Permutation {
    #[new]
    fn new(positions: Vec<usize>) -> PyResult<Self> {
        perm_core::Permutation::new(positions).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_arrival_order(items: Vec<usize>) -> PyResult<Self> {
        perm_core::Permutation::from_arrival_order(&items).map(Self).map_err(err)
    }

    fn position(&self, item: usize) -> PyResult<usize> {
        if item == 0 || item > self.0.len() {
            return Err(PyValueError::new_err(format!("item {item} out of range 1..={}", self.0.len())));
        }
        Ok(self.0.position(item))
    }

    fn positions(&self) -> Vec<usize> {
        self.0.positions()
    }

    fn arrival_order(&self) -> Vec<usize> {
        self.0.arrival_order()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.0.positions())
    }
}

/// Distribution over permutations of 1..n.
#[pyclass(frozen, module = "nusec")]
struct Distribution(PermDistribution);

#[pymethods]
impl Distribution {
    #[staticmethod]
    fn uniform(n: usize) -> Self {
        Self(distributions::uniform(n))
    }

    #[staticmethod]
    fn two_point_reverse(n: usize) -> Self {
        Self(distributions::two_point_reverse(n))
    }

    #[staticmethod]
    fn random_multiset(n: usize, k: usize, delta: f64, seed: u64) -> PyResult<Self> {
        distributions::random_multiset(n, k, delta, seed).map(Self).map_err(err)
    }

    /// From `(positions, probability)` pairs.
    #[staticmethod]
    fn explicit(atoms: Vec<(Vec<usize>, f64)>) -> PyResult<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(p, w)| perm_core::Permutation::new(p).map(|p| (p, w)))
            .collect::<nusec_core::Result<Vec<_>>>()
            .map_err(err)?;
        PermDistribution::explicit(atoms).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        PermDistribution::from_text(text).map(Self).map_err(err)
    }

    fn to_text(&self) -> PyResult<String> {
        self.0.to_text().map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn support_size(&self) -> Option<usize> {
        self.0.support().map(|s| s.len())
    }

    fn sample(&self, seed: u64) -> Permutation {
        Permutation(self.0.sample_seeded(seed))
    }

    fn __repr__(&self) -> String {
        format!("Distribution(kind={:?}, n={})", self.0.kind(), self.0.n())
    }
}

fn report_dict<'py>(py: Python<'py>, r: &PropertyReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("implied_delta", r.implied_delta)?;
    d.set_item("worst_probability", r.worst_probability)?;
    d.set_item("worst_tuple", r.worst_tuple.clone())?;
    d.set_item("worst_blocks", r.worst_blocks.clone())?;
    Ok(d)
}

/// Exact ordering-property audit for tuples of size `k`.
#[pyfunction]
fn check_uiop<'py>(py: Python<'py>, dist: &Distribution, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| check_uiop_exact(&dist.0, k)).map_err(err)?;
    report_dict(py, &r)
}

/// Exact block-independence audit for `p` items and `q` blocks.
#[pyfunction]
fn check_bip<'py>(py: Python<'py>, dist: &Distribution, p: usize, q: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| check_bip_exact(&dist.0, p, q)).map_err(err)?;
    report_dict(py, &r)
}

/// Probability that `policy` ("classic" or "random-threshold") stops on the
/// best item. `values` lists items best first; item 1 is best when omitted.
#[pyfunction]
#[pyo3(signature = (dist, policy, trials, seed, values=None))]
fn pcs(
    py: Python<'_>,
    dist: &Distribution,
    policy: &str,
    trials: u64,
    seed: u64,
    values: Option<Vec<usize>>,
) -> PyResult<(f64, f64)> {
    let n = dist.0.n();
    let sigma = match values {
        Some(v) => ValueOrdering::new(v).map_err(err)?,
        None => ValueOrdering::identity(n),
    };
    let est = py
        .detach(|| match policy {
            "classic" => secretary_algs::pcs(|_: &mut SimRng| classic_threshold_policy(n), &dist.0, &sigma, trials, seed),
            "random-threshold" => {
                secretary_algs::pcs(|r: &mut SimRng| random_threshold_policy(n, r), &dist.0, &sigma, trials, seed)
            }
            other => Err(nusec_core::Error::InvalidParameter(format!("unknown policy {other:?}"))),
        })
        .map_err(err)?;
    Ok((est.estimate, est.standard_error))
}

#[pyfunction]
fn secretary_bound(p: usize, q: usize, delta: f64) -> f64 {
    secretary_algs::secretary_bound(p, q, delta)
}

#[pyfunction]
fn random_threshold_bound(delta: f64) -> f64 {
    secretary_algs::random_threshold_bound(delta)
}

/// Mean matching ratio under the adversarial and uniform arrival laws.
#[pyfunction]
fn korula_pal_ratios(py: Python<'_>, n: usize, k: usize, delta: f64, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
    let r = py.detach(|| kp_experiment(n, k, delta, trials, seed)).map_err(err)?;
    Ok((r.adversarial.mean_ratio, r.uniform.mean_ratio))
}

/// One acceptance criterion: `(passed, summary, canonical JSON)`.
#[pyfunction]
#[pyo3(signature = (id, seed=acceptance::DEFAULT_SEED))]
fn run_criterion(py: Python<'_>, id: usize, seed: u64) -> PyResult<(bool, String, String)> {
    let r = py.detach(|| acceptance::run_criterion(id, seed)).map_err(err)?;
    let json = nusec_core::report::to_canonical_string(&r).map_err(err)?;
    Ok((r.passed, r.summary, json))
}

#[pymodule]
fn nusec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Permutation>()?;
    m.add_class::<Distribution>()?;
    m.add_function(wrap_pyfunction!(check_uiop, m)?)?;
    m.add_function(wrap_pyfunction!(check_bip, m)?)?;
    m.add_function(wrap_pyfunction!(pcs, m)?)?;
    m.add_function(wrap_pyfunction!(secretary_bound, m)?)?;
    m.add_function(wrap_pyfunction!(random_threshold_bound, m)?)?;
    m.add_function(wrap_pyfunction!(korula_pal_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
