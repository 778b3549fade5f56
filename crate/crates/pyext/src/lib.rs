//! Python bindings for the quota-constrained MMS allocation library.
//!
//! Exposes the instance model, the approximation solvers, the exact
//! oracles, the tight-instance generators, and the MBLP emitter. All
//! rational values cross the boundary as `"p/q"` strings (or bare
//! integers on input) so Python callers keep exact arithmetic.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use mms_core::generators;
use mms_core::instance::validate_instance;
use mms_core::io;
use mms_core::mblp;
use mms_core::oracle;
use mms_core::ordered::to_ordered;
use mms_core::rational::{format_rational, parse_rational, Rational};
use mms_core::solver::{solve as solve_core, Algorithm, SolveConfig};
use mms_core::verify::verify_alpha_mms;
use mms_core::{Allocation, Kind, RunOptions};

fn to_py_err(err: mms_core::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_value(v: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(i) = v.extract::<i64>() {
        return Ok(mms_core::rational::rat(i));
    }
    let s: String = v.extract()?;
    parse_rational(&s).map_err(to_py_err)
}

fn parse_kind(kind: &str) -> PyResult<Kind> {
    match kind {
        "goods" => Ok(Kind::Goods),
        "chores" => Ok(Kind::Chores),
        "mixed" => Ok(Kind::Mixed),
        other => Err(PyValueError::new_err(format!(
            "kind must be goods, chores, or mixed; got {other:?}"
        ))),
    }
}

/// A fair-division instance: agents, categorized items with quota pairs,
/// and an exact rational valuation table.
#[pyclass(name = "Instance", from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: mms_core::Instance,
}

#[pymethods]
impl PyInstance {
    /// Build a single-category instance.
    ///
    /// `valuations` is one row per agent; entries are ints or "p/q" strings.
    #[staticmethod]
    #[pyo3(signature = (valuations, q_minus, q_plus, kind="goods"))]
    fn single_category(
        valuations: Vec<Vec<Py<PyAny>>>,
        q_minus: usize,
        q_plus: usize,
        kind: &str,
        py: Python<'_>,
    ) -> PyResult<Self> {
        let rows = valuations
            .iter()
            .map(|row| row.iter().map(|v| parse_value(v.bind(py))).collect())
            .collect::<PyResult<Vec<Vec<Rational>>>>()?;
        let n = rows.len();
        let inner = mms_core::Instance::single_category(n, rows, q_minus, q_plus, parse_kind(kind)?)
            .map_err(to_py_err)?;
        Ok(PyInstance { inner })
    }

    /// Build a categorized instance. `categories` is a list of
    /// `(item_ids, q_minus, q_plus)` triples partitioning the item ids.
    #[staticmethod]
    #[pyo3(signature = (valuations, categories, kind="goods"))]
    fn categorized(
        valuations: Vec<Vec<Py<PyAny>>>,
        categories: Vec<(Vec<usize>, usize, usize)>,
        kind: &str,
        py: Python<'_>,
    ) -> PyResult<Self> {
        let rows = valuations
            .iter()
            .map(|row| row.iter().map(|v| parse_value(v.bind(py))).collect())
            .collect::<PyResult<Vec<Vec<Rational>>>>()?;
        let n = rows.len();
        let cats = categories
            .into_iter()
            .enumerate()
            .map(|(idx, (items, q_minus, q_plus))| {
                mms_core::Category::new(format!("c{idx}"), items, q_minus, q_plus)
            })
            .collect();
        let inner =
            mms_core::Instance::new(n, cats, rows, parse_kind(kind)?).map_err(to_py_err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: io::instance_from_json(text).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&self.inner)
    }

    #[getter]
    fn agents(&self) -> usize {
        self.inner.n_agents()
    }

    #[getter]
    fn items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    /// Violations of the instance invariants; empty means valid.
    fn validate(&self) -> Vec<String> {
        validate_instance(&self.inner).violations
    }

    fn is_ordered(&self) -> bool {
        self.inner.is_ordered()
    }

    /// The ordered reduction of this instance.
    fn ordered(&self) -> PyInstance {
        PyInstance {
            inner: to_ordered(&self.inner).ordered_instance,
        }
    }

    fn is_feasible_bundle(&self, bundle: Vec<usize>) -> PyResult<bool> {
        self.inner.is_feasible_bundle(&bundle).map_err(to_py_err)
    }

    fn is_feasible_allocation(&self, bundles: Vec<Vec<usize>>) -> PyResult<bool> {
        self.inner
            .is_feasible_allocation(&Allocation::new(bundles))
            .map_err(to_py_err)
    }

    /// Exact bundle value for an agent, as a "p/q" string.
    fn bundle_value(&self, agent: usize, bundle: Vec<usize>) -> PyResult<String> {
        self.inner
            .bundle_value(agent, &bundle)
            .map(|v| format_rational(&v))
            .map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(agents={}, items={}, categories={}, kind={})",
            self.inner.n_agents(),
            self.inner.n_items(),
            self.inner.categories().len(),
            self.inner.kind().as_str(),
        )
    }
}

/// Tight goods family: n agents, 3n goods, worst ratio exactly 2n/(3n-1).
#[pyfunction]
fn tight_goods(n: usize) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: generators::tight_goods_instance(n).map_err(to_py_err)?,
    })
}

/// Tight chores family: n agents, 2n chores, worst ratio exactly (3n-1)/(2n).
#[pyfunction]
fn tight_chores(n: usize) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: generators::tight_chores_instance(n).map_err(to_py_err)?,
    })
}

/// Seeded random instance; `policy` is tight | loose | lower-only |
/// upper-only | unconstrained.
#[pyfunction]
#[pyo3(signature = (seed, agents, sizes, policy="tight", kind="goods", lo=None, hi=None))]
fn random_instance(
    seed: u64,
    agents: usize,
    sizes: Vec<usize>,
    policy: &str,
    kind: &str,
    lo: Option<i64>,
    hi: Option<i64>,
) -> PyResult<PyInstance> {
    let kind = parse_kind(kind)?;
    let range = match kind {
        Kind::Chores => (lo.unwrap_or(-8), hi.unwrap_or(0)),
        _ => (lo.unwrap_or(0), hi.unwrap_or(8)),
    };
    let policy = generators::QuotaPolicy::parse(policy).map_err(to_py_err)?;
    Ok(PyInstance {
        inner: generators::random_instance(seed, agents, &sizes, policy, range, kind)
            .map_err(to_py_err)?,
    })
}

/// Solve an instance. Returns a dict with the algorithm used, the α
/// guarantee as a "p/q" string, the per-agent bundles, and their exact
/// values.
#[pyfunction]
#[pyo3(signature = (inst, algorithm="auto", alpha=None, eps=None, check_invariants=false))]
fn solve(
    py: Python<'_>,
    inst: &PyInstance,
    algorithm: &str,
    alpha: Option<&str>,
    eps: Option<&str>,
    check_invariants: bool,
) -> PyResult<Py<PyAny>> {
    let config = SolveConfig {
        algorithm: Some(Algorithm::parse(algorithm).map_err(to_py_err)?),
        alpha: alpha
            .map(parse_rational)
            .transpose()
            .map_err(to_py_err)?,
        eps: eps.map(parse_rational).transpose().map_err(to_py_err)?,
        options: RunOptions { check_invariants },
    };
    let solved = solve_core(&inst.inner, &config).map_err(to_py_err)?;
    let values: Vec<String> = (0..inst.inner.n_agents())
        .map(|i| {
            inst.inner
                .bundle_value(i, &solved.allocation.bundles[i])
                .map(|v| format_rational(&v))
        })
        .collect::<Result<_, _>>()
        .map_err(to_py_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("algorithm", solved.algorithm)?;
    dict.set_item("alpha", format_rational(&solved.alpha))?;
    dict.set_item("bundles", solved.allocation.bundles)?;
    dict.set_item("values", values)?;
    Ok(dict.into_any().unbind())
}

/// Exact MMS value and a witnessing partition for one agent.
#[pyfunction]
fn mms(inst: &PyInstance, agent: usize) -> PyResult<(String, Vec<Vec<usize>>)> {
    let result = if inst.inner.agents_identical() {
        oracle::mms_identical_dp(&inst.inner).map_err(to_py_err)?
    } else {
        oracle::mms_bruteforce(&inst.inner, agent).map_err(to_py_err)?
    };
    Ok((format_rational(&result.value), result.partition.bundles))
}

/// Exact MMS values for all agents.
#[pyfunction]
fn mms_values(inst: &PyInstance) -> PyResult<Vec<String>> {
    Ok(oracle::mms_values(&inst.inner)
        .map_err(to_py_err)?
        .iter()
        .map(format_rational)
        .collect())
}

/// Best achievable α over all feasible allocations; α is None when every
/// factor is achievable.
#[pyfunction]
fn best_alpha(inst: &PyInstance) -> PyResult<(Option<String>, Vec<Vec<usize>>)> {
    let result = oracle::best_alpha(&inst.inner).map_err(to_py_err)?;
    let alpha = match result.alpha {
        oracle::AlphaBound::Any => None,
        oracle::AlphaBound::Value(a) => Some(format_rational(&a)),
    };
    Ok((alpha, result.allocation.bundles))
}

/// Check `v_i(A_i) >= α·μ_i` for all agents against the exact oracle.
/// Returns `(ok, margins)` with margins as "p/q" strings.
#[pyfunction]
fn verify(inst: &PyInstance, bundles: Vec<Vec<usize>>, alpha: &str) -> PyResult<(bool, Vec<String>)> {
    let alpha = parse_rational(alpha).map_err(to_py_err)?;
    let mus = oracle::mms_values(&inst.inner).map_err(to_py_err)?;
    let report = verify_alpha_mms(&inst.inner, &Allocation::new(bundles), &alpha, &mus)
        .map_err(to_py_err)?;
    Ok((
        report.ok,
        report
            .margins
            .iter()
            .map(|m| format_rational(&m.margin))
            .collect(),
    ))
}

/// Build the inapproximability MBLP for a dimension and return the LP text.
/// `categories` is a list of `(size, q_minus, q_plus)` triples.
#[pyfunction]
fn mblp_lp(agents: usize, categories: Vec<(usize, usize, usize)>) -> PyResult<String> {
    let dim = mblp::Dimension::new(agents, categories).map_err(to_py_err)?;
    let model = mblp::build_mblp(&dim).map_err(to_py_err)?;
    Ok(mblp::emit_lp(&model))
}

#[pymodule]
fn mms_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(tight_goods, m)?)?;
    m.add_function(wrap_pyfunction!(tight_chores, m)?)?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(mms, m)?)?;
    m.add_function(wrap_pyfunction!(mms_values, m)?)?;
    m.add_function(wrap_pyfunction!(best_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(mblp_lp, m)?)?;
    Ok(())
}
