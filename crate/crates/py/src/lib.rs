//! Python bindings. Solutions cross the boundary as `(red, blue)` pairs of
//! index lists; reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::{json, Value};

use redblue::decomposition::decompose as decompose_pair;
use redblue::exact::{brute_force_opt, is_local_opt as local_opt, LocalOptVerdict, DEFAULT_CAP};
use redblue::gap::{self, GapParams};
use redblue::instance::{self as inst_mod, disjointify, gen_euclidean, gen_grid, RandomParams};
use redblue::local_search::{run, Rule, SearchConfig, SearchResult};
use redblue::{AnyInstance, Distance, Error, Solution};

create_exception!(redblue, CapExceeded, PyException, "An enumeration or neighbourhood exceeds its cap.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::CapExceeded { .. } => CapExceeded::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Pair = (Vec<usize>, Vec<usize>);

fn solution((red, blue): Pair) -> Solution {
    Solution::new(red, blue)
}

/// Converts through the `json` module so reports keep their shape.
fn to_dict<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyDict>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.cast_into::<PyDict>()?)
}

fn to_value<T: serde::Serialize>(v: &T) -> PyResult<Value> {
    serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

macro_rules! with_instance {
    ($any:expr, $inst:ident => $body:expr) => {
        match $any {
            AnyInstance::Int($inst) => $body,
            AnyInstance::Float($inst) => $body,
        }
    };
}

/// A red-blue median instance on the exact (integer) or float path.
#[pyclass(frozen, skip_from_py_object, module = "redblue")]
#[derive(Clone)]
pub struct Instance {
    inner: AnyInstance,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance { inner: inst_mod::parse(text.as_bytes()).map_err(to_py)? })
    }

    /// Uniform points in a square with Euclidean distances.
    #[staticmethod]
    #[pyo3(signature = (n_clients, n_red, n_blue, k_r, k_b, box_size = 100.0, seed = 0))]
    fn euclidean(
        n_clients: usize,
        n_red: usize,
        n_blue: usize,
        k_r: usize,
        k_b: usize,
        box_size: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let params = RandomParams { n_clients, n_red, n_blue, k_r, k_b, box_size, seed };
        Ok(Instance { inner: gen_euclidean(&params).map_err(to_py)?.into() })
    }

    /// Integer grid points with L1 distances.
    #[staticmethod]
    #[pyo3(signature = (n_clients, n_red, n_blue, k_r, k_b, box_size = 100.0, seed = 0))]
    fn grid(
        n_clients: usize,
        n_red: usize,
        n_blue: usize,
        k_r: usize,
        k_b: usize,
        box_size: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let params = RandomParams { n_clients, n_red, n_blue, k_r, k_b, box_size, seed };
        Ok(Instance { inner: gen_grid(&params).map_err(to_py)?.into() })
    }

    fn to_json(&self) -> String {
        String::from_utf8(self.inner.serialize()).expect("json is utf-8")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// True for integer distances.
    #[getter]
    fn exact(&self) -> bool {
        matches!(self.inner, AnyInstance::Int(_))
    }

    #[getter]
    fn clients(&self) -> Vec<usize> {
        with_instance!(&self.inner, i => i.clients().to_vec())
    }

    #[getter]
    fn red(&self) -> Vec<usize> {
        with_instance!(&self.inner, i => i.red().to_vec())
    }

    #[getter]
    fn blue(&self) -> Vec<usize> {
        with_instance!(&self.inner, i => i.blue().to_vec())
    }

    #[getter]
    fn k_r(&self) -> usize {
        with_instance!(&self.inner, i => i.k_r())
    }

    #[getter]
    fn k_b(&self) -> usize {
        with_instance!(&self.inner, i => i.k_b())
    }

    fn distance(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if i >= n || j >= n {
            return Err(to_py(Error::IndexOutOfRange { index: i.max(j), n }));
        }
        Ok(with_instance!(&self.inner, inst => inst.d(i, j).to_f64()))
    }

    /// Assignment of every client under `solution`: cost, per-client
    /// facility and distance.
    fn evaluate<'py>(&self, py: Python<'py>, solution: Pair) -> PyResult<Bound<'py, PyDict>> {
        let sol = self::solution(solution);
        let doc = with_instance!(&self.inner, inst => {
            let a = redblue::evaluate(inst, &sol).map_err(to_py)?;
            json!({
                "cost": json!(a.total),
                "clients": a.clients,
                "facility": a.facility,
                "distance": a.cost,
            })
        });
        to_dict(py, &doc)
    }

    fn cost(&self, solution: Pair) -> PyResult<f64> {
        let sol = self::solution(solution);
        with_instance!(&self.inner, inst => redblue::instance::cost(inst, &sol).map(|c| c.to_f64()).map_err(to_py))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, clients={}, red={}, blue={}, k_r={}, k_b={}, exact={})",
            self.n(),
            self.clients().len(),
            self.red().len(),
            self.blue().len(),
            self.k_r(),
            self.k_b(),
            self.exact()
        )
    }
}

fn search_json<D: Distance + serde::Serialize>(r: SearchResult<D>) -> Value {
    json!({
        "solution": (r.solution.red, r.solution.blue),
        "cost": json!(r.assignment.total),
        "iterations": r.iterations,
        "trace": r.trace,
        "termination": r.termination,
    })
}

/// p-swap local search. Starts from `initial` or a random solution drawn
/// with `seed`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (instance, p = 1, epsilon = 0.0, rule = "best", seed = 0, initial = None, max_iters = 1_000_000))]
fn solve<'py>(
    py: Python<'py>,
    instance: &Instance,
    p: usize,
    epsilon: f64,
    rule: &str,
    seed: u64,
    initial: Option<Pair>,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rule = match rule {
        "best" => Rule::Best,
        "first" => Rule::First,
        other => return Err(PyValueError::new_err(format!("rule must be 'best' or 'first', got {other:?}"))),
    };
    let config = SearchConfig { p, epsilon, rule, seed, max_iters, ..SearchConfig::default() };
    let initial = initial.map(solution);
    let doc =
        py.detach(|| with_instance!(&instance.inner, inst => run(inst, &config, initial.as_ref()).map(search_json)));
    to_dict(py, &doc.map_err(to_py)?)
}

/// Exact optimum by enumeration, refusing above `cap` solutions.
#[pyfunction]
#[pyo3(signature = (instance, cap = DEFAULT_CAP))]
fn exact<'py>(py: Python<'py>, instance: &Instance, cap: u128) -> PyResult<Bound<'py, PyDict>> {
    let doc = py.detach(|| {
        with_instance!(&instance.inner, inst => brute_force_opt(inst, cap).map(|r| json!({
            "solution": (r.solution.red, r.solution.blue),
            "cost": json!(r.cost),
            "examined": r.examined,
        })))
    });
    to_dict(py, &doc.map_err(to_py)?)
}

fn verdict_json<D: Distance + serde::Serialize>(v: LocalOptVerdict<D>) -> Value {
    match v {
        LocalOptVerdict::LocallyOptimal { moves_checked, zero_delta_moves } => json!({
            "locally_optimal": true,
            "moves_checked": moves_checked,
            "zero_delta_moves": zero_delta_moves,
        }),
        LocalOptVerdict::Improvable { witness, delta } => json!({
            "locally_optimal": false,
            "witness": witness,
            "delta": json!(delta),
        }),
    }
}

/// Scans the whole p-swap neighbourhood of `solution`.
#[pyfunction]
#[pyo3(signature = (instance, solution, p = 1, cap = DEFAULT_CAP))]
fn is_local_opt<'py>(
    py: Python<'py>,
    instance: &Instance,
    solution: Pair,
    p: usize,
    cap: u128,
) -> PyResult<Bound<'py, PyDict>> {
    let sol = self::solution(solution);
    let doc = py.detach(|| with_instance!(&instance.inner, inst => local_opt(inst, &sol, p, cap).map(verdict_json)));
    to_dict(py, &doc.map_err(to_py)?)
}

/// The locality-gap instance for `(p, ell)` with its designated local and
/// global solutions.
#[pyfunction]
fn gap_instance(p: usize, ell: usize) -> PyResult<(Instance, Pair, Pair)> {
    let g = gap::build(GapParams::new(p, ell).map_err(to_py)?).map_err(to_py)?;
    Ok((Instance { inner: g.instance.into() }, (g.local.red, g.local.blue), (g.global.red, g.global.blue)))
}

/// Builds and verifies the `(p, ell)` gap instance.
#[pyfunction]
#[pyo3(signature = (p, ell, cap = DEFAULT_CAP))]
fn verify_gap<'py>(py: Python<'py>, p: usize, ell: usize, cap: u128) -> PyResult<Bound<'py, PyDict>> {
    let g = gap::build(GapParams::new(p, ell).map_err(to_py)?).map_err(to_py)?;
    let report = py.detach(|| gap::verify(&g, cap)).map_err(to_py)?;
    let mut doc = to_value(&report)?;
    doc["passed"] = json!(report.passed());
    to_dict(py, &doc)
}

fn decompose_doc<D: Distance + serde::Serialize>(
    inst: &redblue::Instance<D>,
    s: &Solution,
    o: &Solution,
    split: bool,
) -> Result<Value, Error> {
    let (inst, s, o) = if split { disjointify(inst, s, o)? } else { (inst.clone(), s.clone(), o.clone()) };
    let d = decompose_pair(&inst, &s, &o)?;
    Ok(json!({
        "ok": d.ok(),
        "n": inst.n(),
        "o": (o.red, o.blue),
        "decomposition": serde_json::to_value(&d).map_err(|e| Error::Internal(e.to_string()))?,
    }))
}

/// Groups, blocks and per-client checks for a local solution `s` against
/// a global solution `o`. Shared facilities are an error unless
/// `disjointify` is set.
#[pyfunction]
#[pyo3(signature = (instance, s, o, disjointify = false))]
fn decompose<'py>(
    py: Python<'py>,
    instance: &Instance,
    s: Pair,
    o: Pair,
    disjointify: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let (s, o) = (solution(s), solution(o));
    let doc = with_instance!(&instance.inner, inst => decompose_doc(inst, &s, &o, disjointify));
    to_dict(py, &doc.map_err(to_py)?)
}

#[pymodule]
#[pyo3(name = "redblue")]
fn redblue_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(is_local_opt, m)?)?;
    m.add_function(wrap_pyfunction!(gap_instance, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gap, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add("CapExceeded", m.py().get_type::<CapExceeded>())?;
    Ok(())
}
