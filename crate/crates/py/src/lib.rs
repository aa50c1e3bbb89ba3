//! Python bindings. Structured results come back as plain dicts and lists
//! (via their JSON form).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

use diffprod::constraints::{diagnose, extract_constraints, square_diagnose, Diagnosis};
use diffprod::experiment::{
    experiment_nonfinax, experiment_square, family_grid, verify_report, ExperimentReport,
};
use diffprod::formula::{classify_sahlqvist, parse_formula, render_formula, Formula};
use diffprod::frame::Frame;
use diffprod::grid::{decompose_frame, realize_grid, BiCluster, GridSpec};
use diffprod::pipeline::{diagnosis_report, synth_bundle, SynthKind};
use diffprod::pmorph::{
    assemble_product_pmorphism, bicluster_preimage, game_play, pmorphism_profile, Adversary,
    Strategy,
};
use diffprod::semantics::{valid_in_frame, CheckMode, Validity};
use diffprod::synth::recognize_axiom;
use diffprod::ExtNat;

fn err(e: diffprod::Error) -> PyErr {
    match e {
        diffprod::Error::Syntax { .. }
        | diffprod::Error::InvalidArgument(_)
        | diffprod::Error::Json(_)
        | diffprod::Error::Script(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).expect("serializable");
    Ok(py
        .import_bound("json")?
        .call_method1("loads", (text,))?
        .unbind())
}

fn from_str<T: serde::de::DeserializeOwned>(s: &str) -> PyResult<T> {
    serde_json::from_str(s).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(name = "Formula", module = "diffprod")]
#[derive(Clone)]
struct PyFormula(Formula);

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_formula(text).map(PyFormula).map_err(err)
    }

    fn vars(&self) -> Vec<String> {
        self.0.vars().into_iter().collect()
    }

    /// Sahlqvist verdict as a dict.
    fn classify(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(
            py,
            &serde_json::to_value(classify_sahlqvist(&self.0)).expect("serializable"),
        )
    }

    /// Which synthesized axiom family this is, if any.
    fn recognize(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(
            py,
            &serde_json::to_value(recognize_axiom(&self.0)).expect("serializable"),
        )
    }

    fn __str__(&self) -> String {
        render_formula(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", render_formula(&self.0))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "BiCluster", module = "diffprod")]
#[derive(Clone)]
struct PyBiCluster(BiCluster);

#[pymethods]
impl PyBiCluster {
    #[new]
    #[pyo3(signature = (rr=0, ri=0, ir=0, ii=0))]
    fn new(rr: u64, ri: u64, ir: u64, ii: u64) -> Self {
        PyBiCluster(BiCluster::new(rr, ri, ir, ii))
    }

    /// Type name, e.g. `"H2VSw"`.
    fn classify(&self) -> PyResult<String> {
        let t = self.0.classify().map_err(err)?;
        Ok(format!("{t:?}"))
    }

    /// `(h_size, v_size, size)`
    fn sizes(&self) -> (String, String, String) {
        let (h, v, n) = self.0.sizes();
        (h.to_string(), v.to_string(), n.to_string())
    }

    /// Onto map from `diff(x) × diff(y)`, row-major over `(u, v)`.
    fn preimage(&self, x: usize, y: usize) -> PyResult<Vec<usize>> {
        bicluster_preimage(&self.0, x, y)
            .map(|p| p.map)
            .map_err(err)
    }

    /// Play the network game; `strategy` is `"search"`, `"greedy_rr"` or
    /// `"from_pmorphism"`, `adversary` is `"random"` or `"exhaustive"`.
    #[pyo3(signature = (rounds, strategy="search", adversary="random", seed=0, depth=4))]
    fn game(
        &self,
        py: Python<'_>,
        rounds: usize,
        strategy: &str,
        adversary: &str,
        seed: u64,
        depth: usize,
    ) -> PyResult<PyObject> {
        let strategy = match strategy {
            "search" => Strategy::Search,
            "greedy_rr" => Strategy::GreedyRr,
            "from_pmorphism" => {
                let g = GridSpec::new(vec!["x".into()], vec!["y".into()], vec![vec![self.0]])
                    .map_err(err)?;
                let Diagnosis::Good { xi_min } = diagnose(&g) else {
                    return Err(PyValueError::new_err("bi-cluster has no product preimage"));
                };
                let fin = |e: ExtNat| {
                    e.finite()
                        .map(|n| n as usize)
                        .ok_or_else(|| PyValueError::new_err("bi-cluster needs infinite sides"))
                };
                Strategy::FromPMorphism(
                    bicluster_preimage(&self.0, fin(xi_min[0])?, fin(xi_min[1])?).map_err(err)?,
                )
            }
            s => return Err(PyValueError::new_err(format!("unknown strategy {s}"))),
        };
        let adversary = match adversary {
            "random" => Adversary::Random { seed },
            "exhaustive" => Adversary::Exhaustive { depth },
            s => return Err(PyValueError::new_err(format!("unknown adversary {s}"))),
        };
        let r = game_play(&self.0, &adversary, &strategy, rounds).map_err(err)?;
        to_py(py, &r.to_json())
    }

    fn __repr__(&self) -> String {
        format!("BiCluster({})", self.0)
    }
}

#[pyclass(name = "Frame", module = "diffprod")]
#[derive(Clone)]
struct PyFrame(Frame);

#[pymethods]
impl PyFrame {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_str(text).map(PyFrame)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("serializable")
    }

    fn __len__(&self) -> usize {
        self.0.size()
    }

    fn decompose(&self) -> PyResult<PyGrid> {
        decompose_frame(&self.0)
            .map(|d| PyGrid(d.grid))
            .map_err(err)
    }

    /// Validity of `formula`; exhaustive when `trials` is 0, otherwise that
    /// many seeded random valuations. Returns `"valid"`, `"refuted"` or
    /// `"no_counterexample_found"`.
    #[pyo3(signature = (formula, trials=0, seed=0, budget=24))]
    fn check(
        &self,
        formula: &PyFormula,
        trials: u64,
        seed: u64,
        budget: usize,
    ) -> PyResult<&'static str> {
        let mode = if trials == 0 {
            CheckMode::Exhaustive { budget }
        } else {
            CheckMode::Sampled { trials, seed }
        };
        Ok(
            match valid_in_frame(&self.0, &formula.0, mode).map_err(err)? {
                Validity::Valid => "valid",
                Validity::Refuted { .. } => "refuted",
                Validity::NoCounterexampleFound { .. } => "no_counterexample_found",
            },
        )
    }
}

#[pyclass(name = "Grid", module = "diffprod")]
#[derive(Clone)]
struct PyGrid(GridSpec);

#[pymethods]
impl PyGrid {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_str(text).map(PyGrid)
    }

    /// `F_k`, `G_k` or `H_k`.
    #[staticmethod]
    fn family(name: &str, k: u64) -> PyResult<Self> {
        family_grid(name, k).map(PyGrid).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("serializable")
    }

    fn realize(&self) -> PyResult<PyFrame> {
        realize_grid(&self.0).map(|r| PyFrame(r.frame)).map_err(err)
    }

    fn constraints(&self, py: Python<'_>) -> PyResult<PyObject> {
        let con = extract_constraints(&self.0)
            .map_err(|c| PyValueError::new_err(format!("impossible cell {:?}", c.kind)))?;
        to_py(py, &con.to_json())
    }

    fn diagnose(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &diagnosis_report(&self.0))
    }

    fn square_diagnose(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(
            py,
            &serde_json::to_value(square_diagnose(&self.0)).expect("serializable"),
        )
    }

    /// Axiom bundle: kind, params, formula, countermodel, refuted world.
    #[pyo3(signature = (kind="auto"))]
    fn synth(&self, py: Python<'_>, kind: &str) -> PyResult<PyObject> {
        let kind: SynthKind = from_str(&format!("{kind:?}"))?;
        let b = synth_bundle(&self.0, kind).map_err(err)?;
        to_py(py, &b.to_json())
    }

    /// Onto p-morphism from a product of difference frames, at the given
    /// node sizes (a dict) or the canonical solution.
    #[pyo3(signature = (xi=None))]
    fn assemble(
        &self,
        py: Python<'_>,
        xi: Option<std::collections::BTreeMap<String, u64>>,
    ) -> PyResult<PyObject> {
        let con = extract_constraints(&self.0)
            .map_err(|c| PyValueError::new_err(format!("impossible cell {:?}", c.kind)))?;
        let xi = match xi {
            Some(m) => con
                .from_named(&m.into_iter().map(|(k, v)| (k, ExtNat::Fin(v))).collect())
                .map_err(err)?,
            None => match diagnose(&self.0) {
                Diagnosis::Good { xi_min } => xi_min,
                _ => return Err(PyValueError::new_err("grid has no solution")),
            },
        };
        let pm = assemble_product_pmorphism(&self.0, &xi).map_err(err)?;
        let profile = pmorphism_profile(&self.0, &pm).map_err(err)?;
        to_py(
            py,
            &serde_json::json!({ "nx": pm.nx, "ny": pm.ny, "map": pm.map, "profile": con.named(&profile) }),
        )
    }

    fn __repr__(&self) -> String {
        format!("Grid({} x {})", self.0.nx(), self.0.ny())
    }
}

/// Run the `F_k`/`G_k`/`H_k` experiment; `kind` is `"nonfinax"` or `"square"`.
#[pyfunction]
#[pyo3(signature = (kind, k, m=1, seed=0))]
fn experiment(py: Python<'_>, kind: &str, k: u64, m: u32, seed: u64) -> PyResult<PyObject> {
    let r = match kind {
        "nonfinax" => experiment_nonfinax(k, m, seed),
        "square" => experiment_square(k, m, seed),
        s => return Err(PyValueError::new_err(format!("unknown experiment {s}"))),
    }
    .map_err(err)?;
    to_py(py, &r.to_json())
}

/// Re-check a serialized experiment report.
#[pyfunction]
fn verify_experiment(text: &str) -> PyResult<bool> {
    let r: ExperimentReport = from_str(text)?;
    Ok(verify_report(&r).is_ok())
}

#[pymodule]
#[pyo3(name = "diffprod")]
pub fn diffprod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyBiCluster>()?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_experiment, m)?)?;
    Ok(())
}
