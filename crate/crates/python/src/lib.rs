//! Python bindings. States are flat lists of complex amplitudes in
//! coin-major order (`index = coin * n + vertex`); reports come back as
//! plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qwalk::io::{self, SequenceFile};
use qwalk::lie::{verify_structure_with, DEFAULT_CAP, DEFAULT_TOL};
use qwalk::{analyze, arbitrary_transfer, reachable_sets, shortcut, ControlSequence, WalkSpec, WalkState};

fn invalid<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (value.to_string(),))?.unbind())
}

/// A validated walk: `n` vertices and one permutation per coin state.
#[pyclass(name = "Walk", frozen)]
struct PyWalk {
    spec: WalkSpec,
}

impl PyWalk {
    fn state(&self, amps: Vec<Complex64>) -> PyResult<WalkState> {
        WalkState::new(self.spec.d(), self.spec.n(), amps).map_err(invalid)
    }
}

#[pymethods]
impl PyWalk {
    #[new]
    fn new(n: usize, perms: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyWalk { spec: WalkSpec::validate(n, perms).map_err(invalid)? })
    }

    /// `cycle_shift(5)`, `figure1`, `torus(3,3)`, ...
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyWalk { spec: WalkSpec::builtin(name).map_err(invalid)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyWalk { spec: io::parse_spec(text).map_err(invalid)? })
    }

    fn to_json(&self) -> String {
        io::spec_to_json(&self.spec).to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.spec.d()
    }

    /// Order of the shift operator.
    #[getter]
    fn r(&self) -> usize {
        self.spec.shift_order()
    }

    fn analyze(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let report = analyze(&self.spec).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        to_py(py, &serde_json::to_value(&report).map_err(invalid)?)
    }

    #[pyo3(signature = (node, k))]
    fn reachable_sets(&self, node: usize, k: usize) -> PyResult<Vec<Vec<usize>>> {
        let sets = reachable_sets(&self.spec, node, k).map_err(invalid)?;
        Ok(sets.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    #[pyo3(signature = (tol = DEFAULT_TOL, cap = DEFAULT_CAP))]
    fn lie_check(&self, py: Python<'_>, tol: f64, cap: usize) -> PyResult<Py<PyAny>> {
        let check = py
            .detach(|| verify_structure_with(&self.spec, tol, cap))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        to_py(py, &serde_json::to_value(&check).map_err(invalid)?)
    }

    fn has_shortcut(&self) -> bool {
        shortcut(&self.spec).is_some()
    }

    /// Coin sequence taking `psi1` to `psi2`.
    #[pyo3(signature = (psi1, psi2, use_shortcut = false))]
    fn transfer(&self, py: Python<'_>, psi1: Vec<Complex64>, psi2: Vec<Complex64>, use_shortcut: bool) -> PyResult<Sequence> {
        let (a, b) = (self.state(psi1)?, self.state(psi2)?);
        let t = py.detach(|| arbitrary_transfer(&self.spec, &a, &b, use_shortcut)).map_err(invalid)?;
        Ok(Sequence { seq: t.sequence, bound: Some(t.bound), fidelity: Some(t.achieved_fidelity) })
    }

    /// Replays `seq` from `psi` and returns the final amplitudes.
    fn simulate(&self, psi: Vec<Complex64>, seq: &Sequence) -> PyResult<Vec<Complex64>> {
        let out = seq.seq.apply(&self.state(psi)?, &self.spec).map_err(invalid)?;
        Ok(out.into_amps())
    }

    fn probabilities(&self, psi: Vec<Complex64>) -> PyResult<Vec<f64>> {
        Ok(self.state(psi)?.position_probabilities())
    }

    fn __repr__(&self) -> String {
        format!("Walk(n={}, d={})", self.spec.n(), self.spec.d())
    }
}

/// A list of coin operators, one per step.
#[pyclass(frozen)]
struct Sequence {
    seq: ControlSequence,
    bound: Option<usize>,
    fidelity: Option<f64>,
}

#[pymethods]
impl Sequence {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = io::parse_sequence(text).map_err(invalid)?;
        let seq = file.to_sequence().map_err(invalid)?;
        Ok(Sequence { seq, bound: file.bound, fidelity: file.achieved_fidelity })
    }

    fn to_json(&self) -> PyResult<String> {
        let file = SequenceFile::from_sequence(&self.seq, self.bound, self.fidelity);
        serde_json::to_string(&file).map_err(invalid)
    }

    #[getter]
    fn bound(&self) -> Option<usize> {
        self.bound
    }

    #[getter]
    fn achieved_fidelity(&self) -> Option<f64> {
        self.fidelity
    }

    /// Per-step phase labels.
    fn phases(&self) -> Vec<String> {
        self.seq.meta.iter().map(|p| format!("{p:?}").to_lowercase()).collect()
    }

    fn __len__(&self) -> usize {
        self.seq.len()
    }
}

#[pymodule]
fn pyqwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWalk>()?;
    m.add_class::<Sequence>()?;
    m.add("SCHEMA_VERSION", io::SCHEMA_VERSION)?;
    Ok(())
}
