//! Python bindings for `framescale`. Vectors and matrices cross the
//! boundary as nested lists of floats, one inner list per vector or row.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use framescale::io::{matrix_to_rows, rows_to_matrix};
use framescale::{obstruction, piecewise, scalability, transport, Error, ParsevalTarget, DEFAULT_TOL};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Inconsistency(msg) => PyRuntimeError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<nalgebra::DMatrix<f64>> {
    rows_to_matrix(&rows).map_err(PyValueError::new_err)
}

#[pyclass(name = "Frame", module = "pyframescale", frozen)]
struct PyFrame {
    inner: framescale::Frame,
}

#[pymethods]
impl PyFrame {
    #[new]
    fn new(vectors: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: framescale::Frame::from_rows(&vectors).map_err(to_py)? })
    }

    /// Reads a CSV or JSON frame file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self { inner: framescale::io::load_frame(&path, None).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Frame(dim={}, len={})", self.inner.dim(), self.inner.len())
    }

    fn vectors(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn frame_operator(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.inner.frame_operator())
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// `(lower, upper, condition_number, spanning)`
    fn frame_bounds(&self) -> (f64, f64, f64, bool) {
        let b = self.inner.frame_bounds();
        (b.lower, b.upper, b.condition_number, b.spanning)
    }

    fn canonical_parseval(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.canonical_parseval().map_err(to_py)? })
    }

    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn is_unit_norm(&self, tol: f64) -> bool {
        self.inner.is_unit_norm(tol)
    }

    #[pyo3(signature = (u, tol = 1e-10))]
    fn apply_unitary(&self, u: Vec<Vec<f64>>, tol: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.apply_unitary(&matrix(u)?, tol).map_err(to_py)? })
    }
}

#[pyclass(name = "Projection", module = "pyframescale", frozen)]
struct PyProjection {
    inner: framescale::OrthogonalProjection,
}

#[pymethods]
impl PyProjection {
    /// Validates a symmetric idempotent matrix.
    #[new]
    #[pyo3(signature = (matrix_rows, tol = DEFAULT_TOL))]
    fn new(matrix_rows: Vec<Vec<f64>>, tol: f64) -> PyResult<Self> {
        let inner = framescale::OrthogonalProjection::from_matrix(matrix(matrix_rows)?, tol).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Projection onto the span of the given vectors.
    #[staticmethod]
    fn from_basis(dim: usize, vectors: Vec<Vec<f64>>) -> PyResult<Self> {
        let vs: Vec<_> = vectors.into_iter().map(nalgebra::DVector::from_vec).collect();
        Ok(Self { inner: framescale::OrthogonalProjection::from_basis(dim, &vs).map_err(to_py)? })
    }

    /// Coordinate projection onto the zero-based `indices`.
    #[staticmethod]
    fn canonical(indices: Vec<usize>, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: framescale::OrthogonalProjection::canonical(&indices, dim).map_err(to_py)? })
    }

    #[staticmethod]
    fn random(dim: usize, rank: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: framescale::OrthogonalProjection::random(dim, rank, seed).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn range_basis(&self) -> Vec<Vec<f64>> {
        self.inner.range_basis().iter().map(|v| v.iter().copied().collect()).collect()
    }

    fn complement(&self) -> Self {
        Self { inner: self.inner.complement() }
    }

    fn __repr__(&self) -> String {
        format!("Projection(dim={}, rank={})", self.inner.dim(), self.inner.rank())
    }
}

#[pyclass(name = "PiecewiseScaling", module = "pyframescale", frozen)]
struct PyPiecewiseScaling {
    inner: piecewise::PiecewiseScaling,
}

#[pymethods]
impl PyPiecewiseScaling {
    #[new]
    fn new(projection: &PyProjection, a: Vec<f64>, b: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: piecewise::PiecewiseScaling::new(projection.inner.clone(), a, b).map_err(to_py)? })
    }

    #[getter]
    fn projection(&self) -> PyProjection {
        PyProjection { inner: self.inner.projection.clone() }
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.a.clone()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.b.clone()
    }

    fn scaled_vectors(&self, frame: &PyFrame) -> PyResult<Vec<Vec<f64>>> {
        let vs = self.inner.scaled_vectors(&frame.inner).map_err(to_py)?;
        Ok(vs.iter().map(|v| v.iter().copied().collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("PiecewiseScaling(len={}, rank={})", self.inner.len(), self.inner.projection.rank())
    }
}

fn wrap(s: piecewise::PiecewiseScaling) -> PyPiecewiseScaling {
    PyPiecewiseScaling { inner: s }
}

/// Standard scaling to a Parseval frame, optionally for the range of `projection`.
#[pyfunction]
#[pyo3(signature = (frame, projection = None, tol = DEFAULT_TOL))]
fn solve_standard_scaling<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    projection: Option<&PyProjection>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let target = match projection {
        Some(p) => ParsevalTarget::Range(&p.inner),
        None => ParsevalTarget::Identity(frame.inner.dim()),
    };
    let v = scalability::solve_standard_scaling(frame.inner.vectors(), target, tol).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("feasible", v.feasible)?;
    d.set_item("constants", v.scaling.map(|s| s.constants))?;
    d.set_item("residual", v.residual)?;
    d.set_item("certificate", v.certificate.map(|c| c.tag()))?;
    d.set_item("converged", v.converged)?;
    d.set_item("warnings", v.warnings)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (frame, scaling, tol = DEFAULT_TOL))]
fn verify_piecewise<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    scaling: &PyPiecewiseScaling,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = piecewise::verify_piecewise(&frame.inner, &scaling.inner, tol).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed)?;
    d.set_item("three_condition_passed", r.three_condition_passed)?;
    d.set_item("direct_residual", r.direct_residual)?;
    d.set_item("p_side", r.p_side.residual)?;
    d.set_item("q_side", r.q_side.residual)?;
    d.set_item("cross_norm", r.cross_norm)?;
    d.set_item("route_gap", r.route_gap)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (frame, projection, tol = DEFAULT_TOL))]
fn construct_r2(frame: &PyFrame, projection: &PyProjection, tol: f64) -> PyResult<PyPiecewiseScaling> {
    piecewise::construct_r2(&frame.inner, &projection.inner, tol).map(wrap).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (frame, tol = DEFAULT_TOL))]
fn construct_r3(frame: &PyFrame, tol: f64) -> PyResult<PyPiecewiseScaling> {
    piecewise::construct_r3(&frame.inner, tol).map(wrap).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (frame, indices = [0, 1, 2, 3], tol = DEFAULT_TOL))]
fn construct_r4_special(frame: &PyFrame, indices: [usize; 4], tol: f64) -> PyResult<PyPiecewiseScaling> {
    piecewise::construct_r4_special(&frame.inner, indices, tol).map(wrap).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (frame, projection, p_indices, q_indices, tol = DEFAULT_TOL))]
fn construct_split(
    frame: &PyFrame,
    projection: &PyProjection,
    p_indices: Vec<usize>,
    q_indices: Vec<usize>,
    tol: f64,
) -> PyResult<PyPiecewiseScaling> {
    piecewise::construct_from_orthogonal_split(&frame.inner, &projection.inner, &p_indices, &q_indices, tol)
        .map(wrap)
        .map_err(to_py)
}

/// Returns a scaling or `None` when nothing was found within the budget.
#[pyfunction]
#[pyo3(signature = (frame, ranks = None, budget = 200, seed = 0, tol = DEFAULT_TOL))]
fn search_piecewise(
    py: Python<'_>,
    frame: &PyFrame,
    ranks: Option<Vec<usize>>,
    budget: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Option<PyPiecewiseScaling>> {
    let opts = piecewise::SearchOptions { ranks, budget, seed, tol };
    let outcome = py.detach(|| piecewise::search_piecewise(&frame.inner, &opts)).map_err(to_py)?;
    Ok(outcome.scaling.map(wrap))
}

#[pyfunction]
fn closeness_obstruction<'py>(py: Python<'py>, frame: &PyFrame) -> PyResult<Bound<'py, PyDict>> {
    let r = obstruction::closeness_obstruction(&frame.inner);
    let d = PyDict::new(py);
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("applicable_ranks", r.applicable_ranks)?;
    d.set_item("certificate", r.theorem.tag())?;
    d.set_item("unit_norm", r.unit_norm)?;
    d.set_item("farthest_pair", r.farthest_pair)?;
    Ok(d)
}

/// An orthogonal `U` with `U P Uᵀ = Q`.
#[pyfunction]
fn intertwiner(p: &PyProjection, q: &PyProjection) -> PyResult<Vec<Vec<f64>>> {
    transport::intertwiner(&p.inner, &q.inner).map(|u| matrix_to_rows(&u)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (frame, scaling, u, tol = 1e-10))]
fn transport_scaling(
    frame: &PyFrame,
    scaling: &PyPiecewiseScaling,
    u: Vec<Vec<f64>>,
    tol: f64,
) -> PyResult<(PyFrame, PyPiecewiseScaling)> {
    let (f, s) = transport::transport_scaling(&frame.inner, &scaling.inner, &matrix(u)?, tol).map_err(to_py)?;
    Ok((PyFrame { inner: f }, wrap(s)))
}

#[pyfunction]
#[pyo3(signature = (frame, scaling, tol = 1e-10))]
fn to_canonical(frame: &PyFrame, scaling: &PyPiecewiseScaling, tol: f64) -> PyResult<(PyFrame, PyPiecewiseScaling)> {
    let (f, s) = transport::to_canonical(&frame.inner, &scaling.inner, tol).map_err(to_py)?;
    Ok((PyFrame { inner: f }, wrap(s)))
}

/// Module initializer, public so embedding hosts can register it.
#[pymodule]
pub fn pyframescale(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_class::<PyProjection>()?;
    m.add_class::<PyPiecewiseScaling>()?;
    m.add_function(wrap_pyfunction!(solve_standard_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(verify_piecewise, m)?)?;
    m.add_function(wrap_pyfunction!(construct_r2, m)?)?;
    m.add_function(wrap_pyfunction!(construct_r3, m)?)?;
    m.add_function(wrap_pyfunction!(construct_r4_special, m)?)?;
    m.add_function(wrap_pyfunction!(construct_split, m)?)?;
    m.add_function(wrap_pyfunction!(search_piecewise, m)?)?;
    m.add_function(wrap_pyfunction!(closeness_obstruction, m)?)?;
    m.add_function(wrap_pyfunction!(intertwiner, m)?)?;
    m.add_function(wrap_pyfunction!(transport_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(to_canonical, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
