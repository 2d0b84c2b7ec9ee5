//! Python bindings: curves, flows, sweeps and the check reports.

use std::path::PathBuf;

use alphaflow::ancient::{self, EpsPolicy, SweepSpec};
use alphaflow::flow::{self, FlowParams, FlowTrace, Integrator};
use alphaflow::geometry::{hausdorff_distance, CurveState, Diagnostics};
use alphaflow::grid::ThetaGrid;
use alphaflow::initcurve::{build_doubled_cap, default_eps, DoubledCapSpec};
use alphaflow::report::CheckReport;
use alphaflow::{translator, FlowError};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: FlowError) -> PyErr {
    match e {
        FlowError::Usage(_) | FlowError::Domain(_) | FlowError::Spec(_) | FlowError::Parse(_) => {
            PyValueError::new_err(e.to_string())
        }
        FlowError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn integrator(name: &str) -> PyResult<Integrator> {
    match name {
        "euler" => Ok(Integrator::ForwardEuler),
        "midpoint" => Ok(Integrator::Midpoint),
        other => Err(PyValueError::new_err(format!(
            "unknown integrator {other:?}, expected \"euler\" or \"midpoint\""
        ))),
    }
}

fn diagnostics_dict<'py>(py: Python<'py>, d: &Diagnostics) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("ell", d.ell)?;
    out.set_item("ell_minus", d.ell_minus)?;
    out.set_item("width_h", d.width_h)?;
    out.set_item("width_h_minus", d.width_h_minus)?;
    out.set_item("area", d.area)?;
    out.set_item("tip_curvature", d.tip_curvature)?;
    out.set_item("height", d.height)?;
    Ok(out)
}

fn report_dict<'py>(py: Python<'py>, r: &CheckReport) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("name", &r.name)?;
    out.set_item("paper_ref", &r.paper_ref)?;
    out.set_item("pass", r.pass)?;
    out.set_item("margins", &r.margins)?;
    out.set_item("fitted", &r.fitted)?;
    Ok(out)
}

fn reports<'py>(py: Python<'py>, rs: &[CheckReport]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rs.iter().map(|r| report_dict(py, r)).collect()
}

/// A convex curve given by its support function on `n` turning angles.
#[pyclass(name = "Curve", module = "alphaflow_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyCurve {
    inner: CurveState,
}

#[pymethods]
impl PyCurve {
    #[new]
    #[pyo3(signature = (h, t = 0.0))]
    fn new(h: Vec<f64>, t: f64) -> PyResult<Self> {
        let grid = ThetaGrid::new(h.len()).map_err(to_py)?;
        let inner = CurveState::new(grid, h, t).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn circle(n: usize, radius: f64) -> PyResult<Self> {
        let grid = ThetaGrid::new(n).map_err(to_py)?;
        Ok(Self {
            inner: CurveState::circle(grid, radius),
        })
    }

    /// Mollified doubled translator cap of the given depth.
    #[staticmethod]
    #[pyo3(signature = (depth, alpha, n = 512, eps = None))]
    fn doubled_cap(depth: f64, alpha: f64, n: usize, eps: Option<f64>) -> PyResult<Self> {
        let grid = ThetaGrid::new(n).map_err(to_py)?;
        let eps = eps.unwrap_or_else(|| default_eps(&grid));
        let spec = DoubledCapSpec {
            depth,
            alpha,
            eps,
            grid,
        };
        let inner = build_doubled_cap(&spec).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn h(&self) -> Vec<f64> {
        self.inner.h.clone()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid.n()
    }

    #[getter]
    fn thetas(&self) -> Vec<f64> {
        self.inner.grid.thetas()
    }

    fn curvature(&self) -> Vec<f64> {
        self.inner.curvature()
    }

    fn radius_of_curvature(&self) -> Vec<f64> {
        self.inner.radius_of_curvature()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        diagnostics_dict(py, &self.inner.diagnostics())
    }

    /// The Steiner-centered copy and the translation that was removed.
    fn centered(&self) -> (Self, (f64, f64)) {
        let (c, p) = self.inner.centered();
        (Self { inner: c }, (p[0], p[1]))
    }

    fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            inner: self.inner.translated([dx, dy]),
        }
    }

    fn polyline(&self) -> PyResult<Vec<(f64, f64)>> {
        let pts = self.inner.reconstruct_polyline().map_err(to_py)?;
        Ok(pts.into_iter().map(|p| (p[0], p[1])).collect())
    }

    fn hausdorff(&self, other: &PyCurve) -> PyResult<f64> {
        hausdorff_distance(&self.inner, &other.inner).map_err(to_py)
    }

    #[pyo3(signature = (alpha, cfl = 0.4))]
    fn stable_dt(&self, alpha: f64, cfl: f64) -> PyResult<f64> {
        let mut p = FlowParams::new(alpha);
        p.cfl_safety = cfl;
        flow::stable_dt(&self.inner, &p).map_err(to_py)
    }

    #[pyo3(signature = (dt, alpha, integrator = "euler"))]
    fn step(&self, dt: f64, alpha: f64, integrator: &str) -> PyResult<Self> {
        let mut p = FlowParams::new(alpha);
        p.integrator = self::integrator(integrator)?;
        let inner = flow::step(&self.inner, dt, &p).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.grid.n()
    }

    fn __repr__(&self) -> String {
        format!("Curve(n={}, t={})", self.inner.grid.n(), self.inner.t)
    }
}

/// A run flowed to extinction; times are shifted so extinction is at 0.
#[pyclass(name = "Trace", module = "alphaflow_py")]
pub struct PyTrace {
    inner: FlowTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn t_extinction(&self) -> f64 {
        self.inner.t_extinction
    }

    #[getter]
    fn extinction_point(&self) -> (f64, f64) {
        let p = self.inner.extinction_point;
        (p[0], p[1])
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn complete(&self) -> bool {
        self.inner.complete
    }

    #[getter]
    fn snapshots(&self) -> Vec<PyCurve> {
        self.inner
            .snapshots
            .iter()
            .map(|s| PyCurve { inner: s.clone() })
            .collect()
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .diagnostics
            .iter()
            .map(|d| diagnostics_dict(py, d))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(alpha={}, t_extinction={}, snapshots={})",
            self.inner.alpha,
            self.inner.t_extinction,
            self.inner.snapshots.len()
        )
    }
}

#[pyfunction]
fn slab_width(alpha: f64) -> PyResult<f64> {
    Ok(translator::slab_width(alpha).map_err(to_py)?.value())
}

#[pyfunction]
fn translator_curvature(theta: f64, alpha: f64) -> PyResult<f64> {
    translator::translator_curvature(theta, alpha).map_err(to_py)
}

#[pyfunction]
fn cap_depth(theta: f64, alpha: f64) -> PyResult<f64> {
    translator::cap_depth(theta, alpha).map_err(to_py)
}

/// Turning angle at which the translator reaches `depth`.
#[pyfunction]
fn cap_angle(depth: f64, alpha: f64) -> PyResult<f64> {
    Ok(translator::cap_angle(depth, alpha).map_err(to_py)?.theta)
}

#[pyfunction]
fn cap_halfwidth(theta: f64, alpha: f64) -> PyResult<f64> {
    translator::cap_halfwidth(theta, alpha).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (
    curve,
    alpha,
    cfl = 0.4,
    area_stop = 1e-3,
    snapshot_interval = 0.5,
    record_interval = 0.05,
    integrator = "euler",
))]
fn flow_to_extinction(
    py: Python<'_>,
    curve: &PyCurve,
    alpha: f64,
    cfl: f64,
    area_stop: f64,
    snapshot_interval: f64,
    record_interval: f64,
    integrator: &str,
) -> PyResult<PyTrace> {
    let params = FlowParams {
        alpha,
        cfl_safety: cfl,
        area_stop_fraction: area_stop,
        snapshot_interval,
        record_interval,
        integrator: self::integrator(integrator)?,
        ..FlowParams::new(alpha)
    };
    let state = curve.inner.clone();
    let trace = py
        .detach(|| flow::flow_to_extinction(&state, &params))
        .map_err(to_py)?;
    Ok(PyTrace { inner: trace })
}

#[pyfunction]
#[pyo3(signature = (alpha, n = 256))]
fn circle_oracle<'py>(py: Python<'py>, alpha: f64, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let rep = py
        .detach(|| flow::circle_oracle(n, &FlowParams::new(alpha)))
        .map_err(to_py)?;
    report_dict(py, &rep)
}

#[pyfunction]
fn translator_checks<'py>(py: Python<'py>, alpha: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    reports(py, &translator::translator_checks(alpha).map_err(to_py)?)
}

/// Flow a ladder of doubled caps and return the sweep reports.
#[pyfunction]
#[pyo3(signature = (alpha, depths, times, n = 512, eps_factor = 10.0, tip_times = None))]
fn sweep<'py>(
    py: Python<'py>,
    alpha: f64,
    depths: Vec<f64>,
    times: Vec<f64>,
    n: usize,
    eps_factor: f64,
    tip_times: Option<Vec<f64>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let tip_times = tip_times.unwrap_or_else(|| times.clone());
    let spec = SweepSpec {
        alpha,
        depths,
        eps: EpsPolicy::GridMultiple(eps_factor),
        n,
        comparison_times: times,
    };
    let out = py
        .detach(|| {
            let set = ancient::run_sweep(&spec, &FlowParams::new(alpha))?;
            ancient::sweep_reports(&set, &tip_times)
        })
        .map_err(to_py)?;
    reports(py, &out)
}

/// Recompute the reports of a `flow` or `sweep` output directory.
#[pyfunction]
fn verify<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let out = py
        .detach(|| alphaflow::cli::verify_dir(&path))
        .map_err(to_py)?;
    reports(py, &out)
}

#[pymodule]
fn alphaflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCurve>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(slab_width, m)?)?;
    m.add_function(wrap_pyfunction!(translator_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(cap_depth, m)?)?;
    m.add_function(wrap_pyfunction!(cap_angle, m)?)?;
    m.add_function(wrap_pyfunction!(cap_halfwidth, m)?)?;
    m.add_function(wrap_pyfunction!(flow_to_extinction, m)?)?;
    m.add_function(wrap_pyfunction!(circle_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(translator_checks, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_names() {
        assert_eq!(integrator("euler").unwrap(), Integrator::ForwardEuler);
        assert_eq!(integrator("midpoint").unwrap(), Integrator::Midpoint);
        Python::initialize();
        assert!(integrator("rk4").is_err());
    }

    #[test]
    fn errors_map_to_python_types() {
        Python::initialize();
        Python::attach(|py| {
            let e = to_py(FlowError::Domain("alpha".into()));
            assert!(e.is_instance_of::<PyValueError>(py));
            let e = to_py(FlowError::Io("disk".into()));
            assert!(e.is_instance_of::<PyIOError>(py));
            let e = to_py(FlowError::Convexity {
                min_radius: -1.0,
                node: 3,
            });
            assert!(e.is_instance_of::<PyRuntimeError>(py));
        });
    }

    #[test]
    fn curve_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let c = PyCurve::circle(128, 2.0).unwrap();
            assert!((c.area() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
            let d = c.diagnostics(py).unwrap();
            let ell: f64 = d.get_item("ell").unwrap().unwrap().extract().unwrap();
            assert!((ell - 2.0).abs() < 1e-12);
            let rebuilt = PyCurve::new(c.h(), 0.0).unwrap();
            assert_eq!(rebuilt.hausdorff(&c).unwrap(), 0.0);
            assert!(PyCurve::new(vec![1.0; 10], 0.0).is_err());
        });
    }
}
