//! Python bindings: rig, triangulation, timing error, sweeps.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use stereoskew as core;

create_exception!(stereoskew_py, GeometryError, PyValueError);

fn to_py(e: core::Error) -> PyErr {
    if e.is_geometry() {
        GeometryError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn geometry(e: core::GeometryError) -> PyErr {
    GeometryError::new_err(e.to_string())
}

type Triple = (f64, f64, f64);

fn triple(p: core::Point3) -> Triple {
    (p.x, p.y, p.z)
}

fn displacement(v: &[f64]) -> PyResult<core::Displacement> {
    match *v {
        [dx, dy] => Ok(core::Displacement::planar(dx, dy)),
        [dx, dy, dz] => Ok(core::Displacement::new(dx, dy, dz)),
        _ => Err(PyValueError::new_err(
            "displacement needs 2 or 3 components",
        )),
    }
}

fn convention(s: &str) -> PyResult<core::ReferenceConvention> {
    s.parse()
        .map_err(|e: core::Error| PyValueError::new_err(e.to_string()))
}

/// Two cameras at (-d, 0, 0) and (+d, 0, 0).
#[pyclass(name = "CameraRig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyCameraRig(core::CameraRig);

#[pymethods]
impl PyCameraRig {
    #[new]
    fn new(d: f64) -> PyResult<Self> {
        core::CameraRig::new(d).map(Self).map_err(geometry)
    }

    #[getter]
    fn d(&self) -> f64 {
        self.0.half_separation()
    }

    #[getter]
    fn camera_a(&self) -> Triple {
        triple(self.0.camera_a())
    }

    #[getter]
    fn camera_b(&self) -> Triple {
        triple(self.0.camera_b())
    }

    fn __repr__(&self) -> String {
        format!("CameraRig(d={})", self.0.half_separation())
    }
}

/// Returns (alpha1, beta1, alpha2, beta2).
#[pyfunction]
fn angles_2d(rig: &PyCameraRig, point: (f64, f64)) -> PyResult<(f64, f64, f64, f64)> {
    let a =
        core::angles_from_point_2d(rig.0, core::Point2::new(point.0, point.1)).map_err(geometry)?;
    Ok((a.alpha1, a.beta1, a.alpha2, a.beta2))
}

#[pyfunction]
fn point_2d(rig: &PyCameraRig, alpha1: f64, alpha2: f64) -> PyResult<(f64, f64)> {
    let p = core::point_from_angles_2d(rig.0, core::AngleSet2::from_alphas(alpha1, alpha2))
        .map_err(geometry)?;
    Ok((p.x, p.y))
}

/// Returns (alpha1, beta1, gamma1, alpha2, beta2, gamma2).
#[pyfunction]
fn angles_3d(rig: &PyCameraRig, point: Triple) -> PyResult<(f64, f64, f64, f64, f64, f64)> {
    let a = core::angles_from_point_3d(rig.0, core::Point3::new(point.0, point.1, point.2))
        .map_err(geometry)?;
    Ok((a.alpha1, a.beta1, a.gamma1, a.alpha2, a.beta2, a.gamma2))
}

fn angle_set(a: (f64, f64, f64, f64, f64, f64)) -> core::AngleSet3 {
    core::AngleSet3 {
        alpha1: a.0,
        beta1: a.1,
        gamma1: a.2,
        alpha2: a.3,
        beta2: a.4,
        gamma2: a.5,
    }
}

#[pyfunction]
fn point_3d(rig: &PyCameraRig, angles: (f64, f64, f64, f64, f64, f64)) -> PyResult<Triple> {
    core::point_from_angles_3d(rig.0, angle_set(angles))
        .map(triple)
        .map_err(geometry)
}

#[pyclass(name = "ErrorReport", frozen)]
struct PyErrorReport(core::ErrorReport);

#[pymethods]
impl PyErrorReport {
    #[getter]
    fn convention(&self) -> &'static str {
        self.0.convention.as_str()
    }
    #[getter]
    fn displacement(&self) -> Triple {
        triple(self.0.displacement.as_vector())
    }
    #[getter]
    fn true_point(&self) -> Triple {
        triple(self.0.true_point)
    }
    #[getter]
    fn displaced_point(&self) -> Triple {
        triple(self.0.displaced_point)
    }
    #[getter]
    fn reconstructed_point(&self) -> Triple {
        triple(self.0.reconstructed_point)
    }
    #[getter]
    fn reference_point(&self) -> Triple {
        triple(self.0.reference_point)
    }
    #[getter]
    fn error_vector(&self) -> Triple {
        triple(self.0.error_vector)
    }
    #[getter]
    fn error_magnitude(&self) -> f64 {
        self.0.error_magnitude
    }
    #[getter]
    fn approx_error_vector(&self) -> Triple {
        triple(self.0.approx_error_vector)
    }
    #[getter]
    fn approx_error_magnitude(&self) -> f64 {
        self.0.approx_error_magnitude
    }

    fn __repr__(&self) -> String {
        format!(
            "ErrorReport(error_magnitude={}, convention='{}')",
            self.0.error_magnitude, self.0.convention
        )
    }
}

/// Error at `point` when camera B sees it moved by `disp`. Two-component
/// points use the planar model.
#[pyfunction]
#[pyo3(signature = (rig, point, disp, convention = "midpoint"))]
fn localization_error(
    rig: &PyCameraRig,
    point: Vec<f64>,
    disp: Vec<f64>,
    convention: &str,
) -> PyResult<PyErrorReport> {
    let conv = self::convention(convention)?;
    let disp = displacement(&disp)?;
    let report = match *point {
        [x, y] => core::localization_error_2d(rig.0, core::Point2::new(x, y), disp, conv),
        [x, y, z] => core::localization_error_3d(rig.0, core::Point3::new(x, y, z), disp, conv),
        _ => return Err(PyValueError::new_err("point needs 2 or 3 coordinates")),
    };
    report.map(PyErrorReport).map_err(to_py)
}

/// First-order estimate from the base point: (ex, ey, ez, magnitude).
#[pyfunction]
fn approx_error(
    rig: &PyCameraRig,
    point: Vec<f64>,
    disp: Vec<f64>,
) -> PyResult<(f64, f64, f64, f64)> {
    let disp = displacement(&disp)?;
    let a = match *point {
        [x, y] => core::approx_error_2d(rig.0, core::Point2::new(x, y), disp),
        [x, y, z] => core::approx_error_3d(rig.0, core::Point3::new(x, y, z), disp),
        _ => return Err(PyValueError::new_err("point needs 2 or 3 coordinates")),
    };
    Ok((a.ex, a.ey, a.ez, a.magnitude))
}

/// Closest approach of the two camera rays: (midpoint, gap).
#[pyfunction]
fn skew_line_gap(
    rig: &PyCameraRig,
    first: (f64, f64, f64, f64, f64, f64),
    second: (f64, f64, f64, f64, f64, f64),
) -> PyResult<(Triple, f64)> {
    let g =
        core::skew_line_gap_3d(rig.0, &angle_set(first), &angle_set(second)).map_err(geometry)?;
    Ok((triple(g.midpoint), g.gap))
}

#[pyclass(name = "Sweep", frozen)]
struct PySweep(core::SweepOutput);

#[pymethods]
impl PySweep {
    #[getter]
    fn max_error(&self) -> f64 {
        self.0.summary.max_error
    }
    #[getter]
    fn argmax_points(&self) -> Vec<Triple> {
        self.0
            .summary
            .argmax_points
            .iter()
            .copied()
            .map(triple)
            .collect()
    }
    #[getter]
    fn min_error(&self) -> f64 {
        self.0.summary.min_error
    }
    #[getter]
    fn mean_error(&self) -> f64 {
        self.0.summary.mean_error
    }
    #[getter]
    fn cell_count(&self) -> usize {
        self.0.summary.cell_count
    }
    #[getter]
    fn max_approx_vs_exact_gap(&self) -> Option<f64> {
        self.0.summary.max_approx_vs_exact_gap
    }

    /// The cells in the same CSV layout the command-line tool writes.
    fn cells_csv(&self) -> PyResult<String> {
        let bytes = core::io::cells_csv_bytes(&self.0.cells).map_err(to_py)?;
        Ok(String::from_utf8(bytes).expect("CSV is ASCII"))
    }

    fn __repr__(&self) -> String {
        format!(
            "Sweep(cells={}, max_error={})",
            self.0.summary.cell_count, self.0.summary.max_error
        )
    }
}

/// Sweeps the standard operating range (planar or volume).
#[pyfunction]
#[pyo3(signature = (rig, disp, mode = "2d", convention = "midpoint", step = 1.0, threads = None))]
fn run_sweep(
    py: Python<'_>,
    rig: &PyCameraRig,
    disp: Vec<f64>,
    mode: &str,
    convention: &str,
    step: f64,
    threads: Option<usize>,
) -> PyResult<PySweep> {
    let disp = displacement(&disp)?;
    let mut cfg = match mode {
        "2d" => core::SweepConfig::planar(rig.0, disp),
        "3d" => core::SweepConfig::spatial(rig.0, disp),
        _ => {
            return Err(PyValueError::new_err(format!(
                "mode must be '2d' or '3d', got '{mode}'"
            )))
        }
    };
    cfg.convention = self::convention(convention)?;
    cfg.range.step = step;
    let out = py.detach(|| match threads {
        Some(n) => core::run_sweep_with_threads(&cfg, n),
        None => core::run_sweep(&cfg),
    });
    out.map(PySweep).map_err(to_py)
}

#[pymodule]
fn stereoskew_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GeometryError", m.py().get_type::<GeometryError>())?;
    m.add_class::<PyCameraRig>()?;
    m.add_class::<PyErrorReport>()?;
    m.add_class::<PySweep>()?;
    m.add_function(wrap_pyfunction!(angles_2d, m)?)?;
    m.add_function(wrap_pyfunction!(point_2d, m)?)?;
    m.add_function(wrap_pyfunction!(angles_3d, m)?)?;
    m.add_function(wrap_pyfunction!(point_3d, m)?)?;
    m.add_function(wrap_pyfunction!(localization_error, m)?)?;
    m.add_function(wrap_pyfunction!(approx_error, m)?)?;
    m.add_function(wrap_pyfunction!(skew_line_gap, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
