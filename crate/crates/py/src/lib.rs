//! Python bindings: special functions, roots, kernels, both solvers and
//! whole experiment documents.

use fieldroad::{
    BoxDatum, DataSpec, InitialData, IntervalDatum, ModelParams, QuadratureConfig, SemiAnalyticSolver, SimConfig,
};
use fieldroad_cli::Cell;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model(d: f64, road_d: f64, mu: f64, nu: f64) -> PyResult<ModelParams> {
    ModelParams::new(d, road_d, mu, nu).map_err(value_error)
}

/// Boxes are `(x0, x1, y0, y1, height)`, intervals `(x0, x1, height)`.
fn data_spec(boxes: Vec<(f64, f64, f64, f64, f64)>, intervals: Vec<(f64, f64, f64)>) -> PyResult<DataSpec> {
    let spec = DataSpec {
        boxes: boxes
            .into_iter()
            .map(|(x0, x1, y0, y1, height)| BoxDatum { x: [x0, x1], y: [y0, y1], height })
            .collect(),
        intervals: intervals
            .into_iter()
            .map(|(x0, x1, height)| IntervalDatum { x: [x0, x1], height })
            .collect(),
    };
    spec.validate().map_err(value_error)?;
    Ok(spec)
}

fn rasterize(spec: &DataSpec, h: f64) -> PyResult<InitialData> {
    spec.rasterize(h).map_err(value_error)
}

/// `e^{z^2} erfc(z)`.
#[pyfunction]
fn erfc_ratio(z: Complex64) -> PyResult<Complex64> {
    fieldroad::erfc_ratio(z).map_err(value_error)
}

/// Roots of `P_delta` as a dict with `alpha`, `beta`, `gamma` and `kind`.
#[pyfunction]
#[pyo3(signature = (d, road_d, mu, nu, delta))]
fn roots<'py>(py: Python<'py>, d: f64, road_d: f64, mu: f64, nu: f64, delta: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = fieldroad::solve_p_delta(&model(d, road_d, mu, nu)?, delta);
    let out = PyDict::new(py);
    out.set_item("alpha", r.alpha)?;
    out.set_item("beta", r.beta)?;
    out.set_item("gamma", r.gamma)?;
    out.set_item("kind", format!("{:?}", r.kind))?;
    Ok(out)
}

/// Root regime of the parameter set, e.g. `"SimpleOnly"`.
#[pyfunction]
#[pyo3(signature = (d, road_d, mu, nu))]
fn regime(d: f64, road_d: f64, mu: f64, nu: f64) -> PyResult<String> {
    let r = fieldroad::classify_regime(&model(d, road_d, mu, nu)?).map_err(value_error)?;
    Ok(format!("{:?}", r.kind))
}

/// `(Lambda(t, x, y), refinement change)`.
#[pyfunction]
#[pyo3(signature = (t, x, y, d, road_d, mu, nu))]
fn lambda_kernel(t: f64, x: f64, y: f64, d: f64, road_d: f64, mu: f64, nu: f64) -> PyResult<(f64, f64)> {
    let p = model(d, road_d, mu, nu)?;
    let r = fieldroad::classify_regime(&p).map_err(value_error)?;
    fieldroad::kernels::lambda_kernel_with_error(t, x, y, &p, &r, &QuadratureConfig::default()).map_err(value_error)
}

/// Semi-analytic solution for box and interval data.
#[pyclass(frozen)]
struct Solver {
    inner: SemiAnalyticSolver,
}

#[pymethods]
impl Solver {
    #[new]
    #[pyo3(signature = (d, road_d, mu, nu, boxes=vec![], intervals=vec![], raster_h=0.5))]
    fn new(
        d: f64,
        road_d: f64,
        mu: f64,
        nu: f64,
        boxes: Vec<(f64, f64, f64, f64, f64)>,
        intervals: Vec<(f64, f64, f64)>,
        raster_h: f64,
    ) -> PyResult<Self> {
        let data = rasterize(&data_spec(boxes, intervals)?, raster_h)?;
        let inner =
            SemiAnalyticSolver::new(model(d, road_d, mu, nu)?, data, QuadratureConfig::default()).map_err(value_error)?;
        Ok(Solver { inner })
    }

    fn v(&self, py: Python<'_>, t: f64, x: f64, y: f64) -> PyResult<f64> {
        py.detach(|| self.inner.v(t, x, y)).map_err(value_error)
    }

    fn u(&self, py: Python<'_>, t: f64, x: f64) -> PyResult<f64> {
        py.detach(|| self.inner.u(t, x)).map_err(value_error)
    }

    /// `(value, error)`.
    fn v_estimate(&self, py: Python<'_>, t: f64, x: f64, y: f64) -> PyResult<(f64, f64)> {
        let e = py.detach(|| self.inner.v_estimate(t, x, y)).map_err(value_error)?;
        Ok((e.value, e.error))
    }

    /// `(value, error)`.
    fn u_estimate(&self, py: Python<'_>, t: f64, x: f64) -> PyResult<(f64, f64)> {
        let e = py.detach(|| self.inner.u_estimate(t, x)).map_err(value_error)?;
        Ok((e.value, e.error))
    }
}

/// Finite-difference run; returns a dict of equal-length lists
/// `t, sup_v, sup_u, total_mass, min_value`.
#[pyfunction]
#[pyo3(signature = (d, road_d, mu, nu, m, h, t_end, record_every, boxes=vec![], intervals=vec![], cfl_safety=0.9))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    d: f64,
    road_d: f64,
    mu: f64,
    nu: f64,
    m: f64,
    h: f64,
    t_end: f64,
    record_every: f64,
    boxes: Vec<(f64, f64, f64, f64, f64)>,
    intervals: Vec<(f64, f64, f64)>,
    cfl_safety: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SimConfig {
        params: model(d, road_d, mu, nu)?,
        m,
        h,
        t_end,
        cfl_safety,
        record_every,
        data: rasterize(&data_spec(boxes, intervals)?, h)?,
    };
    let records = py.detach(|| fieldroad::run(&config)).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("t", records.iter().map(|r| r.t).collect::<Vec<_>>())?;
    out.set_item("sup_v", records.iter().map(|r| r.sup_v).collect::<Vec<_>>())?;
    out.set_item("sup_u", records.iter().map(|r| r.sup_u).collect::<Vec<_>>())?;
    out.set_item("total_mass", records.iter().map(|r| r.total_mass).collect::<Vec<_>>())?;
    out.set_item("min_value", records.iter().map(|r| r.min_value).collect::<Vec<_>>())?;
    Ok(out)
}

/// Runs a JSON experiment document; returns `{"columns", "rows", "summary"}`.
#[pyfunction]
fn run_config<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let spec = fieldroad_cli::parse_config(text).map_err(value_error)?;
    let outcome = py.detach(|| fieldroad_cli::execute(&spec, false)).map_err(value_error)?;
    let rows = PyList::empty(py);
    for row in &outcome.table.rows {
        let cells = PyList::empty(py);
        for cell in row {
            match cell {
                Cell::Num(v) => cells.append(*v)?,
                Cell::Text(s) => cells.append(s)?,
                Cell::Empty => cells.append(py.None())?,
            }
        }
        rows.append(cells)?;
    }
    let summary = py.import("json")?.call_method1("loads", (outcome.summary.to_string(),))?;
    let out = PyDict::new(py);
    out.set_item("columns", outcome.table.header.clone())?;
    out.set_item("rows", rows)?;
    out.set_item("summary", summary)?;
    Ok(out)
}

#[pymodule]
mod fieldroad_py {
    #[pymodule_export]
    use super::{erfc_ratio, lambda_kernel, regime, roots, run_config, simulate, Solver};

    #[allow(non_upper_case_globals)]
    #[pymodule_export]
    const __version__: &str = fieldroad::VERSION;
}
