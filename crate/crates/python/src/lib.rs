//! Python bindings. Polygons cross the boundary as lists of `[x, y, z]`
//! triples; structured results come back as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use thickknot::diagram::Diagram;
use thickknot::families::Family;
use thickknot::moves::{ball as typed_ball, DEFAULT_BALL_BUDGET};
use thickknot::optimizer::{tighten as anneal, AnnealConfig};
use thickknot::projection::{extract_diagram, Direction};
use thickknot::sweep::{sweep as sweep_path, PolygonPath, SweepOptions};
use thickknot::Polygon3;

fn err(e: thickknot::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn polygon(vertices: Vec<[f64; 3]>) -> PyResult<Polygon3> {
    Polygon3::from_points(&vertices).map_err(err)
}

fn direction(d: [f64; 3]) -> PyResult<Direction> {
    Direction::from_xyz(d[0], d[1], d[2]).map_err(err)
}

/// `(min_rad, dcsd, thickness, ropelength)` of a closed polygon.
#[pyfunction]
fn thickness(vertices: Vec<[f64; 3]>) -> PyResult<(f64, f64, f64, f64)> {
    let p = polygon(vertices)?;
    let t = p.thickness().map_err(err)?;
    Ok((t.min_rad, t.dcsd, t.thickness, p.total_length() / t.thickness))
}

/// `(key, crossings, determinant)` of the projection along `dir`.
#[pyfunction]
#[pyo3(signature = (vertices, dir = [0.0, 0.0, 1.0]))]
fn diagram(vertices: Vec<[f64; 3]>, dir: [f64; 3]) -> PyResult<(String, usize, u64)> {
    let d = extract_diagram(&polygon(vertices)?, &direction(dir)?).map_err(err)?;
    Ok((d.key().to_string(), d.n_crossings(), d.determinant()))
}

/// Determinant of a diagram given by its canonical key.
#[pyfunction]
fn determinant(key: &str) -> PyResult<u64> {
    Ok(Diagram::from_key(key).map_err(err)?.determinant())
}

/// Rooted typed ball around a canonical key, as JSON.
#[pyfunction]
#[pyo3(signature = (key, radius, budget = DEFAULT_BALL_BUDGET))]
fn ball(key: &str, radius: usize, budget: usize) -> PyResult<String> {
    let root = if key == "empty" {
        Diagram::empty()
    } else {
        Diagram::from_key(key).map_err(err)?
    };
    Ok(typed_ball(&root, radius, budget).map_err(err)?.to_json())
}

/// Sweep report of a path given as JSON (`{"keyframes": ...}`).
#[pyfunction]
#[pyo3(signature = (path_json, dir = [0.0, 0.0, 1.0], step = thickknot::sweep::DEFAULT_STEP))]
fn sweep(path_json: &str, dir: [f64; 3], step: f64) -> PyResult<String> {
    let path = PolygonPath::from_json(path_json).map_err(err)?;
    let opts = SweepOptions {
        step,
        ..SweepOptions::default()
    };
    Ok(sweep_path("path", &path, &direction(dir)?, &opts).map_err(err)?.to_json())
}

/// Number of paths in a family file's JSON.
#[pyfunction]
fn family_size(family_json: &str) -> PyResult<usize> {
    Ok(Family::from_json(family_json).map_err(err)?.paths.len())
}

/// Anneals a polygon; returns the unit-thickness result and its ropelength.
#[pyfunction]
#[pyo3(signature = (vertices, seed, iterations = 100_000))]
fn tighten(py: Python<'_>, vertices: Vec<[f64; 3]>, seed: u64, iterations: usize) -> PyResult<(Vec<[f64; 3]>, f64)> {
    let p = polygon(vertices)?;
    let cfg = AnnealConfig {
        seed,
        iterations,
        ..AnnealConfig::default()
    };
    let run = py.detach(|| anneal(&p, &cfg)).map_err(err)?;
    let out = run.polygon.vertices().iter().map(|v| [v.x, v.y, v.z]).collect();
    Ok((out, run.ropelength))
}

#[pymodule]
fn thickknot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(thickness, m)?)?;
    m.add_function(wrap_pyfunction!(diagram, m)?)?;
    m.add_function(wrap_pyfunction!(determinant, m)?)?;
    m.add_function(wrap_pyfunction!(ball, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(family_size, m)?)?;
    m.add_function(wrap_pyfunction!(tighten, m)?)?;
    Ok(())
}
