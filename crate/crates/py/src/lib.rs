use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mapwit::cert::Certificate;
use mapwit::oracle::Oracle;
use mapwit::render::render_svg;
use mapwit::witness::check_hole_free;
use mapwit::{min_k, verify_witness, Graph, Mode, RunOptions};

fn graph(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
    let mut g = Graph::new(n);
    for (a, b) in edges {
        if a >= n || b >= n || a == b {
            return Err(PyValueError::new_err(format!("bad edge ({a}, {b}) for {n} vertices")));
        }
        g.add_edge(a, b);
    }
    Ok(g)
}

fn err(e: mapwit::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Recognizes a graph given as `n` and an edge list. With `k=None` the
/// smallest k is searched. Returns `(k, certificate_json)` on yes and `None`
/// on no; the certificate is only built when asked for.
#[pyfunction]
#[pyo3(signature = (n, edges, k=None, hole_free=false, certificate=false))]
fn recognize(
    n: usize,
    edges: Vec<(usize, usize)>,
    k: Option<usize>,
    hole_free: bool,
    certificate: bool,
) -> PyResult<Option<(usize, Option<String>)>> {
    let g = graph(n, edges)?;
    let mode = if certificate { Mode::Certificate } else { Mode::Decision };
    let found = match k {
        Some(k) => {
            let out = mapwit::recognize(&g, None, &RunOptions::new(k).hole_free(hole_free).mode(mode)).map_err(err)?;
            out.accepted.then_some((k, out))
        }
        None => min_k(&g, None, hole_free, mode).map_err(err)?,
    };
    let Some((k, out)) = found else {
        return Ok(None);
    };
    let json = match out.witness {
        Some(w) => Some(Certificate::from_witness(&w, n, k, hole_free).map_err(err)?.to_json()),
        None => None,
    };
    Ok(Some((k, json)))
}

/// Whether a certificate is a witness of the graph, with degrees at most
/// `k` and, if asked, hole-free.
#[pyfunction]
#[pyo3(signature = (n, edges, certificate, k=None, hole_free=false))]
fn verify(n: usize, edges: Vec<(usize, usize)>, certificate: &str, k: Option<usize>, hole_free: bool) -> PyResult<bool> {
    let g = graph(n, edges)?;
    let c = Certificate::from_json(certificate).map_err(err)?;
    if c.n != n {
        return Ok(false);
    }
    let w = c.to_witness().map_err(err)?;
    let r = verify_witness(&g, &w);
    Ok(r.is_witness && k.is_none_or(|k| r.max_intersection_degree <= k) && (!hole_free || check_hole_free(&w)))
}

/// Brute-force decision, for graphs with at most six vertices.
#[pyfunction]
#[pyo3(signature = (n, edges, k, hole_free=false))]
fn oracle(n: usize, edges: Vec<(usize, usize)>, k: usize, hole_free: bool) -> PyResult<bool> {
    let g = graph(n, edges)?;
    let o = Oracle::default();
    let (yes, _) = if hole_free { o.is_hole_free_k_map(&g, k) } else { o.is_k_map(&g, k) }.map_err(err)?;
    Ok(yes)
}

#[pyfunction]
fn render(certificate: &str) -> PyResult<String> {
    let w = Certificate::from_json(certificate).and_then(|c| c.to_witness()).map_err(err)?;
    render_svg(&w).map_err(err)
}

#[pymodule]
fn mapwit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(recognize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    Ok(())
}
