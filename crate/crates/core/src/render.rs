//! SVG drawings of embedded witnesses.
//!
//! Each component is drawn on its own. Edges are subdivided at their
//! midpoints and every face walk gets a ring of helper nodes around a
//! centre, which turns the component into a simple triangulation. A Tutte
//! layout of that triangulation with a triangle of the widest face as outer
//! boundary is planar, so the witness drawn with two-segment edges is too.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::embed::EmbeddedGraph;
use crate::error::{Error, Result};
use crate::witness::Witness;

pub type Point = (f64, f64);

#[derive(Clone, Debug)]
pub struct Drawing {
    /// Position of every live witness vertex.
    pub points: BTreeMap<usize, Point>,
    /// One polyline per witness edge, from tail to head.
    pub edges: Vec<(usize, usize, Vec<Point>)>,
    pub width: f64,
    pub height: f64,
}

const BOX: f64 = 400.0;
const MARGIN: f64 = 30.0;

/// Lays out `w`; fails if the embedding is inconsistent.
pub fn layout(w: &Witness) -> Result<Drawing> {
    let g = &w.map;
    g.check_consistency()?;
    let comp = g.component_ids();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in g.vertices() {
        members.entry(comp[v]).or_default().push(v);
    }
    let mut d = Drawing {
        points: BTreeMap::new(),
        edges: Vec::new(),
        width: 0.0,
        height: BOX + 2.0 * MARGIN,
    };
    for (i, (c, vs)) in members.iter().enumerate() {
        let x0 = MARGIN + i as f64 * (BOX + MARGIN);
        if vs.len() == 1 {
            d.points.insert(vs[0], (x0 + BOX / 2.0, MARGIN + BOX / 2.0));
            continue;
        }
        component(g, *c, &comp, (x0, MARGIN), &mut d);
    }
    d.width = MARGIN + members.len() as f64 * (BOX + MARGIN);
    Ok(d)
}

fn component(g: &EmbeddedGraph, c: usize, comp: &[usize], origin: Point, out: &mut Drawing) {
    // helper graph: witness vertices, edge midpoints, rings and centres
    let mut node: BTreeMap<usize, usize> = BTreeMap::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let fresh = |adj: &mut Vec<Vec<usize>>| {
        adj.push(Vec::new());
        adj.len() - 1
    };
    let link = |adj: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        adj[a].push(b);
        adj[b].push(a);
    };
    for v in g.vertices().filter(|&v| comp[v] == c) {
        node.insert(v, fresh(&mut adj));
    }
    let mut mid: BTreeMap<usize, usize> = BTreeMap::new();
    for e in g.edges().filter(|&e| comp[g.tail(2 * e)] == c) {
        let m = fresh(&mut adj);
        mid.insert(e, m);
        link(&mut adj, node[&g.tail(2 * e)], m);
        link(&mut adj, m, node[&g.head(2 * e)]);
    }
    let mut walks: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; g.tail.len()];
    for d in g.darts().collect::<Vec<_>>() {
        if comp[g.tail(d)] != c || seen[d] {
            continue;
        }
        let w = g.walk(d);
        for &x in &w {
            seen[x] = true;
        }
        walks.push(w);
    }
    let widest = (0..walks.len())
        .max_by_key(|&i| {
            let mut vs: Vec<usize> = walks[i].iter().map(|&d| g.tail(d)).collect();
            vs.sort_unstable();
            vs.dedup();
            (vs.len(), std::cmp::Reverse(i))
        })
        .expect("component has an edge");
    let mut outer = [0; 3];
    for (i, w) in walks.iter().enumerate() {
        // boundary of the subdivided walk: vertex, midpoint, vertex, ...
        let mut ring_of: Vec<usize> = Vec::with_capacity(2 * w.len());
        for &d in w {
            ring_of.push(node[&g.tail(d)]);
            ring_of.push(mid[&(d / 2)]);
        }
        let z = fresh(&mut adj);
        let p: Vec<usize> = ring_of.iter().map(|_| fresh(&mut adj)).collect();
        let l = p.len();
        for j in 0..l {
            let nj = (j + 1) % l;
            link(&mut adj, z, p[j]);
            link(&mut adj, p[j], p[nj]);
            link(&mut adj, p[j], ring_of[j]);
            link(&mut adj, p[j], ring_of[nj]);
        }
        if i == widest {
            outer = [z, p[0], p[1]];
        }
    }
    let pos = tutte(&adj, outer);
    let place = |q: Point| (origin.0 + q.0 * BOX, origin.1 + q.1 * BOX);
    for (&v, &n) in &node {
        out.points.insert(v, place(pos[n]));
    }
    for (&e, &m) in &mid {
        let (a, b) = (g.tail(2 * e), g.head(2 * e));
        out.edges.push((a, b, vec![place(pos[node[&a]]), place(pos[m]), place(pos[node[&b]])]));
    }
}

/// Barycentric layout with `outer` pinned to a triangle in the unit square.
fn tutte(adj: &[Vec<usize>], outer: [usize; 3]) -> Vec<Point> {
    let n = adj.len();
    let corners = [(0.5, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let mut pinned: Vec<Option<Point>> = vec![None; n];
    for (k, &o) in outer.iter().enumerate() {
        pinned[o] = Some(corners[k]);
    }
    let free: Vec<usize> = (0..n).filter(|&v| pinned[v].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        index[v] = i;
    }
    let mut pos: Vec<Point> = pinned.iter().map(|p| p.unwrap_or((0.5, 0.5))).collect();
    for axis in 0..2 {
        let coord = |p: Point| if axis == 0 { p.0 } else { p.1 };
        // deg(v) x_v - sum of free neighbours = sum of pinned neighbours
        let rhs: Vec<f64> = free
            .iter()
            .map(|&v| adj[v].iter().filter_map(|&u| pinned[u]).map(coord).sum())
            .collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            free.iter()
                .map(|&v| {
                    let mut s = adj[v].len() as f64 * x[index[v]];
                    for &u in &adj[v] {
                        if index[u] != usize::MAX {
                            s -= x[index[u]];
                        }
                    }
                    s
                })
                .collect()
        };
        let x = conjugate_gradient(apply, &rhs);
        for (i, &v) in free.iter().enumerate() {
            if axis == 0 {
                pos[v].0 = x[i];
            } else {
                pos[v].1 = x[i];
            }
        }
    }
    pos
}

fn conjugate_gradient(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64]) -> Vec<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..10 * b.len() + 10 {
        if rr < 1e-24 {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        for i in 0..p.len() {
            p[i] = r[i] + next / rr * p[i];
        }
        rr = next;
    }
    x
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn same(a: Point, b: Point) -> bool {
    (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
}

/// Whether two segments meet anywhere other than a shared endpoint.
pub fn segments_cross(a: (Point, Point), b: (Point, Point)) -> bool {
    let shared = [a.0, a.1].iter().any(|&p| same(p, b.0) || same(p, b.1));
    let eps = 1e-12;
    let d1 = orient(b.0, b.1, a.0);
    let d2 = orient(b.0, b.1, a.1);
    let d3 = orient(a.0, a.1, b.0);
    let d4 = orient(a.0, a.1, b.1);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)) {
        return true;
    }
    // collinear overlap
    if [d1, d2, d3, d4].iter().all(|d| d.abs() <= eps) {
        let key = |p: Point| if (a.0 .0 - a.1 .0).abs() > (a.0 .1 - a.1 .1).abs() { p.0 } else { p.1 };
        let (lo1, hi1) = min_max(key(a.0), key(a.1));
        let (lo2, hi2) = min_max(key(b.0), key(b.1));
        let overlap = hi1.min(hi2) - lo1.max(lo2);
        return if shared { overlap > 1e-9 } else { overlap >= -1e-9 };
    }
    false
}

fn min_max(a: f64, b: f64) -> (f64, f64) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Whether no two edge segments of the drawing cross.
pub fn is_crossing_free(d: &Drawing) -> bool {
    let segs: Vec<(Point, Point)> = d.edges.iter().flat_map(|(_, _, p)| p.windows(2).map(|s| (s[0], s[1]))).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if segments_cross(segs[i], segs[j]) {
                return false;
            }
        }
    }
    true
}

pub fn to_svg(w: &Witness, d: &Drawing) -> String {
    let g = &w.map;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        d.width, d.height, d.width, d.height
    );
    for (_, _, p) in &d.edges {
        let pts: Vec<String> = p.iter().map(|q| format!("{:.2},{:.2}", q.0, q.1)).collect();
        let _ = writeln!(s, r#"  <polyline points="{}" fill="none" stroke="black"/>"#, pts.join(" "));
    }
    for (&v, &(x, y)) in &d.points {
        match g.label(v) {
            Some(l) => {
                let _ = writeln!(s, r#"  <circle cx="{x:.2}" cy="{y:.2}" r="6" fill="white" stroke="black"/>"#);
                let _ = writeln!(s, r#"  <text x="{:.2}" y="{:.2}" font-size="10">{l}</text>"#, x + 7.0, y - 7.0);
            }
            None => {
                let _ = writeln!(s, r#"  <rect x="{:.2}" y="{:.2}" width="8" height="8" fill="gray"/>"#, x - 4.0, y - 4.0);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Lays out and draws `w`, refusing drawings with crossings.
pub fn render_svg(w: &Witness) -> Result<String> {
    let d = layout(w)?;
    if !is_crossing_free(&d) {
        return Err(Error::Embedding("layout produced crossing edges".into()));
    }
    Ok(to_svg(w, &d))
}
