//! Embedded witnesses and their verification, compaction and restriction.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{EmbeddedGraph, VertexKind};
use crate::graph::{half_square, BipartiteWitnessGraph, Graph};

/// A planar bipartite witness with a fixed embedding. Reals carry the vertex
/// ids of the witnessed graph.
#[derive(Clone, Debug)]
pub struct Witness {
    pub map: EmbeddedGraph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Compactness {
    Compact,
    Inessential(usize),
    TwinPair(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub is_witness: bool,
    pub is_compact: bool,
    pub max_intersection_degree: usize,
    pub is_biconnected_quadrangulation: bool,
    pub first_failure: Option<String>,
}

impl Witness {
    pub fn new(map: EmbeddedGraph) -> Self {
        Witness { map }
    }

    /// Embeds an abstract witness graph; `None` if it is not planar.
    pub fn embed(w: &BipartiteWitnessGraph) -> Option<Witness> {
        let reals: Vec<usize> = (0..w.real_count).collect();
        EmbeddedGraph::embed_witness(&reals, &w.intersections).map(Witness::new)
    }

    pub fn real_labels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.map.vertices().filter_map(|v| self.map.label(v)).collect();
        out.sort_unstable();
        out
    }

    pub fn intersections(&self) -> Vec<usize> {
        self.map.vertices().filter(|&v| self.map.is_intersection(v)).collect()
    }

    pub fn intersection_count(&self) -> usize {
        self.intersections().len()
    }

    /// Neighbourhood (as real labels) of every intersection vertex.
    pub fn neighborhoods(&self) -> Vec<BTreeSet<usize>> {
        self.intersections().into_iter().map(|u| self.map.real_neighbors(u)).collect()
    }

    pub fn max_intersection_degree(&self) -> usize {
        self.intersections().into_iter().map(|u| self.map.degree(u)).max().unwrap_or(0)
    }

    /// Abstract graph with reals `0..n` (labels must be exactly `0..n`).
    pub fn to_bipartite(&self, n: usize) -> BipartiteWitnessGraph {
        BipartiteWitnessGraph {
            real_count: n,
            intersections: self.neighborhoods().into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.map.edge_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.map.vertex_count()
    }

    /// Removes a vertex, merging the faces around it.
    pub fn remove_vertex(&mut self, v: usize) {
        remove_vertex_merging(&mut self.map, v);
    }

    pub fn key(&self) -> Vec<i64> {
        self.map.canonical_key(false)
    }
}

/// Deletes `v` and unites all faces incident to it; the united face is
/// active if any part was.
pub fn remove_vertex_merging(g: &mut EmbeddedGraph, v: usize) {
    let mut faces: BTreeSet<usize> = BTreeSet::new();
    if g.is_isolated(v) {
        faces.insert(g.iso_face(v));
    }
    for d in g.darts_at(v) {
        faces.insert(g.face_of(d));
        faces.insert(g.face_of(d ^ 1));
    }
    let active = faces.iter().any(|&f| g.is_active(f));
    g.remove_vertex(v);
    if let Some(&first) = faces.iter().next() {
        for &f in faces.iter().skip(1) {
            g.relabel_face(f, first);
        }
        g.set_active(first, active);
    }
}

pub(crate) fn first_inessential(g: &EmbeddedGraph) -> Option<usize> {
    let inter: Vec<usize> = g.vertices().filter(|&v| g.is_intersection(v)).collect();
    let nbs: BTreeMap<usize, BTreeSet<usize>> = inter.iter().map(|&u| (u, g.real_neighbors(u))).collect();
    for &u in &inter {
        if g.degree(u) != 2 {
            continue;
        }
        let nu = &nbs[&u];
        if inter.iter().any(|&w| w != u && nbs[&w].len() > nu.len() && nu.is_subset(&nbs[&w])) {
            return Some(u);
        }
    }
    None
}

fn first_twin_pair(g: &EmbeddedGraph) -> Option<(usize, usize)> {
    twin_pair_where(g, false)
}

/// First twin-pair bounding a face, optionally looking at active faces only.
pub(crate) fn twin_pair_where(g: &EmbeddedGraph, active_only: bool) -> Option<(usize, usize)> {
    for f in g.faces() {
        if active_only && !f.active {
            continue;
        }
        if f.walks.len() != 1 || !f.isolated.is_empty() || f.walks[0].len() != 4 {
            continue;
        }
        let w = &f.walks[0];
        let vs: Vec<usize> = w.iter().map(|&d| g.tail(d)).collect();
        for off in 0..2 {
            let (u1, u2) = (vs[off], vs[off + 2]);
            let (a, b) = (vs[1 - off], vs[3 - off]);
            if u1 != u2
                && a != b
                && g.is_intersection(u1)
                && g.is_intersection(u2)
                && g.degree(u1) == 2
                && g.degree(u2) == 2
                && g.real_neighbors(u1) == g.real_neighbors(u2)
            {
                return Some((u1.min(u2), u1.max(u2)));
            }
        }
    }
    None
}

/// Compactness test on an embedded witness map.
pub fn compactness(g: &EmbeddedGraph) -> Compactness {
    if let Some(u) = first_inessential(g) {
        return Compactness::Inessential(u);
    }
    if let Some((a, b)) = first_twin_pair(g) {
        return Compactness::TwinPair(a, b);
    }
    Compactness::Compact
}

pub fn is_compact(w: &Witness) -> Compactness {
    compactness(&w.map)
}

/// Removes intersection vertices of degree at most one, inessential vertices
/// and one member (the larger id) of every twin-pair, until none is left.
pub fn compactify_map(g: &mut EmbeddedGraph) {
    loop {
        let low = g.vertices().find(|&v| g.is_intersection(v) && g.degree(v) <= 1);
        if let Some(u) = low {
            remove_vertex_merging(g, u);
            continue;
        }
        match compactness(g) {
            Compactness::Compact => break,
            Compactness::Inessential(u) => remove_vertex_merging(g, u),
            Compactness::TwinPair(_, b) => remove_vertex_merging(g, b),
        }
    }
}

pub fn compactify(w: &Witness) -> Witness {
    let mut m = w.map.clone();
    compactify_map(&mut m);
    Witness::new(m.compacted())
}

/// Connected, biconnected, and every face a four-dart walk.
pub fn check_hole_free(w: &Witness) -> bool {
    let g = &w.map;
    if g.vertex_count() == 3 && g.edge_count() == 2 {
        // a single intersection joining two reals: its only face has four darts
        return g.is_quadrangulation();
    }
    g.is_biconnected() && g.is_quadrangulation()
}

/// The witness restricted to `keep`: other reals removed, intersections of
/// degree at most one dropped, then compacted.
pub fn restrict(w: &Witness, keep: &BTreeSet<usize>) -> Witness {
    let mut m = w.map.clone();
    for v in m.vertices().collect::<Vec<_>>() {
        if let Some(l) = m.label(v) {
            if !keep.contains(&l) {
                remove_vertex_merging(&mut m, v);
            }
        }
    }
    compactify_map(&mut m);
    Witness::new(m.compacted())
}

/// Checks that `w` is a planar bipartite witness of `g`, and reports
/// compactness, maximum intersection degree and the hole-free shape.
pub fn verify_witness(g: &Graph, w: &Witness) -> VerificationReport {
    let m = &w.map;
    let mut failures: Vec<String> = Vec::new();
    let mut seen_labels = BTreeSet::new();
    for v in m.vertices() {
        if let VertexKind::Real(l) = m.kind(v) {
            if l >= g.n() {
                failures.push(format!("real vertex {} is not a vertex of the graph", l + 1));
            } else if !seen_labels.insert(l) {
                failures.push(format!("real vertex {} occurs twice", l + 1));
            }
        }
    }
    if seen_labels.len() != g.n() {
        failures.push(format!("witness has {} of the {} graph vertices", seen_labels.len(), g.n()));
    }
    let mut pairs = BTreeSet::new();
    for e in m.edges() {
        let (a, b) = (m.tail(2 * e), m.tail(2 * e + 1));
        if m.is_intersection(a) == m.is_intersection(b) {
            failures.push("edge between two vertices of the same kind".into());
        }
        if !pairs.insert((a.min(b), a.max(b))) {
            failures.push("parallel edges".into());
        }
    }
    if let Err(e) = m.check_consistency() {
        failures.push(format!("embedding: {e}"));
    }
    if failures.is_empty() {
        let mut hs = Graph::new(g.n());
        for u in w.intersections() {
            let nb: Vec<usize> = m.real_neighbors(u).into_iter().collect();
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    hs.add_edge(nb[i], nb[j]);
                }
            }
        }
        if let Some((a, b)) = g.edges().find(|&(a, b)| !hs.has_edge(a, b)) {
            failures.push(format!("half-square misses edge ({}, {})", a + 1, b + 1));
        } else if let Some((a, b)) = hs.edges().find(|&(a, b)| !g.has_edge(a, b)) {
            failures.push(format!("half-square has extra edge ({}, {})", a + 1, b + 1));
        }
    }
    let failure = failures.into_iter().next();
    let is_witness = failure.is_none();
    VerificationReport {
        is_witness,
        is_compact: is_witness && is_compact(w) == Compactness::Compact,
        max_intersection_degree: w.max_intersection_degree(),
        is_biconnected_quadrangulation: is_witness && check_hole_free(w),
        first_failure: failure,
    }
}

/// Half-square of an embedded witness, for graphs on `0..n`.
pub fn witness_half_square(w: &Witness, n: usize) -> Graph {
    half_square(&w.to_bipartite(n))
}
