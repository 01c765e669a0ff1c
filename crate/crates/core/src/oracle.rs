//! Brute-force recognition for small graphs, used as ground truth.
//!
//! Every intersection vertex of a witness sees a clique of `G`, so a witness
//! is a family of cliques covering all edges whose vertex-clique incidence
//! graph is planar. The searches below walk such families directly.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{EmbeddedGraph, VertexKind};
use crate::error::{Error, Result};
use crate::graph::{enumerate_cliques, Graph};
use crate::planarity::is_planar;
use crate::sketch::{active_boundaries_ok, compute_sketch, is_anchor};
use crate::witness::{compactify, compactness, Compactness, Witness};

pub const DEFAULT_LIMIT: usize = 6;

/// Brute-force searches up to a vertex limit.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub limit: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { limit: DEFAULT_LIMIT }
    }
}

pub fn brute_force_is_k_map(g: &Graph, k: usize) -> Result<(bool, Option<Witness>)> {
    Oracle::default().is_k_map(g, k)
}

pub fn brute_force_is_hole_free_k_map(g: &Graph, k: usize) -> Result<(bool, Option<Witness>)> {
    Oracle::default().is_hole_free_k_map(g, k)
}

/// Canonical sketch keys of all compact witnesses of `g` with intersection
/// degree at most `k`, taken with respect to `bag`. With `hole_free` only
/// those whose retired faces are quadrangles are kept.
pub fn enumerate_compact_witnesses(g: &Graph, bag: &BTreeSet<usize>, k: usize, hole_free: bool) -> Result<BTreeSet<Vec<i64>>> {
    Oracle::default().compact_witness_keys(g, bag, k, hole_free)
}

fn incidence_edges(n: usize, family: &[&[usize]]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (j, c) in family.iter().enumerate() {
        edges.extend(c.iter().map(|&v| (v, n + j)));
    }
    edges
}

fn planar_family(n: usize, family: &[&[usize]]) -> bool {
    let total = n + family.len();
    let edges = incidence_edges(n, family);
    // bipartite Euler bound first
    (total < 3 || edges.len() + 4 <= 2 * total) && is_planar(total, &edges)
}

fn cliques_up_to(g: &Graph, k: usize) -> Vec<Vec<usize>> {
    if k < 2 {
        return Vec::new();
    }
    enumerate_cliques(g, 2, k)
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Pair index into an `n x n` coverage table.
fn pairs_of(c: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    c.iter().enumerate().flat_map(move |(i, &a)| c[i + 1..].iter().map(move |&b| (a, b)))
}

impl Oracle {
    pub fn new(limit: usize) -> Self {
        Oracle { limit }
    }

    fn check(&self, g: &Graph, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidK(k));
        }
        if g.n() > self.limit {
            return Err(Error::OracleLimit { n: g.n(), limit: self.limit });
        }
        Ok(())
    }

    /// Decides whether `g` is a k-map graph. Only inclusion-maximal members
    /// of a clique family matter, so the search covers each uncovered edge by
    /// a clique incomparable with those already taken.
    pub fn is_k_map(&self, g: &Graph, k: usize) -> Result<(bool, Option<Witness>)> {
        self.check(g, k)?;
        let mut cliques = cliques_up_to(g, k);
        // large cliques first: they settle most edges
        cliques.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let mut chosen = Vec::new();
        let mut banned = vec![false; cliques.len()];
        if !cover(g.n(), &cliques, &edges, &mut chosen, &mut banned) {
            return Ok((false, None));
        }
        let family: Vec<Vec<usize>> = chosen.iter().map(|&i| cliques[i].clone()).collect();
        let reals: Vec<usize> = (0..g.n()).collect();
        let map = EmbeddedGraph::embed_witness(&reals, &family).expect("family was tested planar");
        Ok((true, Some(compactify(&Witness::new(map)))))
    }

    /// Decides whether `g` has a hole-free witness: a connected biconnected
    /// planar incidence graph with `2N - 4` edges on `N` vertices, which
    /// forces every face to be a quadrangle.
    pub fn is_hole_free_k_map(&self, g: &Graph, k: usize) -> Result<(bool, Option<Witness>)> {
        self.check(g, k)?;
        let n = g.n();
        if n <= 2 {
            // one vertex: no; two adjacent vertices: two parallel intersections
            if n == 2 && g.has_edge(0, 1) && k >= 2 {
                let map = EmbeddedGraph::embed_witness(&[0, 1], &[vec![0, 1], vec![0, 1]]).expect("4-cycle");
                return Ok((true, Some(Witness::new(map))));
            }
            return Ok((false, None));
        }
        let cliques = cliques_up_to(g, k);
        let mut search = HoleFree::new(g, &cliques);
        let mut chosen = Vec::new();
        if !search.run(0, 2 * n - 4, &mut chosen) {
            return Ok((false, None));
        }
        let family: Vec<Vec<usize>> = chosen.iter().map(|&i| cliques[i].clone()).collect();
        let reals: Vec<usize> = (0..n).collect();
        let map = EmbeddedGraph::embed_witness(&reals, &family).expect("family was tested planar");
        Ok((true, Some(Witness::new(map))))
    }

    /// See [`enumerate_compact_witnesses`].
    pub fn compact_witness_keys(&self, g: &Graph, bag: &BTreeSet<usize>, k: usize, hole_free: bool) -> Result<BTreeSet<Vec<i64>>> {
        let all: BTreeSet<usize> = (0..g.n()).collect();
        self.compact_witness_keys_on(g, &all, bag, k, hole_free)
    }

    /// The same for the subgraph induced by `vertices`, keeping labels.
    pub fn compact_witness_keys_on(
        &self,
        g: &Graph,
        vertices: &BTreeSet<usize>,
        bag: &BTreeSet<usize>,
        k: usize,
        hole_free: bool,
    ) -> Result<BTreeSet<Vec<i64>>> {
        if k == 0 {
            return Err(Error::InvalidK(k));
        }
        let nv = vertices.len();
        if nv > self.limit {
            return Err(Error::OracleLimit { n: nv, limit: self.limit });
        }
        let inside = |c: &Vec<usize>| c.iter().all(|v| vertices.contains(v));
        let cliques: Vec<Vec<usize>> = cliques_up_to(g, k).into_iter().filter(inside).collect();
        let edges: Vec<(usize, usize)> = g.edges().filter(|&(a, b)| vertices.contains(&a) && vertices.contains(&b)).collect();
        let max_count = if nv >= 3 { 5 * nv - 10 } else { edges.len() };
        let caps = cliques.iter().map(|c| copy_cap(g, vertices, c)).collect();
        let search = Families {
            n: g.n(),
            caps,
            cliques: &cliques,
            edges: &edges,
            max_count,
        };
        let mut families = Vec::new();
        search.run(0, &mut Vec::new(), &mut families);
        let labels: Vec<usize> = vertices.iter().copied().collect();
        let mut keys = BTreeSet::new();
        for family in families {
            let sets: Vec<Vec<usize>> = family.iter().map(|&i| cliques[i].clone()).collect();
            for map in all_embeddings(&labels, &sets) {
                if compactness(&map) != Compactness::Compact {
                    continue;
                }
                if hole_free && !retired_faces_closed(&map, bag) {
                    continue;
                }
                let s = compute_sketch(&map, bag, hole_free);
                if hole_free && !active_boundaries_ok(&s.map) {
                    continue;
                }
                keys.insert(s.key());
            }
        }
        Ok(keys)
    }
}

/// Covers `edges` in order by pairwise incomparable cliques with a planar
/// incidence graph. Once the branch taking a clique fails, its siblings
/// never take that clique again.
fn cover(n: usize, cliques: &[Vec<usize>], edges: &[(usize, usize)], chosen: &mut Vec<usize>, banned: &mut [bool]) -> bool {
    let Some(&(a, b)) = edges.iter().find(|&&(a, b)| !chosen.iter().any(|&i| cliques[i].contains(&a) && cliques[i].contains(&b))) else {
        return true;
    };
    let mut tried = Vec::new();
    let mut found = false;
    for (i, c) in cliques.iter().enumerate() {
        if banned[i] || !(c.contains(&a) && c.contains(&b)) {
            continue;
        }
        if chosen.iter().any(|&j| is_subset(c, &cliques[j]) || is_subset(&cliques[j], c)) {
            continue;
        }
        chosen.push(i);
        let family: Vec<&[usize]> = chosen.iter().map(|&j| cliques[j].as_slice()).collect();
        if planar_family(n, &family) && cover(n, cliques, edges, chosen, banned) {
            found = true;
            break;
        }
        chosen.pop();
        banned[i] = true;
        tried.push(i);
    }
    for i in tried {
        banned[i] = false;
    }
    found
}

struct HoleFree<'g> {
    g: &'g Graph,
    cliques: &'g [Vec<usize>],
    /// per edge, the largest clique index containing it
    last_cover: BTreeMap<(usize, usize), usize>,
}

impl<'g> HoleFree<'g> {
    fn new(g: &'g Graph, cliques: &'g [Vec<usize>]) -> Self {
        let mut last_cover = BTreeMap::new();
        for (i, c) in cliques.iter().enumerate() {
            for p in pairs_of(c) {
                last_cover.insert(p, i);
            }
        }
        HoleFree { g, cliques, last_cover }
    }

    /// Multisets in nondecreasing index order from `from` on; `budget` is
    /// what is left of the sum of `|C| - 2`.
    fn run(&mut self, from: usize, budget: usize, chosen: &mut Vec<usize>) -> bool {
        let n = self.g.n();
        let covered = |a: usize, b: usize, chosen: &[usize]| chosen.iter().any(|&i| self.cliques[i].contains(&a) && self.cliques[i].contains(&b));
        if self.g.edges().any(|(a, b)| !covered(a, b, chosen) && self.last_cover[&(a, b)] < from) {
            return false;
        }
        if budget == 0 && self.accept(chosen) {
            return true;
        }
        if chosen.len() == 2 * n - 4 {
            return false;
        }
        for i in from..self.cliques.len() {
            let c = &self.cliques[i];
            if c.len() - 2 > budget {
                continue;
            }
            let copies = chosen.iter().filter(|&&j| j == i).count();
            if copies >= 2 && c.len() >= 3 {
                continue;
            }
            chosen.push(i);
            let family: Vec<&[usize]> = chosen.iter().map(|&j| self.cliques[j].as_slice()).collect();
            if planar_family(n, &family) && self.run(i, budget - (c.len() - 2), chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    fn accept(&self, chosen: &[usize]) -> bool {
        let n = self.g.n();
        let family: Vec<&[usize]> = chosen.iter().map(|&j| self.cliques[j].as_slice()).collect();
        let edges = incidence_edges(n, &family);
        let total = n + family.len();
        if edges.len() != 2 * total - 4 {
            return false;
        }
        let mut h = Graph::new(total);
        for &(a, b) in &edges {
            h.add_edge(a, b);
        }
        self.g.edges().all(|(a, b)| chosen.iter().any(|&i| self.cliques[i].contains(&a) && self.cliques[i].contains(&b)))
            && h.is_connected()
            && h.is_biconnected()
    }
}

struct Families<'c> {
    /// label bound for the incidence graph
    n: usize,
    /// copies allowed per clique
    caps: Vec<usize>,
    cliques: &'c [Vec<usize>],
    edges: &'c [(usize, usize)],
    max_count: usize,
}

impl Families<'_> {
    /// Clique multisets covering every edge, without inessential members and
    /// with planar incidence graphs.
    fn run(&self, from: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let cliques = self.cliques;
        if self.edges.iter().all(|&(a, b)| chosen.iter().any(|&i| cliques[i].contains(&a) && cliques[i].contains(&b))) {
            out.push(chosen.clone());
        }
        if chosen.len() == self.max_count {
            return;
        }
        for i in from..cliques.len() {
            let c = &cliques[i];
            if chosen.iter().filter(|&&j| j == i).count() >= self.caps[i] {
                continue;
            }
            let inessential = chosen.iter().any(|&j| {
                let d = &cliques[j];
                (d.len() == 2 && d.len() < c.len() && is_subset(d, c)) || (c.len() == 2 && c.len() < d.len() && is_subset(c, d))
            });
            if inessential {
                continue;
            }
            chosen.push(i);
            let family: Vec<&[usize]> = chosen.iter().map(|&j| cliques[j].as_slice()).collect();
            if planar_family(self.n, &family) {
                self.run(i, chosen, out);
            }
            chosen.pop();
        }
    }
}

/// Copies of a clique in a compact witness. A third copy of a clique with
/// three or more members gives `K_{3,3}`. Consecutive copies of an edge
/// clique `{a, b}` bound a region holding whole components of `G - {a, b}`,
/// and an empty region would make the two copies twins.
fn copy_cap(g: &Graph, vertices: &BTreeSet<usize>, c: &[usize]) -> usize {
    if c.len() >= 3 {
        return 2;
    }
    let rest: Vec<usize> = vertices.iter().copied().filter(|v| !c.contains(v)).collect();
    let h = g.induced(&rest);
    let mut seen = vec![false; h.n()];
    let mut components = 0;
    for s in 0..h.n() {
        if seen[s] {
            continue;
        }
        components += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for w in h.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components.max(1)
}

/// Every embedding in the sphere, up to mirror image, of the witness with
/// the given reals and intersection neighbourhoods. Edges are added
/// one at a time in every admissible way; intersections carry temporary
/// labels so that partial maps are only identified when their future edges
/// agree.
pub(crate) fn all_embeddings(labels: &[usize], family: &[Vec<usize>]) -> Vec<EmbeddedGraph> {
    let mut base = EmbeddedGraph::new();
    let f = base.new_face(false);
    let slot: BTreeMap<usize, usize> = labels.iter().map(|&l| (l, base.add_vertex(VertexKind::Real(l), f))).collect();
    let top = labels.iter().max().map_or(0, |m| m + 1);
    let temp = |j: usize| VertexKind::Real(top + j);
    let xs: Vec<usize> = (0..family.len()).map(|j| base.add_vertex(temp(j), f)).collect();
    let mut layer: BTreeMap<Vec<i64>, EmbeddedGraph> = BTreeMap::new();
    layer.insert(base.canonical_key(false), base);
    for (j, nb) in family.iter().enumerate() {
        for &a in nb {
            let (u, x) = (slot[&a], xs[j]);
            let mut next = BTreeMap::new();
            for m in layer.values() {
                for (cu, fu) in m.corners(u) {
                    for (cx, fx) in m.corners(x) {
                        if fu != fx {
                            continue;
                        }
                        for h in m.connect_corners(cu, cx) {
                            next.entry(h.canonical_key(false)).or_insert(h);
                        }
                    }
                }
            }
            layer = next;
        }
    }
    layer
        .into_values()
        .map(|mut m| {
            for &x in &xs {
                m.set_kind(x, VertexKind::Intersection);
            }
            m
        })
        .collect()
}

/// Faces with fewer than two anchors must be closed quadrangles.
fn retired_faces_closed(map: &EmbeddedGraph, bag: &BTreeSet<usize>) -> bool {
    if map.vertex_count() == 1 && map.edge_count() == 0 {
        return true;
    }
    map.faces().iter().all(|f| {
        let anchors = f.vertices(map).into_iter().filter(|&v| is_anchor(map, v, bag)).count();
        anchors >= 2 || (f.walks.len() == 1 && f.isolated.is_empty() && f.walks[0].len() == 4)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{check_hole_free, verify_witness};

    fn bag(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn triangle_is_two_map() {
        let (yes, w) = brute_force_is_k_map(&Graph::complete(3), 2).unwrap();
        assert!(yes);
        let w = w.unwrap();
        assert!(verify_witness(&Graph::complete(3), &w).is_witness);
        assert_eq!(w.intersection_count(), 3);
    }

    #[test]
    fn clique_bound() {
        assert!(!brute_force_is_k_map(&Graph::complete(6), 3).unwrap().0);
        assert!(brute_force_is_k_map(&Graph::complete(6), 4).unwrap().0);
        assert!(!brute_force_is_k_map(&Graph::complete(5), 3).unwrap().0);
    }

    #[test]
    fn planar_graphs_are_three_maps() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5), (3, 4), (4, 5), (5, 3)]);
        assert!(brute_force_is_k_map(&g, 3).unwrap().0);
        let k33 = Graph::from_edges(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)]);
        assert!(!brute_force_is_k_map(&k33, 3).unwrap().0);
    }

    #[test]
    fn hole_free_examples() {
        let (yes, w) = brute_force_is_hole_free_k_map(&Graph::complete(4), 3).unwrap();
        assert!(yes);
        let w = w.unwrap();
        assert!(check_hole_free(&w));
        assert_eq!(w.intersection_count(), 4);
        assert!(!brute_force_is_hole_free_k_map(&Graph::path(3), 3).unwrap().0);
        assert!(!brute_force_is_hole_free_k_map(&Graph::new(1), 3).unwrap().0);
        assert!(brute_force_is_hole_free_k_map(&Graph::complete(2), 2).unwrap().0);
    }

    #[test]
    fn limit_is_enforced() {
        assert!(matches!(brute_force_is_k_map(&Graph::path(7), 3), Err(Error::OracleLimit { .. })));
        assert!(Oracle::new(7).is_k_map(&Graph::path(7), 3).unwrap().0);
    }

    #[test]
    fn compact_witnesses_of_small_graphs() {
        let one = enumerate_compact_witnesses(&Graph::new(1), &bag(&[0]), 3, false).unwrap();
        assert_eq!(one.len(), 1);
        let k2 = enumerate_compact_witnesses(&Graph::complete(2), &bag(&[0, 1]), 3, false).unwrap();
        assert_eq!(k2.len(), 1);
        // the star, its double, and the 6-cycle
        let k3 = all_keys(&Graph::complete(3), 3);
        assert!(k3 >= 3);
    }

    fn all_keys(g: &Graph, k: usize) -> usize {
        let b: BTreeSet<usize> = (0..g.n()).collect();
        enumerate_compact_witnesses(g, &b, k, false).unwrap().len()
    }

    #[test]
    fn embeddings_of_a_subdivided_star() {
        // rotations at the centre: 3!/2 up to mirror
        let maps = all_embeddings(&[0, 1, 2, 3, 4], &[vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4]]);
        assert_eq!(maps.len(), 3);
    }
}
