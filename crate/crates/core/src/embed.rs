//! Combinatorial embeddings in dart form.
//!
//! Edge `e` owns darts `2e` and `2e + 1`. Every dart stores its tail, its
//! rotation neighbours and the id of the face it bounds (the face traversed
//! by `d` followed by `rot_next(twin(d))`). Face ids double as the position
//! system: all walks and isolated vertices carrying the same id lie in the
//! same face. Faces carry an `active` mark and darts a saturating counter,
//! which is all a sketch adds on top of a plain embedded witness.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::planarity::planar_rotation;

/// Counter value standing for "more than four".
pub const SATURATED: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Real(usize),
    Intersection,
}

#[derive(Clone, Debug, Default)]
pub struct EmbeddedGraph {
    pub(crate) kind: Vec<VertexKind>,
    pub(crate) v_alive: Vec<bool>,
    pub(crate) vdart: Vec<Option<usize>>,
    pub(crate) iso_face: Vec<usize>,
    pub(crate) tail: Vec<usize>,
    pub(crate) rnext: Vec<usize>,
    pub(crate) rprev: Vec<usize>,
    pub(crate) e_alive: Vec<bool>,
    pub(crate) face: Vec<usize>,
    pub(crate) counter: Vec<u8>,
    pub(crate) active: Vec<bool>,
}

/// One face: its boundary walks (dart sequences) and the isolated vertices inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: usize,
    pub active: bool,
    pub walks: Vec<Vec<usize>>,
    pub isolated: Vec<usize>,
}

impl Face {
    pub fn vertices(&self, g: &EmbeddedGraph) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.isolated.iter().copied().collect();
        for w in &self.walks {
            out.extend(w.iter().map(|&d| g.tail[d]));
        }
        out
    }

    pub fn dart_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }
}

/// Position for a new dart at vertex `v`: right after `after` in the rotation,
/// or the only dart of an isolated vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corner {
    pub v: usize,
    pub after: Option<usize>,
}

#[inline]
pub fn twin(d: usize) -> usize {
    d ^ 1
}

#[inline]
pub fn saturating(a: u8, b: u8) -> u8 {
    (a + b).min(SATURATED)
}

impl EmbeddedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_face(&mut self, active: bool) -> usize {
        self.active.push(active);
        self.active.len() - 1
    }

    pub fn add_vertex(&mut self, kind: VertexKind, face: usize) -> usize {
        self.kind.push(kind);
        self.v_alive.push(true);
        self.vdart.push(None);
        self.iso_face.push(face);
        self.kind.len() - 1
    }

    pub fn vertex_slots(&self) -> usize {
        self.kind.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kind.len()).filter(move |&v| self.v_alive[v])
    }

    pub fn vertex_count(&self) -> usize {
        self.v_alive.iter().filter(|&&a| a).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.e_alive.len()).filter(move |&e| self.e_alive[e])
    }

    pub fn edge_count(&self) -> usize {
        self.e_alive.iter().filter(|&&a| a).count()
    }

    pub fn darts(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges().flat_map(|e| [2 * e, 2 * e + 1])
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kind[v]
    }

    pub fn set_kind(&mut self, v: usize, kind: VertexKind) {
        self.kind[v] = kind;
    }

    pub fn label(&self, v: usize) -> Option<usize> {
        match self.kind[v] {
            VertexKind::Real(l) => Some(l),
            VertexKind::Intersection => None,
        }
    }

    pub fn is_intersection(&self, v: usize) -> bool {
        self.kind[v] == VertexKind::Intersection
    }

    pub fn find_real(&self, label: usize) -> Option<usize> {
        self.vertices().find(|&v| self.kind[v] == VertexKind::Real(label))
    }

    pub fn tail(&self, d: usize) -> usize {
        self.tail[d]
    }

    pub fn head(&self, d: usize) -> usize {
        self.tail[d ^ 1]
    }

    pub fn rot_next(&self, d: usize) -> usize {
        self.rnext[d]
    }

    pub fn rot_prev(&self, d: usize) -> usize {
        self.rprev[d]
    }

    /// Successor of `d` along its face boundary.
    pub fn face_next(&self, d: usize) -> usize {
        self.rnext[d ^ 1]
    }

    pub fn face_of(&self, d: usize) -> usize {
        self.face[d]
    }

    pub fn counter(&self, d: usize) -> u8 {
        self.counter[d]
    }

    pub fn set_counter(&mut self, d: usize, c: u8) {
        self.counter[d] = c;
    }

    pub fn is_active(&self, f: usize) -> bool {
        self.active[f]
    }

    pub fn set_active(&mut self, f: usize, a: bool) {
        self.active[f] = a;
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.vdart[v].is_none()
    }

    pub fn iso_face(&self, v: usize) -> usize {
        self.iso_face[v]
    }

    pub fn is_loop(&self, d: usize) -> bool {
        self.tail[d] == self.tail[d ^ 1]
    }

    /// Outgoing darts of `v` in rotation order.
    pub fn darts_at(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(start) = self.vdart[v] {
            let mut d = start;
            loop {
                out.push(d);
                d = self.rnext[d];
                if d == start {
                    break;
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.darts_at(v).len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.darts_at(v).into_iter().map(|d| self.head(d)).collect()
    }

    /// Real labels adjacent to `v` (sorted, without repetition).
    pub fn real_neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.neighbors(v).into_iter().filter_map(|w| self.label(w)).collect()
    }

    /// Corners of `v` with the face each lies in.
    pub fn corners(&self, v: usize) -> Vec<(Corner, usize)> {
        if self.is_isolated(v) {
            return vec![(Corner { v, after: None }, self.iso_face[v])];
        }
        self.darts_at(v)
            .into_iter()
            .map(|a| (Corner { v, after: Some(a) }, self.face[a ^ 1]))
            .collect()
    }

    pub fn corner_face(&self, c: Corner) -> usize {
        match c.after {
            Some(a) => self.face[a ^ 1],
            None => self.iso_face[c.v],
        }
    }

    /// Adds edge `u -> w` with the `u`-dart placed after `cu` and the
    /// `w`-dart after `cw`; returns the dart leaving `u`. Faces are set to
    /// `fu` / `fw` for the two darts; callers keep them consistent.
    pub fn insert_edge(&mut self, cu: Corner, cw: Corner, fu: usize, fw: usize) -> usize {
        let e = self.e_alive.len();
        self.e_alive.push(true);
        let (d, t) = (2 * e, 2 * e + 1);
        self.tail.extend([cu.v, cw.v]);
        self.rnext.extend([d, t]);
        self.rprev.extend([d, t]);
        self.face.extend([fu, fw]);
        self.counter.extend([1, 1]);
        self.splice(d, cu);
        self.splice(t, cw);
        d
    }

    fn splice(&mut self, d: usize, c: Corner) {
        let v = c.v;
        match c.after {
            None => {
                debug_assert!(self.vdart[v].is_none());
                self.rnext[d] = d;
                self.rprev[d] = d;
                self.vdart[v] = Some(d);
            }
            Some(a) => {
                let b = self.rnext[a];
                self.rnext[a] = d;
                self.rprev[d] = a;
                self.rnext[d] = b;
                self.rprev[b] = d;
            }
        }
    }

    fn unsplice(&mut self, d: usize) {
        let v = self.tail[d];
        let (p, n) = (self.rprev[d], self.rnext[d]);
        if n == d {
            self.iso_face[v] = self.face[d];
            self.vdart[v] = None;
        } else {
            self.rnext[p] = n;
            self.rprev[n] = p;
            if self.vdart[v] == Some(d) {
                self.vdart[v] = Some(n);
            }
        }
    }

    /// Removes an edge; isolated endpoints inherit the face of the removed dart.
    /// Face ids are left untouched, callers merge them if needed.
    pub fn remove_edge(&mut self, e: usize) {
        debug_assert!(self.e_alive[e]);
        self.unsplice(2 * e);
        self.unsplice(2 * e + 1);
        self.e_alive[e] = false;
    }

    pub fn remove_vertex(&mut self, v: usize) {
        for d in self.darts_at(v) {
            if self.e_alive[d / 2] {
                self.remove_edge(d / 2);
            }
        }
        self.v_alive[v] = false;
    }

    /// Replaces face id `from` by `to` everywhere.
    pub fn relabel_face(&mut self, from: usize, to: usize) {
        if from == to {
            return;
        }
        for d in 0..self.face.len() {
            if self.face[d] == from {
                self.face[d] = to;
            }
        }
        for v in 0..self.iso_face.len() {
            if self.iso_face[v] == from {
                self.iso_face[v] = to;
            }
        }
    }

    /// Dart orbit of the face walk through `d`.
    pub fn walk(&self, d: usize) -> Vec<usize> {
        let mut out = vec![d];
        let mut x = self.face_next(d);
        while x != d {
            out.push(x);
            x = self.face_next(x);
        }
        out
    }

    /// All nonempty faces ordered by id.
    pub fn faces(&self) -> Vec<Face> {
        let mut map: BTreeMap<usize, Face> = BTreeMap::new();
        let mut seen = vec![false; self.face.len()];
        for d in self.darts().collect::<Vec<_>>() {
            if seen[d] {
                continue;
            }
            let w = self.walk(d);
            for &x in &w {
                seen[x] = true;
            }
            let f = self.face[d];
            map.entry(f)
                .or_insert_with(|| Face {
                    id: f,
                    active: self.active[f],
                    walks: Vec::new(),
                    isolated: Vec::new(),
                })
                .walks
                .push(w);
        }
        for v in self.vertices() {
            if self.is_isolated(v) {
                let f = self.iso_face[v];
                map.entry(f)
                    .or_insert_with(|| Face {
                        id: f,
                        active: self.active[f],
                        walks: Vec::new(),
                        isolated: Vec::new(),
                    })
                    .isolated
                    .push(v);
            }
        }
        map.into_values().collect()
    }

    pub fn face(&self, f: usize) -> Option<Face> {
        self.faces().into_iter().find(|x| x.id == f)
    }

    /// Checks that every walk carries a single face id and that Euler's
    /// formula holds for each connected component.
    pub fn check_consistency(&self) -> Result<()> {
        let mut seen = vec![false; self.face.len()];
        let comp = self.component_ids();
        let mut walks_per_comp: HashMap<usize, usize> = HashMap::new();
        for d in self.darts().collect::<Vec<_>>() {
            if seen[d] {
                continue;
            }
            let w = self.walk(d);
            for &x in &w {
                seen[x] = true;
                if self.face[x] != self.face[d] {
                    return Err(Error::Embedding(format!("walk through dart {d} changes face")));
                }
            }
            *walks_per_comp.entry(comp[self.tail[d]]).or_default() += 1;
        }
        let mut vs: HashMap<usize, usize> = HashMap::new();
        let mut es: HashMap<usize, usize> = HashMap::new();
        for v in self.vertices() {
            *vs.entry(comp[v]).or_default() += 1;
        }
        for e in self.edges() {
            *es.entry(comp[self.tail[2 * e]]).or_default() += 1;
        }
        for (&c, &nv) in &vs {
            let ne = es.get(&c).copied().unwrap_or(0);
            let nf = walks_per_comp.get(&c).copied().unwrap_or(1);
            if nv + nf != ne + 2 {
                return Err(Error::Embedding(format!(
                    "component with {nv} vertices, {ne} edges and {nf} faces is not planar"
                )));
            }
        }
        Ok(())
    }

    /// Component index per vertex slot (dead slots get `usize::MAX`).
    pub fn component_ids(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.kind.len()];
        let mut next = 0;
        for s in self.vertices().collect::<Vec<_>>() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for w in self.neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Renumbers vertices, edges and faces densely, dropping dead slots and
    /// unused face ids.
    pub fn compacted(&self) -> EmbeddedGraph {
        let mut out = EmbeddedGraph::new();
        let mut vmap = vec![usize::MAX; self.kind.len()];
        let mut fmap: HashMap<usize, usize> = HashMap::new();
        let mut fid = |f: usize, out: &mut EmbeddedGraph| -> usize {
            *fmap.entry(f).or_insert_with(|| out.new_face(self.active[f]))
        };
        for v in self.vertices().collect::<Vec<_>>() {
            let f = if self.is_isolated(v) { fid(self.iso_face[v], &mut out) } else { 0 };
            vmap[v] = out.add_vertex(self.kind[v], f);
        }
        let mut emap = vec![usize::MAX; self.e_alive.len()];
        for e in self.edges().collect::<Vec<_>>() {
            emap[e] = out.e_alive.len();
            out.e_alive.push(true);
            for d in [2 * e, 2 * e + 1] {
                out.tail.push(vmap[self.tail[d]]);
                let f = fid(self.face[d], &mut out);
                out.face.push(f);
                out.counter.push(self.counter[d]);
            }
        }
        let nd = out.tail.len();
        out.rnext = vec![0; nd];
        out.rprev = vec![0; nd];
        let dmap = |d: usize| 2 * emap[d / 2] + (d & 1);
        for e in self.edges() {
            for d in [2 * e, 2 * e + 1] {
                out.rnext[dmap(d)] = dmap(self.rnext[d]);
                out.rprev[dmap(d)] = dmap(self.rprev[d]);
            }
        }
        for v in self.vertices() {
            out.vdart[vmap[v]] = self.vdart[v].map(dmap);
        }
        out
    }

    /// Builds an embedding from a rotation system as produced by
    /// [`planar_rotation`]. Components other than the first are placed in the
    /// first face of the first component.
    pub fn from_rotation(kinds: &[VertexKind], edges: &[(usize, usize)], rot: &[Vec<usize>]) -> EmbeddedGraph {
        let mut g = EmbeddedGraph::new();
        for &k in kinds {
            g.add_vertex(k, 0);
        }
        for &(u, v) in edges {
            g.e_alive.push(true);
            g.tail.extend([u, v]);
            g.face.extend([usize::MAX, usize::MAX]);
            g.counter.extend([1, 1]);
        }
        let nd = g.tail.len();
        g.rnext = vec![0; nd];
        g.rprev = vec![0; nd];
        for (v, r) in rot.iter().enumerate() {
            for i in 0..r.len() {
                g.rnext[r[i]] = r[(i + 1) % r.len()];
                g.rprev[r[(i + 1) % r.len()]] = r[i];
            }
            g.vdart[v] = r.first().copied();
        }
        // one face id per walk
        for d in 0..nd {
            if g.face[d] == usize::MAX {
                let f = g.new_face(false);
                for x in g.walk(d) {
                    g.face[x] = f;
                }
            }
        }
        if g.active.is_empty() {
            g.new_face(false);
        }
        let comp = g.component_ids();
        let mut outer: HashMap<usize, usize> = HashMap::new();
        let mut host: Option<usize> = None;
        for v in 0..kinds.len() {
            let c = comp[v];
            if outer.contains_key(&c) {
                continue;
            }
            let f = match g.vdart[v] {
                Some(d) => g.face[d],
                None => {
                    let f = host.unwrap_or_else(|| g.new_face(false));
                    g.iso_face[v] = f;
                    f
                }
            };
            outer.insert(c, f);
            match host {
                None => host = Some(f),
                Some(h) => g.relabel_face(f, h),
            }
        }
        g.compacted()
    }

    /// Embeds a bipartite witness graph, if it is planar.
    pub fn embed_witness(real_labels: &[usize], intersections: &[Vec<usize>]) -> Option<EmbeddedGraph> {
        let nr = real_labels.len();
        let index: HashMap<usize, usize> = real_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut kinds: Vec<VertexKind> = real_labels.iter().map(|&l| VertexKind::Real(l)).collect();
        let mut edges = Vec::new();
        for (j, nb) in intersections.iter().enumerate() {
            kinds.push(VertexKind::Intersection);
            for l in nb {
                edges.push((index[l], nr + j));
            }
        }
        let rot = planar_rotation(kinds.len(), &edges)?;
        Some(EmbeddedGraph::from_rotation(&kinds, &edges, &rot))
    }

    /// Adds an edge between two corners of the same face. If both corners lie
    /// on one boundary walk the face splits; the remaining walks and isolated
    /// vertices of the face are then distributed over the two parts in every
    /// possible way. The new part inherits the active mark.
    pub fn connect_corners(&self, cu: Corner, cw: Corner) -> Vec<EmbeddedGraph> {
        let f = self.corner_face(cu);
        debug_assert_eq!(f, self.corner_face(cw));
        debug_assert_ne!(cu.v, cw.v);
        let same_walk = match (cu.after, cw.after) {
            (Some(a), Some(b)) => self.walk(a ^ 1).contains(&(b ^ 1)),
            _ => false,
        };
        let mut g = self.clone();
        let d = g.insert_edge(cu, cw, f, f);
        if !same_walk {
            return vec![g];
        }
        let f2 = g.new_face(g.active[f]);
        let side = g.walk(d ^ 1);
        for &x in &side {
            g.face[x] = f2;
        }
        let face = g.face(f).expect("face keeps the new dart");
        let mut movable: Vec<Vec<usize>> = Vec::new();
        for w in &face.walks {
            if !w.contains(&d) {
                movable.push(w.clone());
            }
        }
        let isolated = face.isolated.clone();
        let total = movable.len() + isolated.len();
        let mut out = Vec::with_capacity(1 << total);
        for mask in 0u32..(1u32 << total) {
            let mut h = g.clone();
            for (i, w) in movable.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for &x in w {
                        h.face[x] = f2;
                    }
                }
            }
            for (j, &v) in isolated.iter().enumerate() {
                if mask >> (movable.len() + j) & 1 == 1 {
                    h.iso_face[v] = f2;
                }
            }
            out.push(h);
        }
        out
    }

    /// Mirror image: every rotation reversed.
    pub fn mirror(&self) -> EmbeddedGraph {
        let mut m = self.clone();
        std::mem::swap(&mut m.rnext, &mut m.rprev);
        for d in 0..self.face.len() {
            m.face[d] = self.face[d ^ 1];
            m.counter[d] = self.counter[d ^ 1];
        }
        m
    }

    /// Simple underlying graph over compact vertex indices, plus the map
    /// from vertex slots to those indices.
    pub fn underlying(&self) -> (Graph, Vec<usize>) {
        let mut idx = vec![usize::MAX; self.kind.len()];
        for (i, v) in self.vertices().enumerate() {
            idx[v] = i;
        }
        let mut g = Graph::new(self.vertex_count());
        for e in self.edges() {
            let (a, b) = (idx[self.tail[2 * e]], idx[self.tail[2 * e + 1]]);
            if a != b {
                g.add_edge(a, b);
            }
        }
        (g, idx)
    }

    pub fn is_connected(&self) -> bool {
        self.underlying().0.is_connected()
    }

    pub fn is_biconnected(&self) -> bool {
        let (g, _) = self.underlying();
        g.n() >= 3 && g.is_biconnected()
    }

    /// Connected, and every face bounded by a single walk of four darts.
    pub fn is_quadrangulation(&self) -> bool {
        self.is_connected()
            && self.edge_count() > 0
            && self.faces().iter().all(|f| f.isolated.is_empty() && f.walks.len() == 1 && f.walks[0].len() == 4)
    }

    /// Pairs of parallel edges bounding a face consisting of exactly those two edges.
    pub fn homotopic_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for f in self.faces() {
            if f.walks.len() != 1 || !f.isolated.is_empty() {
                continue;
            }
            let w = &f.walks[0];
            if w.len() == 2 && w[0] / 2 != w[1] / 2 && !self.is_loop(w[0]) {
                let (a, b) = (w[0] / 2, w[1] / 2);
                out.push((a.min(b), a.max(b)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Canonical encoding, invariant under renumbering of vertices, edges and
    /// faces, under relabelling of intersection vertices and under mirroring.
    /// Active marks are always part of the key; counters only when requested,
    /// and only on darts bounding active faces.
    pub fn canonical_key(&self, with_counters: bool) -> Vec<i64> {
        let g = self.compacted();
        let a = g.oriented_key(with_counters);
        let b = g.mirror().oriented_key(with_counters);
        a.min(b)
    }

    /// Canonical encoding with the orientation fixed.
    pub fn oriented_key(&self, with_counters: bool) -> Vec<i64> {
        KeyBuilder::new(self, with_counters).encode()
    }
}

struct KeyBuilder<'a> {
    g: &'a EmbeddedGraph,
    with_counters: bool,
    /// representative vertex (smallest real label, else smallest slot) per component
    root_of: Vec<usize>,
    /// components touching each face
    by_face: HashMap<usize, BTreeSet<usize>>,
    memo: HashMap<usize, Vec<i64>>,
}

const TAG_ISO: i64 = -7;
const TAG_COMP: i64 = -8;

impl<'a> KeyBuilder<'a> {
    fn new(g: &'a EmbeddedGraph, with_counters: bool) -> Self {
        let comp = g.component_ids();
        let ncomp = comp.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |&m| m + 1);
        let mut root_of = vec![usize::MAX; ncomp];
        let rank = |v: usize| match g.kind[v] {
            VertexKind::Real(l) => (0, l),
            VertexKind::Intersection => (1, v),
        };
        for v in g.vertices() {
            let c = comp[v];
            if root_of[c] == usize::MAX || rank(v) < rank(root_of[c]) {
                root_of[c] = v;
            }
        }
        let mut by_face: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for d in g.darts() {
            by_face.entry(g.face[d]).or_default().insert(comp[g.tail[d]]);
        }
        for v in g.vertices() {
            if g.is_isolated(v) {
                by_face.entry(g.iso_face[v]).or_default().insert(comp[v]);
            }
        }
        KeyBuilder {
            g,
            with_counters,
            root_of,
            by_face,
            memo: HashMap::new(),
        }
    }

    fn label_code(&self, v: usize) -> i64 {
        match self.g.kind[v] {
            VertexKind::Real(l) => l as i64 + 1,
            VertexKind::Intersection => 0,
        }
    }

    fn encode(&mut self) -> Vec<i64> {
        if self.root_of.is_empty() {
            return Vec::new();
        }
        let root = (0..self.root_of.len())
            .min_by_key(|&c| match self.g.kind[self.root_of[c]] {
                VertexKind::Real(l) => (0, l),
                VertexKind::Intersection => (1, c),
            })
            .unwrap();
        self.encode_comp(root, None)
    }

    fn face_children(&mut self, f: usize, own: usize) -> Vec<i64> {
        let others: Vec<usize> = self.by_face.get(&f).map(|s| s.iter().copied().filter(|&c| c != own).collect()).unwrap_or_default();
        let mut encs: Vec<Vec<i64>> = others.into_iter().map(|c| self.encode_comp(c, Some(f))).collect();
        encs.sort();
        let mut out = vec![self.g.active[f] as i64, encs.len() as i64];
        for e in encs {
            out.push(e.len() as i64);
            out.extend(e);
        }
        out
    }

    fn encode_comp(&mut self, c: usize, parent: Option<usize>) -> Vec<i64> {
        if parent.is_some() {
            if let Some(k) = self.memo.get(&c) {
                return k.clone();
            }
        }
        let g = self.g;
        let r = self.root_of[c];
        let mut best: Option<Vec<i64>> = None;
        if g.is_isolated(r) {
            let mut out = vec![TAG_ISO, self.label_code(r)];
            if parent.is_none() {
                out.extend(self.face_children(g.iso_face[r], c));
            }
            best = Some(out);
        } else {
            let mut idx: Vec<usize> = vec![usize::MAX; g.rnext.len()];
            let mut order: Vec<usize> = Vec::new();
            for d0 in g.darts_at(r) {
                for &d in &order {
                    idx[d] = usize::MAX;
                }
                order.clear();
                order.push(d0);
                idx[d0] = 0;
                let mut i = 0;
                while i < order.len() {
                    let d = order[i];
                    for x in [d ^ 1, g.rnext[d]] {
                        if idx[x] == usize::MAX {
                            idx[x] = order.len();
                            order.push(x);
                        }
                    }
                    i += 1;
                }
                let mut local_face: Vec<usize> = Vec::new();
                let mut out = vec![TAG_COMP, order.len() as i64];
                for &d in &order {
                    let f = g.face[d];
                    let fi = match local_face.iter().position(|&x| x == f) {
                        Some(p) => p,
                        None => {
                            local_face.push(f);
                            local_face.len() - 1
                        }
                    };
                    let cnt = if self.with_counters && g.active[f] { g.counter[d] as i64 } else { 0 };
                    out.extend([
                        idx[d ^ 1] as i64,
                        idx[g.rnext[d]] as i64,
                        self.label_code(g.tail[d]),
                        cnt,
                        fi as i64,
                    ]);
                }
                for &f in &local_face {
                    if Some(f) == parent {
                        out.push(-1);
                        continue;
                    }
                    out.extend(self.face_children(f, c));
                }
                if best.as_ref().map_or(true, |b| out < *b) {
                    best = Some(out);
                }
            }
        }
        let key = best.unwrap();
        if parent.is_some() {
            self.memo.insert(c, key.clone());
        }
        key
    }
}

/// Closed walk of a face boundary: vertex sequence plus one counter per walk
/// edge, edge `i` joining `vertices[i]` to `vertices[i + 1]` cyclically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedWalk {
    pub vertices: Vec<usize>,
    pub counters: Vec<u8>,
}

impl ClosedWalk {
    pub fn new(vertices: Vec<usize>) -> Self {
        let counters = if vertices.len() > 1 { vec![1; vertices.len()] } else { Vec::new() };
        ClosedWalk { vertices, counters }
    }

    pub fn counter_sum(&self) -> usize {
        self.counters.iter().map(|&c| c as usize).sum()
    }

    /// Removes every occurrence of `v`, merging the flanking walk edges into
    /// one whose counter is the saturated sum. A self-loop left on a single
    /// vertex is dropped; a walk consisting of `v` alone becomes empty.
    pub fn shortcut(&self, v: usize) -> ClosedWalk {
        assert!(self.vertices.contains(&v), "vertex {v} does not occur on the walk");
        let n = self.vertices.len();
        if self.vertices.iter().all(|&x| x == v) {
            return ClosedWalk {
                vertices: Vec::new(),
                counters: Vec::new(),
            };
        }
        // rotate so the walk starts at a vertex other than v
        let start = self.vertices.iter().position(|&x| x != v).unwrap();
        let mut verts = Vec::new();
        let mut cnts: Vec<u8> = Vec::new();
        for i in 0..n {
            let j = (start + i) % n;
            let c = self.counters.get(j).copied().unwrap_or(0);
            if self.vertices[j] == v {
                let last = cnts.last_mut().expect("walk starts at a kept vertex");
                *last = saturating(*last, c);
            } else {
                verts.push(self.vertices[j]);
                cnts.push(c);
            }
        }
        if verts.len() == 1 {
            cnts.clear();
        }
        ClosedWalk {
            vertices: verts,
            counters: cnts,
        }
    }
}
