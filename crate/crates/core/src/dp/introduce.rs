//! Adding a vertex inside active faces, with every admissible set of
//! intersection vertices and every rotation.
//!
//! The choice of intersection vertices and their embedding are searched
//! together: each decision extends the set of partial embeddings, and a
//! branch stops as soon as that set is empty.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{Corner, EmbeddedGraph, Face, VertexKind};
use crate::graph::Graph;
use crate::witness::{compactness, first_inessential, twin_pair_where, Compactness};

/// Labels standing for intersection vertices while they are being attached.
const TEMP_LABEL: usize = 1 << 40;

/// All ways to add real `v` (adjacent to `nbrs` among the bag) to `map`.
/// With `exact`, the map is a full witness and compactness is checked on it
/// directly; otherwise on what the sketch shows.
pub(crate) fn introduce(
    map: &EmbeddedGraph,
    v: usize,
    nbrs: &BTreeSet<usize>,
    g: &Graph,
    k_cap: usize,
    exact: bool,
) -> Vec<EmbeddedGraph> {
    let mut out = Vec::new();
    for f in map.faces() {
        if !f.active {
            continue;
        }
        out.extend(into_face(map, &f, v, nbrs, g, k_cap, exact, false));
        // v may also sit between x and a new copy of x when all its
        // neighbours are neighbours of x
        for x in f.vertices(map) {
            if !map.is_intersection(x) {
                continue;
            }
            let ls = label_set(map, x);
            if ls.len() >= 2 && map.degree(x) == ls.len() && nbrs.is_subset(&ls) {
                out.extend(separated(map, f.id, x, &ls, v, nbrs, g, k_cap, exact));
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn into_face(
    map: &EmbeddedGraph,
    f: &Face,
    v: usize,
    nbrs: &BTreeSet<usize>,
    g: &Graph,
    k_cap: usize,
    exact: bool,
    checked: bool,
) -> Vec<EmbeddedGraph> {
    // neighbours are reached directly or through an intersection on the face
    let mut present: BTreeSet<usize> = BTreeSet::new();
    for x in f.vertices(map) {
        match map.label(x) {
            Some(l) => {
                present.insert(l);
            }
            None => present.extend(label_set(map, x)),
        }
    }
    if !nbrs.is_subset(&present) {
        return Vec::new();
    }
    let mut h = map.clone();
    let vid = h.add_vertex(VertexKind::Real(v), f.id);
    if nbrs.is_empty() {
        return if !checked || admissible(&h, exact) { vec![h] } else { Vec::new() };
    }
    Search::new(map, f, nbrs, g, k_cap, exact, vid).run(h)
}

/// Adds a copy y of `x` inside face `f`, then puts `v` into a face a-x-b-y
/// whose ends a, b cover its neighbours.
#[allow(clippy::too_many_arguments)]
fn separated(
    map: &EmbeddedGraph,
    f: usize,
    x: usize,
    ends: &BTreeSet<usize>,
    v: usize,
    nbrs: &BTreeSet<usize>,
    g: &Graph,
    k_cap: usize,
    exact: bool,
) -> Vec<EmbeddedGraph> {
    let ends: Vec<usize> = ends.iter().map(|&l| map.find_real(l).expect("neighbour of x")).collect();
    let mut h = map.clone();
    let y = h.add_vertex(VertexKind::Intersection, f);
    let mut states = vec![h];
    for &a in &ends {
        states = dedup(states.iter().flat_map(|s| connect_all(s, y, a)).collect());
    }
    let mut out = Vec::new();
    for s in &states {
        for f4 in s.faces() {
            if !f4.active || f4.walks.len() != 1 || !f4.isolated.is_empty() || f4.walks[0].len() != 4 {
                continue;
            }
            let vs = f4.vertices(s);
            if !vs.contains(&x) || !vs.contains(&y) {
                continue;
            }
            let covers: BTreeSet<usize> = vs.iter().filter_map(|&u| s.label(u)).collect();
            if nbrs.is_subset(&covers) {
                out.extend(into_face(s, &f4, v, nbrs, g, k_cap, exact, true));
            }
        }
    }
    out
}

fn admissible(g: &EmbeddedGraph, exact: bool) -> bool {
    if exact {
        compactness(g) == Compactness::Compact
    } else {
        first_inessential(g).is_none() && twin_pair_where(g, true).is_none()
    }
}

fn label_set(map: &EmbeddedGraph, x: usize) -> BTreeSet<usize> {
    map.real_neighbors(x)
}

fn pairs_of(s: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            out.push((s[i], s[j]));
        }
    }
    out
}

struct Search<'p> {
    nbrs: &'p BTreeSet<usize>,
    exact: bool,
    vid: usize,
    reusable: Vec<usize>,
    reuse_labels: Vec<BTreeSet<usize>>,
    subsets: Vec<Vec<usize>>,
    caps: Vec<usize>,
    /// labels still obtainable from reusable `i..` and all subsets
    reuse_rest: Vec<BTreeSet<usize>>,
    /// labels still obtainable from subsets `i..`
    fresh_rest: Vec<BTreeSet<usize>>,
    deg2: Vec<(usize, BTreeSet<usize>)>,
    /// indices into `reusable`
    reuse: Vec<usize>,
    fresh: Vec<Vec<usize>>,
    /// how many chosen neighbourhoods contain each pair of bag reals
    pairs: BTreeMap<(usize, usize), usize>,
    out: Vec<EmbeddedGraph>,
}

impl<'p> Search<'p> {
    fn new(
        map: &'p EmbeddedGraph,
        f: &Face,
        nbrs: &'p BTreeSet<usize>,
        g: &Graph,
        k_cap: usize,
        exact: bool,
        vid: usize,
    ) -> Self {
        let on_face = f.vertices(map);
        let reusable: Vec<usize> = on_face
            .iter()
            .copied()
            .filter(|&x| {
                map.is_intersection(x) && map.degree(x) > 0 && map.degree(x) < k_cap && label_set(map, x).is_subset(nbrs)
            })
            .collect();
        let reuse_labels: Vec<BTreeSet<usize>> = reusable.iter().map(|&x| label_set(map, x)).collect();
        let nb: Vec<usize> = on_face
            .iter()
            .filter_map(|&x| map.label(x))
            .filter(|l| nbrs.contains(l))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // a new vertex with three or more old neighbours would survive in the
        // restriction to the old vertices, so it is a reused one instead
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if k_cap > 2 && g.has_edge(a, b) {
                    subsets.push(vec![a, b]);
                }
            }
        }
        // larger sets first, so a covered singleton is known when reached
        if k_cap > 1 {
            subsets.extend(nb.iter().map(|&a| vec![a]));
        }
        let walks = f.walks.len() + f.isolated.len();
        let caps: Vec<usize> = subsets
            .iter()
            .map(|s| {
                if s.len() >= 2 {
                    2
                } else {
                    // copies need something between them: another corner of s
                    // or another walk
                    let sv = map.find_real(s[0]).expect("neighbour on face");
                    let corners = map.corners(sv).into_iter().filter(|&(_, cf)| cf == f.id).count();
                    corners + walks - 1
                }
            })
            .collect();
        let mut fresh_rest = vec![BTreeSet::new(); subsets.len() + 1];
        for i in (0..subsets.len()).rev() {
            let mut s = fresh_rest[i + 1].clone();
            s.extend(subsets[i].iter().copied());
            fresh_rest[i] = s;
        }
        let mut reuse_rest = vec![fresh_rest[0].clone(); reusable.len() + 1];
        for i in (0..reusable.len()).rev() {
            let mut s = reuse_rest[i + 1].clone();
            s.extend(reuse_labels[i].iter().copied());
            reuse_rest[i] = s;
        }
        let deg2: Vec<(usize, BTreeSet<usize>)> = map
            .vertices()
            .filter(|&y| map.is_intersection(y) && map.degree(y) == 2)
            .map(|y| (y, label_set(map, y)))
            .collect();
        Search {
            nbrs,
            exact,
            vid,
            reusable,
            reuse_labels,
            subsets,
            caps,
            reuse_rest,
            fresh_rest,
            deg2,
            reuse: Vec::new(),
            fresh: Vec::new(),
            pairs: BTreeMap::new(),
            out: Vec::new(),
        }
    }

    fn run(mut self, base: EmbeddedGraph) -> Vec<EmbeddedGraph> {
        self.reuse_step(0, vec![base]);
        self.out
    }

    fn covered(&self) -> BTreeSet<usize> {
        let mut c: BTreeSet<usize> = BTreeSet::new();
        for &i in &self.reuse {
            c.extend(self.reuse_labels[i].iter().copied());
        }
        for s in &self.fresh {
            c.extend(s.iter().copied());
        }
        c
    }

    fn can_cover(&self, rest: &BTreeSet<usize>) -> bool {
        let c = self.covered();
        self.nbrs.iter().all(|x| c.contains(x) || rest.contains(x))
    }

    /// Adds a neighbourhood; fails if three chosen vertices would share two
    /// reals besides the new vertex (a K3,3).
    fn push_pairs(&mut self, s: &[usize]) -> bool {
        let ps = pairs_of(s);
        if ps.iter().any(|p| self.pairs.get(p).copied().unwrap_or(0) >= 2) {
            return false;
        }
        for p in ps {
            *self.pairs.entry(p).or_default() += 1;
        }
        true
    }

    fn pop_pairs(&mut self, s: &[usize]) {
        for p in pairs_of(s) {
            *self.pairs.get_mut(&p).unwrap() -= 1;
        }
    }

    fn reuse_step(&mut self, i: usize, states: Vec<EmbeddedGraph>) {
        if !self.can_cover(&self.reuse_rest[i]) {
            return;
        }
        if i == self.reusable.len() {
            self.fresh_step(0, states);
            return;
        }
        self.reuse_step(i + 1, states.clone());
        let x = self.reusable[i];
        let s: Vec<usize> = self.reuse_labels[i].iter().copied().collect();
        if self.push_pairs(&s) {
            let next = dedup(states.iter().flat_map(|g| connect_all(g, self.vid, x)).collect());
            if !next.is_empty() {
                self.reuse.push(i);
                self.reuse_step(i + 1, next);
                self.reuse.pop();
            }
            self.pop_pairs(&s);
        }
    }

    fn covered_by_big(&self, x: usize) -> bool {
        self.fresh.iter().any(|f| f.len() >= 2 && f.contains(&x)) || self.reuse.iter().any(|&i| self.reuse_labels[i].contains(&x))
    }

    fn fresh_step(&mut self, i: usize, states: Vec<EmbeddedGraph>) {
        if !self.can_cover(&self.fresh_rest[i]) {
            return;
        }
        if i == self.subsets.len() {
            self.check(states);
            return;
        }
        let s = self.subsets[i].clone();
        // a degree-two vertex {v, s} is inessential next to a larger one containing s
        let cap = if s.len() == 1 && self.covered_by_big(s[0]) { 0 } else { self.caps[i] };
        let mut pushed = 0;
        let mut states = states;
        loop {
            self.fresh_step(i + 1, states.clone());
            if pushed == cap || !self.push_pairs(&s) {
                break;
            }
            states = self.attach_fresh(&states, &s);
            self.fresh.push(s.clone());
            pushed += 1;
            if states.is_empty() {
                break;
            }
        }
        for _ in 0..pushed {
            self.fresh.pop();
            self.pop_pairs(&s);
        }
    }

    /// Adds a new vertex adjacent to `v` and to every real of `s`, in every
    /// way, dropping embeddings with a twin face that can no longer be split.
    fn attach_fresh(&self, states: &[EmbeddedGraph], s: &[usize]) -> Vec<EmbeddedGraph> {
        let label = TEMP_LABEL + self.fresh.len();
        let mut next = Vec::new();
        for g in states {
            for (cv, fv) in g.corners(self.vid) {
                let mut h = g.clone();
                let u = h.add_vertex(VertexKind::Real(label), fv);
                next.extend(h.connect_corners(cv, Corner { v: u, after: None }));
            }
        }
        let mut states = dedup(next);
        for &r in s {
            let mut next = Vec::new();
            for g in &states {
                let u = g.find_real(label).unwrap();
                let rv = g.find_real(r).unwrap();
                next.extend(connect_all(g, u, rv));
            }
            states = dedup(next);
        }
        let done = TEMP_LABEL..=label;
        states.retain(|g| !has_twin_face(g, |x| g.is_intersection(x) || g.label(x).is_some_and(|l| done.contains(&l))));
        states
    }

    fn check(&mut self, states: Vec<EmbeddedGraph>) {
        if self.reuse.is_empty() && self.fresh.is_empty() {
            return;
        }
        if self.covered() != *self.nbrs {
            return;
        }
        let mut big: Vec<&BTreeSet<usize>> = self.reuse.iter().map(|&i| &self.reuse_labels[i]).collect();
        let fresh_big: Vec<BTreeSet<usize>> =
            self.fresh.iter().filter(|s| s.len() >= 2).map(|s| s.iter().copied().collect()).collect();
        big.extend(fresh_big.iter());
        for s in &self.fresh {
            if s.len() == 1 && big.iter().any(|b| b.contains(&s[0])) {
                return;
            }
        }
        // existing degree-two vertices must not end up inside a grown neighbourhood
        for (y, ny) in &self.deg2 {
            if self.reuse.iter().any(|&i| self.reusable[i] == *y) {
                continue;
            }
            if big.iter().any(|b| ny.is_subset(b)) {
                return;
            }
        }
        for mut g in states {
            for j in 0..self.fresh.len() {
                let u = g.find_real(TEMP_LABEL + j).unwrap();
                g.set_kind(u, VertexKind::Intersection);
            }
            if admissible(&g, self.exact) {
                self.out.push(g);
            }
        }
    }
}

/// States built by the same sequence of steps share vertex and dart ids, so
/// they are equal when rotations, face partition and activity agree.
fn state_key(g: &EmbeddedGraph) -> Vec<usize> {
    let mut face_no: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(2 * g.rnext.len() + g.kind.len());
    for d in 0..g.rnext.len() {
        if !g.e_alive[d / 2] {
            continue;
        }
        let next = face_no.len();
        let f = *face_no.entry(g.face[d]).or_insert(next);
        out.extend([g.rnext[d], f, g.active[g.face[d]] as usize]);
    }
    for v in 0..g.kind.len() {
        if g.v_alive[v] && g.vdart[v].is_none() {
            let next = face_no.len();
            let f = *face_no.entry(g.iso_face[v]).or_insert(next);
            out.extend([v, f, g.active[g.iso_face[v]] as usize]);
        }
    }
    out
}

fn dedup(states: Vec<EmbeddedGraph>) -> Vec<EmbeddedGraph> {
    let mut seen: BTreeMap<Vec<usize>, EmbeddedGraph> = BTreeMap::new();
    for s in states {
        seen.entry(state_key(&s)).or_insert(s);
    }
    seen.into_values().collect()
}

fn connect_all(g: &EmbeddedGraph, a: usize, b: usize) -> Vec<EmbeddedGraph> {
    let mut out = Vec::new();
    let cb = g.corners(b);
    for (ca, fa) in g.corners(a) {
        for &(cbb, fb) in &cb {
            if fa == fb {
                out.extend(g.connect_corners(ca, cbb));
            }
        }
    }
    out
}

/// Whether some face is a 4-cycle through two degree-two vertices (as told by
/// `inter`) with the same neighbours. Such a face can never be split again
/// by the remaining steps.
fn has_twin_face(g: &EmbeddedGraph, inter: impl Fn(usize) -> bool) -> bool {
    g.faces().iter().any(|f| {
        if f.walks.len() != 1 || !f.isolated.is_empty() || f.walks[0].len() != 4 {
            return false;
        }
        let vs: Vec<usize> = f.walks[0].iter().map(|&d| g.tail(d)).collect();
        (0..2).any(|o| {
            let (a, b) = (vs[o], vs[o + 2]);
            a != b
                && vs[1 - o] != vs[3 - o]
                && inter(a)
                && inter(b)
                && g.degree(a) == 2
                && g.degree(b) == 2
                && g.neighbors(a).into_iter().collect::<BTreeSet<_>>() == g.neighbors(b).into_iter().collect()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(label: usize) -> EmbeddedGraph {
        let mut g = EmbeddedGraph::new();
        let f = g.new_face(true);
        g.add_vertex(VertexKind::Real(label), f);
        g
    }

    #[test]
    fn edge_from_single_vertex() {
        let g = Graph::complete(2);
        let out = introduce(&single(0), 1, &[0].into(), &g, usize::MAX, true);
        let keys: BTreeSet<Vec<i64>> = out.iter().map(|m| m.canonical_key(false)).collect();
        assert_eq!(keys.len(), 1);
        let m = &out[0];
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.edge_count(), 2);
    }

    #[test]
    fn isolated_vertex_joins_face() {
        let g = Graph::new(2);
        let out = introduce(&single(0), 1, &BTreeSet::new(), &g, usize::MAX, true);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].faces().len(), 1);
    }

    #[test]
    fn degree_cap_prunes_patterns() {
        // path a - u - b, then c adjacent to both
        let g = Graph::complete(3);
        let ab = introduce(&single(0), 1, &[0].into(), &g, usize::MAX, true).remove(0);
        let all = introduce(&ab, 2, &[0, 1].into(), &g, usize::MAX, true);
        let capped = introduce(&ab, 2, &[0, 1].into(), &g, 2, true);
        assert!(!capped.is_empty());
        assert!(capped.len() < all.len());
        for m in &capped {
            for x in m.vertices().filter(|&x| m.is_intersection(x)) {
                assert!(m.degree(x) <= 2);
            }
        }
    }

    #[test]
    fn neighbour_reached_through_intersection() {
        // star {0,1,2}; vertex 3 adjacent to all three reuses the centre
        let g = Graph::complete(4);
        let mut star = EmbeddedGraph::embed_witness(&[0, 1, 2], &[vec![0, 1, 2]]).unwrap();
        for f in star.faces() {
            star.set_active(f.id, true);
        }
        let out = introduce(&star, 3, &[0, 1, 2].into(), &g, 4, true);
        assert!(out.iter().any(|m| m.vertices().filter(|&x| m.is_intersection(x)).count() == 1));
    }
}
