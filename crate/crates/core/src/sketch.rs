//! Embedding sketches: the part of a partial witness visible from a bag.
//!
//! A sketch keeps the anchor vertices that lie on active faces; every other
//! vertex is shortcut away. Shortcutting a vertex joins, inside each active
//! face, the two anchors flanking each of its occurrences by a chord whose
//! counter is the number of witness edges it stands for. Everything that is
//! not on an active face collapses into non-active faces.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{saturating, EmbeddedGraph, VertexKind};

/// An embedded map whose vertices are all anchors of a bag.
#[derive(Clone, Debug)]
pub struct Sketch {
    pub map: EmbeddedGraph,
    pub hole_free: bool,
}

impl Sketch {
    pub fn key(&self) -> Vec<i64> {
        self.map.canonical_key(self.hole_free)
    }

    pub fn vertex_count(&self) -> usize {
        self.map.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.map.edge_count()
    }
}

/// Anchor test for a vertex slot: a real of the bag, or an intersection
/// vertex of positive degree whose neighbours all belong to the bag.
pub fn is_anchor(g: &EmbeddedGraph, v: usize, bag: &BTreeSet<usize>) -> bool {
    match g.kind(v) {
        VertexKind::Real(l) => bag.contains(&l),
        VertexKind::Intersection => {
            let nb = g.neighbors(v);
            !nb.is_empty() && nb.into_iter().all(|w| g.label(w).is_some_and(|l| bag.contains(&l)))
        }
    }
}

/// Anchor slots of `g` with respect to `bag`.
pub fn anchors(g: &EmbeddedGraph, bag: &BTreeSet<usize>) -> BTreeSet<usize> {
    g.vertices().filter(|&v| is_anchor(g, v, bag)).collect()
}

struct Chord {
    p: usize,
    q: usize,
    entry: usize,
    exit: usize,
    counter: u8,
    face: usize,
}

/// Removes vertex `y`, replacing each of its occurrences on active face
/// boundaries by a chord between the flanking vertices. Non-active faces
/// around `y` merge with the region `y` leaves behind, which is non-active.
pub fn shortcut_vertex(g: &mut EmbeddedGraph, y: usize) {
    let at_y = g.darts_at(y);
    if at_y.is_empty() {
        g.v_alive[y] = false;
        return;
    }
    let gap = g.new_face(false);
    let mut merge_into_gap: BTreeSet<usize> = BTreeSet::new();
    let mut chords: Vec<Chord> = Vec::new();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for &x in &at_y {
        if g.is_loop(x) {
            continue;
        }
        let e = x ^ 1;
        let f = g.face_of(e);
        let mut sum = g.counter(e);
        covered.insert(e);
        let mut t = g.face_next(e);
        while g.head(t) == y {
            sum = saturating(sum, g.counter(t));
            covered.insert(t);
            t = g.face_next(t);
        }
        sum = saturating(sum, g.counter(t));
        covered.insert(t);
        if g.is_active(f) {
            chords.push(Chord {
                p: g.tail(e),
                q: g.head(t),
                entry: e,
                exit: t,
                counter: sum,
                face: f,
            });
        } else {
            merge_into_gap.insert(f);
        }
    }
    // faces bounded only by loops at y
    for &x in &at_y {
        for d in [x, x ^ 1] {
            if !covered.contains(&d) {
                merge_into_gap.insert(g.face_of(d));
            }
        }
    }

    // create chord edges without placing them yet
    let mut chord_dart: Vec<usize> = Vec::with_capacity(chords.len());
    for ch in &chords {
        let e = g.e_alive.len();
        g.e_alive.push(true);
        g.tail.extend([ch.p, ch.q]);
        g.rnext.extend([2 * e, 2 * e + 1]);
        g.rprev.extend([2 * e, 2 * e + 1]);
        g.face.extend([ch.face, gap]);
        g.counter.extend([ch.counter, 1]);
        chord_dart.push(2 * e);
    }
    let mut by_entry: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_exit: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, ch) in chords.iter().enumerate() {
        by_entry.insert(ch.entry, chord_dart[i]);
        by_exit.insert(ch.exit ^ 1, chord_dart[i] ^ 1);
    }

    for &x in &at_y {
        if g.is_loop(x) {
            continue;
        }
        let e = x ^ 1;
        let p = g.tail(e);
        let mut seq = Vec::new();
        if let Some(&c) = by_entry.get(&e) {
            seq.push(c);
        }
        if let Some(&c) = by_exit.get(&e) {
            seq.push(c);
        }
        let (a, b) = (g.rprev[e], g.rnext[e]);
        if a == e {
            if seq.is_empty() {
                g.vdart[p] = None;
                g.iso_face[p] = if g.is_active(g.face_of(e)) { g.face_of(e) } else { gap };
                continue;
            }
            for i in 0..seq.len() {
                let (s, t) = (seq[i], seq[(i + 1) % seq.len()]);
                g.rnext[s] = t;
                g.rprev[t] = s;
            }
            g.vdart[p] = Some(seq[0]);
            continue;
        }
        let mut prev = a;
        for &s in &seq {
            g.rnext[prev] = s;
            g.rprev[s] = prev;
            prev = s;
        }
        g.rnext[prev] = b;
        g.rprev[b] = prev;
        if g.vdart[p] == Some(e) {
            g.vdart[p] = Some(seq.first().copied().unwrap_or(b));
        }
    }
    for &x in &at_y {
        g.e_alive[x / 2] = false;
    }
    g.vdart[y] = None;
    g.v_alive[y] = false;
    for f in merge_into_gap {
        g.relabel_face(f, gap);
    }
}

/// Marks active faces with fewer than two anchors as non-active. Returns
/// false if one of them fails the completeness test of hole-free witnesses:
/// a single boundary walk whose counters sum to exactly four.
pub fn retire_faces(g: &mut EmbeddedGraph, anchor: impl Fn(&EmbeddedGraph, usize) -> bool) -> bool {
    let mut complete = true;
    for f in g.faces() {
        if !f.active {
            continue;
        }
        let count = f.vertices(g).into_iter().filter(|&v| anchor(g, v)).count();
        if count < 2 {
            g.set_active(f.id, false);
            let sum: usize = f.walks.iter().flatten().map(|&d| g.counter(d) as usize).sum();
            if f.walks.len() != 1 || !f.isolated.is_empty() || sum != 4 {
                complete = false;
            }
        }
    }
    complete
}

/// Marks every face non-active, with the same completeness test.
pub fn retire_all(g: &mut EmbeddedGraph) -> bool {
    retire_faces(g, |_, _| false)
}

/// Hole-free necessary conditions on what is still active: no loops and no
/// saturated counters on active boundaries.
pub fn active_boundaries_ok(g: &EmbeddedGraph) -> bool {
    g.darts().all(|d| !g.is_active(g.face_of(d)) || (!g.is_loop(d) && g.counter(d) < crate::embed::SATURATED))
}

/// Removes what no active face can see: chords with non-active faces on both
/// sides, loops around empty non-active monogons, and intersection vertices
/// without an incident active face. Reals are always kept.
pub fn collect_garbage(g: &mut EmbeddedGraph) {
    loop {
        let mut changed = false;
        for e in g.edges().collect::<Vec<_>>() {
            if !g.e_alive[e] {
                continue;
            }
            let (d, t) = (2 * e, 2 * e + 1);
            if g.is_intersection(g.tail(d)) || g.is_intersection(g.tail(t)) {
                continue;
            }
            let (fd, ft) = (g.face_of(d), g.face_of(t));
            if !g.is_active(fd) && !g.is_active(ft) {
                g.remove_edge(e);
                g.relabel_face(ft, fd);
                changed = true;
                continue;
            }
            if g.is_loop(d) {
                for (side, other) in [(d, t), (t, d)] {
                    let f = g.face_of(side);
                    if g.is_active(f) || g.face_next(side) != side {
                        continue;
                    }
                    let lone = g.darts().filter(|&x| g.face_of(x) == f).count() == 1
                        && g.vertices().all(|v| !g.is_isolated(v) || g.iso_face(v) != f);
                    if lone {
                        let keep = g.face_of(other);
                        g.remove_edge(e);
                        g.relabel_face(f, keep);
                        changed = true;
                        break;
                    }
                }
            }
        }
        for v in g.vertices().collect::<Vec<_>>() {
            if !g.is_intersection(v) {
                continue;
            }
            let ds = g.darts_at(v);
            if ds.iter().any(|&a| g.is_active(g.face_of(a)) || g.is_active(g.face_of(a ^ 1))) {
                continue;
            }
            let faces: BTreeSet<usize> = ds.iter().flat_map(|&a| [g.face_of(a), g.face_of(a ^ 1)]).collect();
            g.remove_vertex(v);
            if let Some(&first) = faces.iter().next() {
                for &f in faces.iter().skip(1) {
                    g.relabel_face(f, first);
                }
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

/// Active faces bounded by exactly two parallel edges, grouped by endpoint
/// labels (and counter multiset in hole-free mode); all but one face per
/// group are made non-active. The survivor is the one yielding the smallest
/// canonical key, so the result does not depend on dart numbering.
pub fn dedup_nonextensible(g: &mut EmbeddedGraph, hole_free: bool) {
    let mut groups: BTreeMap<(VertexKind, VertexKind, u8, u8), Vec<usize>> = BTreeMap::new();
    for f in g.faces() {
        if !f.active || f.walks.len() != 1 || !f.isolated.is_empty() {
            continue;
        }
        let w = &f.walks[0];
        if w.len() != 2 || w[0] / 2 == w[1] / 2 || g.is_loop(w[0]) {
            continue;
        }
        let (a, b) = (g.kind(g.tail(w[0])), g.kind(g.tail(w[1])));
        let (c0, c1) = if hole_free { (g.counter(w[0]), g.counter(w[1])) } else { (0, 0) };
        let key = (a.min(b), a.max(b), c0.min(c1), c0.max(c1));
        groups.entry(key).or_default().push(f.id);
    }
    for (_, faces) in groups {
        if faces.len() < 2 {
            continue;
        }
        let mut best: Option<(Vec<i64>, EmbeddedGraph)> = None;
        for &keep in &faces {
            let mut h = g.clone();
            for &f in &faces {
                if f != keep {
                    h.set_active(f, false);
                }
            }
            collect_garbage(&mut h);
            let k = h.canonical_key(hole_free);
            if best.as_ref().map_or(true, |(bk, _)| k < *bk) {
                best = Some((k, h));
            }
        }
        *g = best.unwrap().1;
    }
}

/// Sets every counter to one (counters only matter in hole-free mode).
pub fn reset_counters(g: &mut EmbeddedGraph) {
    for d in 0..g.counter.len() {
        g.counter[d] = 1;
    }
}

/// The sketch of an embedded witness with respect to a bag.
pub fn compute_sketch(w: &EmbeddedGraph, bag: &BTreeSet<usize>, hole_free: bool) -> Sketch {
    let mut g = w.clone();
    reset_counters(&mut g);
    let anchor = anchors(&g, bag);
    let single = g.vertex_count() == 1;
    for f in g.faces() {
        let count = f.vertices(&g).intersection(&anchor).count();
        g.set_active(f.id, count >= 2 || (single && count == 1));
    }
    for v in g.vertices().collect::<Vec<_>>() {
        if !anchor.contains(&v) {
            shortcut_vertex(&mut g, v);
        }
    }
    collect_garbage(&mut g);
    dedup_nonextensible(&mut g, hole_free);
    Sketch {
        map: g.compacted(),
        hole_free,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn star() -> EmbeddedGraph {
        EmbeddedGraph::embed_witness(&[0, 1, 2], &[vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn anchor_examples() {
        let w = star();
        assert_eq!(anchors(&w, &bag(&[0, 1, 2])).len(), 4);
        let a = anchors(&w, &bag(&[0, 1]));
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|&v| !w.is_intersection(v)));
        let p = EmbeddedGraph::embed_witness(&[0, 1], &[vec![0, 1]]).unwrap();
        assert_eq!(anchors(&p, &bag(&[0, 1])).len(), 3);
    }

    #[test]
    fn single_vertex_sketch() {
        let mut w = EmbeddedGraph::new();
        let f = w.new_face(false);
        w.add_vertex(VertexKind::Real(0), f);
        let s = compute_sketch(&w, &bag(&[0]), false);
        assert_eq!(s.vertex_count(), 1);
        let faces = s.map.faces();
        assert_eq!(faces.len(), 1);
        assert!(faces[0].active);
    }

    #[test]
    fn star_sketch_is_a_digon() {
        let s = compute_sketch(&star(), &bag(&[0, 1]), false);
        assert_eq!(s.vertex_count(), 2);
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.map.homotopic_pairs().len(), 1);
        assert_eq!(s.map.faces().iter().filter(|f| f.active).count(), 1);
    }

    #[test]
    fn path_sketch_keeps_everything() {
        let p = EmbeddedGraph::embed_witness(&[0, 1], &[vec![0, 1]]).unwrap();
        let s = compute_sketch(&p, &bag(&[0, 1]), true);
        assert_eq!(s.vertex_count(), 3);
        let faces = s.map.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].walks[0].len(), 4);
        assert!(s.map.darts().all(|d| s.map.counter(d) == 1));
    }

    #[test]
    fn shortcut_sums_counters() {
        let mut p = EmbeddedGraph::embed_witness(&[0, 1], &[vec![0, 1]]).unwrap();
        for f in 0..p.active.len() {
            p.set_active(f, true);
        }
        let u = p.vertices().find(|&v| p.is_intersection(v)).unwrap();
        shortcut_vertex(&mut p, u);
        let g = p.compacted();
        g.check_consistency().unwrap();
        assert_eq!(g.edge_count(), 2);
        let active: Vec<_> = g.faces().into_iter().filter(|f| f.active).collect();
        assert_eq!(active.len(), 1);
        assert_eq!(active[0].walks[0].iter().map(|&d| g.counter(d)).sum::<u8>(), 4);
    }

    #[test]
    fn dedup_keeps_one_digon() {
        // three parallel non-extensible boundaries between reals 0 and 1
        let mut g = EmbeddedGraph::new();
        let f = g.new_face(true);
        let a = g.add_vertex(VertexKind::Real(0), f);
        let b = g.add_vertex(VertexKind::Real(1), f);
        let mut cur = vec![g.clone()];
        for _ in 0..3 {
            let h = cur.pop().unwrap();
            let ca = h.corners(a)[0].0;
            let cb = h.corners(b).into_iter().find(|(c, fc)| *fc == h.corner_face(ca) && c.v == b).unwrap().0;
            cur = h.connect_corners(ca, cb);
        }
        let mut h = cur.pop().unwrap();
        for f in 0..h.active.len() {
            h.set_active(f, true);
        }
        assert_eq!(h.faces().len(), 3);
        dedup_nonextensible(&mut h, false);
        assert_eq!(h.faces().iter().filter(|f| f.active).count(), 1);
    }

    #[test]
    fn dedup_respects_counter_signatures() {
        let mut g = EmbeddedGraph::new();
        let f = g.new_face(true);
        let a = g.add_vertex(VertexKind::Real(0), f);
        let b = g.add_vertex(VertexKind::Real(1), f);
        let mut h = g;
        for _ in 0..2 {
            let ca = h.corners(a)[0].0;
            let cb = h.corners(b)[0].0;
            h = h.connect_corners(ca, cb).pop().unwrap();
        }
        // digon faces: bump one dart of one face
        let faces = h.faces();
        assert_eq!(faces.len(), 2);
        let d = faces[0].walks[0][0];
        h.set_counter(d, 2);
        let mut plain = h.clone();
        dedup_nonextensible(&mut plain, false);
        assert_eq!(plain.faces().iter().filter(|f| f.active).count(), 1);
        dedup_nonextensible(&mut h, true);
        assert_eq!(h.faces().iter().filter(|f| f.active).count(), 2);
        let mut unchanged = EmbeddedGraph::embed_witness(&[0, 1, 2], &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let before = unchanged.canonical_key(false);
        dedup_nonextensible(&mut unchanged, false);
        assert_eq!(before, unchanged.canonical_key(false));
    }
}
