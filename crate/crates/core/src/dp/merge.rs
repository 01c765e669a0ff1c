//! Merging two embedded maps over the same bag.
//!
//! The second map is copied into the first: bag reals are identified, and
//! intersection vertices with equal neighbourhoods may be fused. Rotations at
//! shared reals interleave the two cyclic orders; darts of one side may only
//! enter corners that lie in active faces of the other. Components are then
//! placed into faces in every way that restricts back to both position
//! systems.

use std::collections::{BTreeMap, BTreeSet};

use crate::embed::{EmbeddedGraph, VertexKind};

/// All merges of `m2` (in both orientations) into `m1`.
pub(crate) fn merge_maps(m1: &EmbeddedGraph, m2: &EmbeddedGraph, bag: &BTreeSet<usize>) -> Vec<EmbeddedGraph> {
    let m1 = m1.compacted();
    let plain = m2.compacted();
    let mirrored = plain.mirror();
    let mut out = Vec::new();
    for m2 in [&plain, &mirrored] {
        for fusion in fusions(&m1, m2, bag) {
            Merger::new(&m1, m2, bag, &fusion).run(&mut out);
        }
    }
    out
}

fn neighbor_labels(m: &EmbeddedGraph, x: usize) -> Vec<usize> {
    m.neighbors(x).into_iter().map(|w| m.label(w).unwrap_or(usize::MAX)).collect()
}

fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..b.len()).any(|r| (0..a.len()).all(|i| a[i] == b[(i + r) % b.len()]))
}

/// Partial matchings between equal-neighbourhood intersection vertices whose
/// rotations agree.
fn fusions(m1: &EmbeddedGraph, m2: &EmbeddedGraph, bag: &BTreeSet<usize>) -> Vec<Vec<(usize, usize)>> {
    let classes = |m: &EmbeddedGraph| {
        let mut out: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
        for x in m.vertices() {
            if !m.is_intersection(x) || m.degree(x) == 0 {
                continue;
            }
            let nb = m.real_neighbors(x);
            if nb.is_subset(bag) && nb.len() == m.degree(x) {
                out.entry(nb).or_default().push(x);
            }
        }
        out
    };
    let c1 = classes(m1);
    let c2 = classes(m2);
    let mut result: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for (nb, xs) in &c1 {
        let Some(ys) = c2.get(nb) else { continue };
        let mut options: Vec<Vec<(usize, usize)>> = Vec::new();
        partial_matchings(m1, m2, xs, ys, 0, &mut vec![false; ys.len()], &mut Vec::new(), &mut options);
        let mut next = Vec::with_capacity(result.len() * options.len());
        for base in &result {
            for opt in &options {
                let mut f = base.clone();
                f.extend(opt.iter().copied());
                next.push(f);
            }
        }
        result = next;
    }
    result
}

#[allow(clippy::too_many_arguments)]
fn partial_matchings(
    m1: &EmbeddedGraph,
    m2: &EmbeddedGraph,
    xs: &[usize],
    ys: &[usize],
    i: usize,
    used: &mut Vec<bool>,
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if i == xs.len() {
        out.push(cur.clone());
        return;
    }
    partial_matchings(m1, m2, xs, ys, i + 1, used, cur, out);
    let rx = neighbor_labels(m1, xs[i]);
    for j in 0..ys.len() {
        if used[j] || !same_cycle(&rx, &neighbor_labels(m2, ys[j])) {
            continue;
        }
        used[j] = true;
        cur.push((xs[i], ys[j]));
        partial_matchings(m1, m2, xs, ys, i + 1, used, cur, out);
        cur.pop();
        used[j] = false;
    }
}


/// Component ids of `m` minus the `fixed` vertices (`usize::MAX` on those).
fn pieces(m: &EmbeddedGraph, fixed: &[bool]) -> Vec<usize> {
    let mut dsu = Dsu::new(m.vertex_slots());
    for e in m.edges() {
        let (a, b) = (m.tail(2 * e), m.tail(2 * e + 1));
        if !fixed[a] && !fixed[b] {
            dsu.union(a, b);
        }
    }
    (0..m.vertex_slots()).map(|v| if fixed[v] { usize::MAX } else { dsu.find(v) }).collect()
}

/// The piece entered by dart `d`; an edge between fixed vertices is a piece
/// of its own.
fn piece_of(m: &EmbeddedGraph, piece: &[usize], d: usize) -> usize {
    match piece[m.tail(d ^ 1)] {
        usize::MAX => piece.len() + (d >> 1),
        p => p,
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

struct Merger<'a> {
    m1: &'a EmbeddedGraph,
    m2: &'a EmbeddedGraph,
    h: EmbeddedGraph,
    /// darts below this index come from `m1`
    nd1: usize,
    nv1: usize,
    /// `h` dart -> `m2` dart
    rev2: Vec<Option<usize>>,
    /// `h` vertex -> `m2` vertex
    rev_v2: Vec<Option<usize>>,
    /// shared reals: `h` vertex, darts of each side, active isolated faces
    shared: Vec<Shared>,
    corners: Corners,
    /// face of the other side hosting each piece of one side
    host: Vec<Option<usize>>,
}

struct Shared {
    hv: usize,
    p: Vec<usize>,
    q: Vec<usize>,
    iso1: Option<usize>,
    iso2: Option<usize>,
}

/// Per `h` dart: the active face of each side in the corner after it, and
/// the piece entered by a dart private to one side.
pub(crate) struct Corners {
    pub(crate) corner1: Vec<Option<usize>>,
    pub(crate) corner2: Vec<Option<usize>>,
    pub(crate) key: Vec<usize>,
    /// darts private to the second side
    pub(crate) side2: Vec<bool>,
}

impl<'a> Merger<'a> {
    fn new(m1: &'a EmbeddedGraph, m2: &'a EmbeddedGraph, bag: &BTreeSet<usize>, fusion: &[(usize, usize)]) -> Self {
        let mut h = m1.clone();
        let nd1 = m1.tail.len();
        let nv1 = m1.vertex_slots();
        let fused2: BTreeMap<usize, usize> = fusion.iter().map(|&(a, b)| (b, a)).collect();
        let mut vmap2 = vec![usize::MAX; m2.vertex_slots()];
        let mut rev_v2 = vec![None; nv1];
        let mut shared_pairs = Vec::new();
        for v2 in m2.vertices() {
            let hv = match m2.kind(v2) {
                VertexKind::Real(l) if bag.contains(&l) => {
                    let hv = m1.find_real(l).expect("bag real present on both sides");
                    shared_pairs.push((hv, v2));
                    hv
                }
                _ => match fused2.get(&v2) {
                    Some(&x1) => x1,
                    None => {
                        let hv = h.add_vertex(m2.kind(v2), 0);
                        rev_v2.push(None);
                        hv
                    }
                },
            };
            vmap2[v2] = hv;
            rev_v2[hv] = Some(v2);
        }
        let mut dmap2 = vec![usize::MAX; m2.tail.len()];
        for e2 in m2.edges().collect::<Vec<_>>() {
            let (a, b) = (m2.tail(2 * e2), m2.tail(2 * e2 + 1));
            if fused2.contains_key(&a) || fused2.contains_key(&b) {
                let (ha, hb) = (vmap2[a], vmap2[b]);
                let d = m1
                    .darts_at(ha)
                    .into_iter()
                    .find(|&d| m1.head(d) == hb)
                    .expect("fused vertex keeps its edges");
                dmap2[2 * e2] = d;
                dmap2[2 * e2 + 1] = d ^ 1;
                continue;
            }
            let e = h.e_alive.len();
            h.e_alive.push(true);
            h.tail.extend([vmap2[a], vmap2[b]]);
            h.rnext.extend([2 * e, 2 * e + 1]);
            h.rprev.extend([2 * e, 2 * e + 1]);
            h.face.extend([0, 0]);
            h.counter.extend([m2.counter(2 * e2), m2.counter(2 * e2 + 1)]);
            dmap2[2 * e2] = 2 * e;
            dmap2[2 * e2 + 1] = 2 * e + 1;
        }
        let mut rev2 = vec![None; h.tail.len()];
        for d in m2.darts() {
            rev2[dmap2[d]] = Some(d);
        }
        // rotations of vertices private to m2
        for v2 in m2.vertices() {
            let hv = vmap2[v2];
            if hv < nv1 {
                continue;
            }
            for d in m2.darts_at(v2) {
                h.rnext[dmap2[d]] = dmap2[m2.rnext[d]];
                h.rprev[dmap2[d]] = dmap2[m2.rprev[d]];
            }
            h.vdart[hv] = m2.vdart[v2].map(|d| dmap2[d]);
        }
        let active_face = |m: &EmbeddedGraph, f: usize| m.is_active(f).then_some(f);
        let mut shared = Vec::new();
        let mut fixed1 = vec![false; m1.vertex_slots()];
        let mut fixed2 = vec![false; m2.vertex_slots()];
        for (hv, v2) in shared_pairs {
            fixed1[hv] = true;
            fixed2[v2] = true;
            shared.push(Shared {
                hv,
                p: m1.darts_at(hv),
                q: m2.darts_at(v2).into_iter().map(|d| dmap2[d]).collect(),
                iso1: if m1.is_isolated(hv) { active_face(m1, m1.iso_face[hv]) } else { None },
                iso2: if m2.is_isolated(v2) { active_face(m2, m2.iso_face[v2]) } else { None },
            });
        }
        for &(a, b) in fusion {
            fixed1[a] = true;
            fixed2[b] = true;
        }
        let piece1 = pieces(m1, &fixed1);
        let piece2 = pieces(m2, &fixed2);
        let off = piece1.len() + m1.tail.len();
        let nd = h.tail.len();
        let mut corners = Corners {
            corner1: vec![None; nd],
            corner2: vec![None; nd],
            key: vec![usize::MAX; nd],
            side2: vec![false; nd],
        };
        for d in 0..nd {
            let d2 = rev2[d];
            if d < nd1 {
                corners.corner1[d] = active_face(m1, m1.face[d ^ 1]);
                if d2.is_none() {
                    corners.key[d] = piece_of(m1, &piece1, d);
                }
            }
            if let Some(d2) = d2 {
                corners.corner2[d] = active_face(m2, m2.face[d2 ^ 1]);
                if d >= nd1 {
                    corners.key[d] = off + piece_of(m2, &piece2, d2);
                    corners.side2[d] = true;
                }
            }
        }
        Merger {
            m1,
            m2,
            h,
            nd1,
            nv1,
            rev2,
            rev_v2,
            shared,
            corners,
            host: vec![None; off + piece2.len() + m2.tail.len()],
        }
    }

    fn run(&mut self, out: &mut Vec<EmbeddedGraph>) {
        let mut fixed = vec![true; self.h.vertex_slots()];
        for s in &self.shared {
            fixed[s.hv] = false;
        }
        let mut todo: Vec<usize> = (0..self.shared.len()).collect();
        self.fix(&mut todo, &mut fixed, out);
    }

    fn rotations(&mut self, i: usize, limit: usize) -> Vec<Vec<usize>> {
        let s = &self.shared[i];
        cyclic_merges(&s.p, &s.q, &self.corners, s.iso1, s.iso2, &mut self.host, limit)
    }

    /// Fixes the most constrained remaining shared vertex, then recurses.
    fn fix(&mut self, todo: &mut Vec<usize>, fixed: &mut Vec<bool>, out: &mut Vec<EmbeddedGraph>) {
        if todo.is_empty() {
            self.place(out);
            return;
        }
        let mut best: Option<(usize, Vec<Vec<usize>>)> = None;
        for t in 0..todo.len() {
            let limit = best.as_ref().map_or(usize::MAX, |(_, b)| b.len());
            let rots = self.rotations(todo[t], limit);
            if rots.is_empty() {
                return;
            }
            if rots.len() < limit {
                best = Some((t, rots));
            }
        }
        let (t, rots) = best.expect("nonempty todo");
        let i = todo.swap_remove(t);
        let Shared { hv, iso1, iso2, .. } = self.shared[i];
        fixed[hv] = true;
        let mut trail = Vec::new();
        for seq in rots {
            for j in 0..seq.len() {
                let (a, b) = (seq[j], seq[(j + 1) % seq.len()]);
                self.h.rnext[a] = b;
                self.h.rprev[b] = a;
            }
            self.h.vdart[hv] = seq.first().copied();
            let hosted = host_rotation(&seq, &self.corners, iso1, iso2, &mut self.host, &mut trail);
            debug_assert!(hosted);
            if self.partial_walks_ok(hv, fixed) {
                self.fix(todo, fixed, out);
            }
            for k in trail.drain(..) {
                self.host[k] = None;
            }
        }
        fixed[hv] = false;
        todo.push(i);
        let last = todo.len() - 1;
        todo.swap(t, last);
    }

    /// Walks through `v` that only visit fixed rotations must see one face
    /// of each side.
    fn partial_walks_ok(&self, v: usize, fixed: &[bool]) -> bool {
        let h = &self.h;
        for start in h.darts_at(v) {
            // back up to the walk start or an unfixed vertex
            let mut d = start;
            loop {
                let p = h.rprev[d] ^ 1;
                if p == start || !fixed[h.tail[d]] {
                    break;
                }
                d = p;
            }
            let first = d;
            let (mut f1, mut f2) = (None, None);
            loop {
                if self.is_m1(d) {
                    let f = self.m1.face[d];
                    if *f1.get_or_insert(f) != f {
                        return false;
                    }
                }
                if let Some(d2) = self.rev2[d] {
                    let f = self.m2.face[d2];
                    if *f2.get_or_insert(f) != f {
                        return false;
                    }
                }
                if !fixed[h.tail[d ^ 1]] {
                    break;
                }
                d = h.face_next(d);
                if d == first {
                    break;
                }
            }
        }
        true
    }


    fn is_m1(&self, d: usize) -> bool {
        d < self.nd1
    }

    fn is_m2(&self, d: usize) -> bool {
        self.rev2[d].is_some()
    }

    /// Enumerates position systems for the current rotation system.
    fn place(&self, out: &mut Vec<EmbeddedGraph>) {
        let h = &self.h;
        let nd = h.tail.len();
        let mut walk_of = vec![usize::MAX; nd];
        let mut walks: Vec<Vec<usize>> = Vec::new();
        for d in h.darts() {
            if walk_of[d] != usize::MAX {
                continue;
            }
            let w = h.walk(d);
            for &x in &w {
                walk_of[x] = walks.len();
            }
            walks.push(w);
        }
        let comp = h.component_ids();
        let ncomp = comp.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |&c| c + 1);
        // Euler per component
        let mut nv = vec![0i64; ncomp];
        let mut ne = vec![0i64; ncomp];
        let mut nw = vec![0i64; ncomp];
        for v in h.vertices() {
            nv[comp[v]] += 1;
        }
        for e in h.edges() {
            ne[comp[h.tail[2 * e]]] += 1;
        }
        for w in &walks {
            nw[comp[h.tail[w[0]]]] += 1;
        }
        for c in 0..ncomp {
            if ne[c] > 0 && nv[c] - ne[c] + nw[c] != 2 {
                return;
            }
        }
        // units: walks, then isolated vertices
        let mut unit_comp: Vec<usize> = walks.iter().map(|w| comp[h.tail[w[0]]]).collect();
        let mut iso_unit: BTreeMap<usize, usize> = BTreeMap::new();
        for v in h.vertices() {
            if h.is_isolated(v) {
                iso_unit.insert(v, unit_comp.len());
                unit_comp.push(comp[v]);
            }
        }
        let nunits = unit_comp.len();
        let mut lab1: Vec<Option<usize>> = vec![None; nunits];
        let mut lab2: Vec<Option<usize>> = vec![None; nunits];
        let set = |slot: &mut Option<usize>, val: usize| -> bool {
            match *slot {
                None => {
                    *slot = Some(val);
                    true
                }
                Some(x) => x == val,
            }
        };
        for (u, w) in walks.iter().enumerate() {
            for &d in w {
                if self.is_m1(d) && !set(&mut lab1[u], self.m1.face[d]) {
                    return;
                }
                if let Some(d2) = self.rev2[d] {
                    if !set(&mut lab2[u], self.m2.face[d2]) {
                        return;
                    }
                }
            }
        }
        for (&v, &u) in &iso_unit {
            if v < self.nv1 {
                lab1[u] = Some(self.m1.iso_face[v]);
            }
            if let Some(v2) = self.rev_v2[v] {
                lab2[u] = Some(self.m2.iso_face[v2]);
            }
        }
        // vertices isolated on one side only carry that side's face to the region around them
        for v in h.vertices() {
            if h.is_isolated(v) {
                continue;
            }
            let u = walk_of[h.vdart[v].expect("non-isolated")];
            if v < self.nv1 && self.m1.is_isolated(v) && !set(&mut lab1[u], self.m1.iso_face[v]) {
                return;
            }
            if let Some(v2) = self.rev_v2[v] {
                if self.m2.is_isolated(v2) && !set(&mut lab2[u], self.m2.iso_face[v2]) {
                    return;
                }
            }
        }

        let mut comp_units: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
        for (u, &c) in unit_comp.iter().enumerate() {
            comp_units[c].push(u);
        }
        let root = unit_comp[0];
        let others: Vec<usize> = (0..ncomp).filter(|&c| c != root).collect();
        let mut choice: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); ncomp];
        let ctx = PlaceCtx {
            unit_comp: &unit_comp,
            comp_units: &comp_units,
            lab1: &lab1,
            lab2: &lab2,
            others: &others,
            root,
        };
        self.assign(&ctx, 0, &mut choice, &walks, &walk_of, &iso_unit, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        ctx: &PlaceCtx,
        i: usize,
        choice: &mut Vec<(usize, usize)>,
        walks: &[Vec<usize>],
        walk_of: &[usize],
        iso_unit: &BTreeMap<usize, usize>,
        out: &mut Vec<EmbeddedGraph>,
    ) {
        if i == ctx.others.len() {
            if let Some(g) = self.finish(ctx, choice, walks, walk_of, iso_unit) {
                out.push(g);
            }
            return;
        }
        let c = ctx.others[i];
        let compatible = |a: Option<usize>, b: Option<usize>| a.is_none() || b.is_none() || a == b;
        for &o in &ctx.comp_units[c] {
            for p in 0..ctx.unit_comp.len() {
                if ctx.unit_comp[p] == c {
                    continue;
                }
                if !compatible(ctx.lab1[o], ctx.lab1[p]) || !compatible(ctx.lab2[o], ctx.lab2[p]) {
                    continue;
                }
                choice[c] = (o, p);
                self.assign(ctx, i + 1, choice, walks, walk_of, iso_unit, out);
            }
        }
        choice[c] = (usize::MAX, usize::MAX);
    }

    fn finish(
        &self,
        ctx: &PlaceCtx,
        choice: &[(usize, usize)],
        walks: &[Vec<usize>],
        walk_of: &[usize],
        iso_unit: &BTreeMap<usize, usize>,
    ) -> Option<EmbeddedGraph> {
        let nunits = ctx.unit_comp.len();
        // parent units must not be outer units, and parents must reach the root
        for &c in ctx.others {
            let p = choice[c].1;
            let pc = ctx.unit_comp[p];
            if pc != ctx.root && choice[pc].0 == p {
                return None;
            }
            let mut cur = c;
            let mut steps = 0;
            while cur != ctx.root {
                cur = ctx.unit_comp[choice[cur].1];
                steps += 1;
                if steps > ctx.others.len() {
                    return None;
                }
            }
        }
        let mut group = vec![usize::MAX; nunits];
        let mut ngroups = 0;
        let outer: BTreeSet<usize> = ctx.others.iter().map(|&c| choice[c].0).collect();
        for u in 0..nunits {
            if !outer.contains(&u) {
                group[u] = ngroups;
                ngroups += 1;
            }
        }
        for &c in ctx.others {
            let (o, p) = choice[c];
            group[o] = group[p];
        }
        let h = &self.h;
        let gd = |d: usize| group[walk_of[d]];

        // restriction to each side: unite across the other side's private edges
        let mut dsu1 = Dsu::new(ngroups);
        let mut dsu2 = Dsu::new(ngroups);
        for e in h.edges() {
            let d = 2 * e;
            if !self.is_m1(d) {
                dsu1.union(gd(d), gd(d ^ 1));
            }
            if !self.is_m2(d) {
                dsu2.union(gd(d), gd(d ^ 1));
            }
        }
        let mut cls1: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cls2: BTreeMap<usize, usize> = BTreeMap::new();
        for u in 0..nunits {
            if let Some(l) = ctx.lab1[u] {
                let r = dsu1.find(group[u]);
                if *cls1.entry(r).or_insert(l) != l {
                    return None;
                }
            }
            if let Some(l) = ctx.lab2[u] {
                let r = dsu2.find(group[u]);
                if *cls2.entry(r).or_insert(l) != l {
                    return None;
                }
            }
        }
        let distinct = |m: &BTreeMap<usize, usize>| m.values().collect::<BTreeSet<_>>().len() == m.len();
        if !distinct(&cls1) || !distinct(&cls2) {
            return None;
        }
        let mut face1 = vec![0usize; ngroups];
        let mut face2 = vec![0usize; ngroups];
        for g in 0..ngroups {
            face1[g] = *cls1.get(&dsu1.find(g))?;
            face2[g] = *cls2.get(&dsu2.find(g))?;
        }
        // nothing private to one side inside a non-active face of the other
        for d in h.darts() {
            if !self.is_m1(d) && !self.m1.is_active(face1[gd(d)]) {
                return None;
            }
            if !self.is_m2(d) && !self.m2.is_active(face2[gd(d)]) {
                return None;
            }
        }
        for (&v, &u) in iso_unit {
            let in1 = v < self.nv1;
            let in2 = self.rev_v2[v].is_some();
            if in1 && !in2 && !self.m2.is_active(face2[group[u]]) {
                return None;
            }
            if in2 && !in1 && !self.m1.is_active(face1[group[u]]) {
                return None;
            }
        }
        let mut g = h.clone();
        g.active = (0..ngroups)
            .map(|x| self.m1.is_active(face1[x]) && self.m2.is_active(face2[x]))
            .collect();
        for (i, w) in walks.iter().enumerate() {
            for &d in w {
                g.face[d] = group[i];
            }
        }
        for (&v, &u) in iso_unit {
            g.iso_face[v] = group[u];
        }
        Some(g.compacted())
    }
}

struct PlaceCtx<'c> {
    unit_comp: &'c [usize],
    comp_units: &'c [Vec<usize>],
    lab1: &'c [Option<usize>],
    lab2: &'c [Option<usize>],
    others: &'c [usize],
    root: usize,
}

fn try_host(host: &mut [Option<usize>], k: usize, f: usize, trail: &mut Vec<usize>) -> bool {
    match host[k] {
        Some(g) => g == f,
        None => {
            host[k] = Some(f);
            trail.push(k);
            true
        }
    }
}

/// Records the hosting faces implied by one rotation; false on a conflict.
fn host_rotation(
    seq: &[usize],
    c: &Corners,
    iso1: Option<usize>,
    iso2: Option<usize>,
    host: &mut [Option<usize>],
    trail: &mut Vec<usize>,
) -> bool {
    let len = seq.len();
    for (j, &y) in seq.iter().enumerate() {
        if c.key[y] == usize::MAX {
            continue;
        }
        let prev = (1..=len).map(|s| seq[(j + len - s) % len]);
        let f = if is_side2(c, y) {
            prev.filter(|&d| !is_side2(c, d)).map(|d| c.corner1[d]).next().unwrap_or(iso1)
        } else {
            prev.filter(|&d| !is_side1(c, d)).map(|d| c.corner2[d]).next().unwrap_or(iso2)
        };
        match f {
            Some(f) if try_host(host, c.key[y], f, trail) => {}
            _ => return false,
        }
    }
    true
}

fn is_side1(c: &Corners, d: usize) -> bool {
    c.key[d] != usize::MAX && !c.side2[d]
}

fn is_side2(c: &Corners, d: usize) -> bool {
    c.side2[d]
}

/// Cyclic sequences over `p ∪ q` restricting to `p` and `q`. A dart private
/// to one side must sit in an active corner of the other, and the pieces it
/// enters keep one hosting face; `iso1`/`iso2` give the face around an empty
/// side. Generation stops after `limit` sequences.
pub(crate) fn cyclic_merges(
    p: &[usize],
    q: &[usize],
    c: &Corners,
    iso1: Option<usize>,
    iso2: Option<usize>,
    host: &mut [Option<usize>],
    limit: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if p.is_empty() || q.is_empty() {
        let seq = if p.is_empty() { q } else { p };
        let mut trail = Vec::new();
        if seq.is_empty() || host_rotation(seq, c, iso1, iso2, host, &mut trail) {
            out.push(seq.to_vec());
        }
        for k in trail {
            host[k] = None;
        }
        return out;
    }
    let qs: BTreeSet<usize> = q.iter().copied().collect();
    let common: BTreeSet<usize> = p.iter().copied().filter(|x| qs.contains(x)).collect();
    let qrots: Vec<Vec<usize>> = if common.is_empty() {
        (0..q.len()).map(|r| (0..q.len()).map(|i| q[(r + i) % q.len()]).collect()).collect()
    } else {
        Vec::new()
    };
    let (mut pr, mut qr) = (Vec::new(), Vec::new());
    if let Some(&c0) = p.iter().find(|x| common.contains(x)) {
        let ip = p.iter().position(|&x| x == c0).unwrap();
        let iq = q.iter().position(|&x| x == c0).unwrap();
        pr = (1..p.len()).map(|i| p[(ip + i) % p.len()]).collect();
        qr = (1..q.len()).map(|i| q[(iq + i) % q.len()]).collect();
    }
    let mut st = MergeState {
        p: &[],
        q: &[],
        common: &common,
        c,
        host,
        seq: Vec::new(),
        out: &mut out,
        limit,
    };
    if !common.is_empty() {
        let pc: Vec<usize> = p.iter().copied().filter(|x| common.contains(x)).collect();
        let qc: Vec<usize> = q.iter().copied().filter(|x| common.contains(x)).collect();
        if !same_cycle(&pc, &qc) {
            return out;
        }
        let c0 = pc[0];
        st.p = &pr;
        st.q = &qr;
        st.seq = vec![c0];
        st.go(0, 0, c0, c0);
    } else {
        for qr in &qrots {
            let last_q = *qr.last().unwrap();
            // p[0] sits right after the last element of q
            let Some(f) = c.corner2[last_q] else { continue };
            let mut trail = Vec::new();
            if try_host(st.host, c.key[p[0]], f, &mut trail) {
                st.p = &p[1..];
                st.q = qr;
                st.seq = vec![p[0]];
                st.go(0, 0, p[0], last_q);
            }
            for k in trail {
                st.host[k] = None;
            }
        }
    }
    out
}

struct MergeState<'s> {
    p: &'s [usize],
    q: &'s [usize],
    common: &'s BTreeSet<usize>,
    c: &'s Corners,
    host: &'s mut [Option<usize>],
    seq: Vec<usize>,
    out: &'s mut Vec<Vec<usize>>,
    limit: usize,
}

impl MergeState<'_> {
    fn push(&mut self, x: usize, corner: Option<usize>, i: usize, j: usize, last_p: usize, last_q: usize) {
        let Some(f) = corner else { return };
        let k = self.c.key[x];
        let fresh = match self.host[k] {
            Some(g) if g != f => return,
            Some(_) => false,
            None => {
                self.host[k] = Some(f);
                true
            }
        };
        self.seq.push(x);
        self.go(i, j, last_p, last_q);
        self.seq.pop();
        if fresh {
            self.host[k] = None;
        }
    }

    fn go(&mut self, i: usize, j: usize, last_p: usize, last_q: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if i == self.p.len() && j == self.q.len() {
            self.out.push(self.seq.clone());
            return;
        }
        let pi = self.p.get(i).copied();
        let qj = self.q.get(j).copied();
        if let Some(x) = pi {
            if !self.common.contains(&x) {
                self.push(x, self.c.corner2[last_q], i + 1, j, x, last_q);
            }
        }
        if let Some(y) = qj {
            if !self.common.contains(&y) {
                self.push(y, self.c.corner1[last_p], i, j + 1, last_p, y);
            }
        }
        if let (Some(x), Some(y)) = (pi, qj) {
            if x == y {
                self.seq.push(x);
                self.go(i + 1, j + 1, x, x);
                self.seq.pop();
            }
        }
    }
}
