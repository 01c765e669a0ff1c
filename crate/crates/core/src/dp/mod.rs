//! Dynamic programming over a nice tree decomposition.
//!
//! Every node keeps a record: one entry per distinct sketch of a compact
//! partial witness of the graph seen so far, with two flags telling whether
//! the entry may still lead to a k-map witness and to a hole-free one. In
//! decision mode entries hold sketches only; in certificate mode each entry
//! carries a full partial witness and is keyed by that witness's sketch, so
//! the surviving entry at the root is a certificate.

mod introduce;
mod merge;

use std::collections::{BTreeMap, BTreeSet};

use log::debug;

use crate::embed::{EmbeddedGraph, VertexKind};
use crate::error::{Error, Result};
use crate::graph::{biconnected_components, Graph};
use crate::sketch::{
    active_boundaries_ok, collect_garbage, compute_sketch, dedup_nonextensible, is_anchor, retire_all, retire_faces,
    shortcut_vertex,
};
use crate::treedecomp::{compute_td, make_nice, NiceTreeDecomposition, NodeKind, TreeDecomposition};
use crate::witness::{compactify_map, first_inessential, remove_vertex_merging, twin_pair_where, Witness};

pub(crate) use merge::merge_maps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Sketches only.
    #[default]
    Decision,
    /// Entries carry partial witnesses; a yes comes with a witness.
    Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub k: usize,
    pub hole_free: bool,
    pub mode: Mode,
    /// Keep entries outside the requested subrecord and ignore `k` while
    /// generating (the full record).
    pub keep_all: bool,
}

impl RunOptions {
    pub fn new(k: usize) -> Self {
        RunOptions {
            k,
            hole_free: false,
            mode: Mode::Decision,
            keep_all: false,
        }
    }

    pub fn hole_free(mut self, on: bool) -> Self {
        self.hole_free = on;
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn keep_all(mut self, on: bool) -> Self {
        self.keep_all = on;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Leaf,
    Introduce { child: usize },
    Forget { child: usize },
    Join { left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct Entry {
    /// Sketch, or the carried partial witness in certificate mode.
    pub map: EmbeddedGraph,
    pub kmap: bool,
    pub hole_free: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default)]
pub struct Record {
    pub bag: BTreeSet<usize>,
    /// Entries sorted by canonical sketch key.
    pub entries: Vec<(Vec<i64>, Entry)>,
}

impl Record {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> BTreeSet<Vec<i64>> {
        self.entries.iter().map(|(k, _)| k.clone()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub nodes: usize,
    pub max_record: usize,
    pub total_entries: usize,
    pub max_sketch_vertices: usize,
    pub width: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub accepted: bool,
    pub witness: Option<Witness>,
    pub stats: RunStats,
}

/// Runs the recognizer on one nice decomposition of `g`.
pub struct Engine<'a> {
    g: &'a Graph,
    opts: RunOptions,
    /// Records per node, filled as nodes are processed.
    pub records: Vec<Option<Record>>,
    pub stats: RunStats,
    /// Keep records of processed children instead of freeing them.
    pub retain: bool,
}

impl<'a> Engine<'a> {
    pub fn new(g: &'a Graph, opts: RunOptions) -> Self {
        Engine {
            g,
            opts,
            records: Vec::new(),
            stats: RunStats::default(),
            retain: false,
        }
    }

    fn certificate(&self) -> bool {
        self.opts.mode == Mode::Certificate
    }

    fn relevant(&self, e: &Entry) -> bool {
        if self.opts.hole_free {
            e.hole_free
        } else {
            e.kmap
        }
    }

    fn k_cap(&self) -> usize {
        if self.opts.keep_all {
            usize::MAX
        } else {
            self.opts.k
        }
    }

    fn max_degree(map: &EmbeddedGraph) -> usize {
        map.vertices()
            .filter(|&x| map.is_intersection(x))
            .map(|x| map.degree(x))
            .max()
            .unwrap_or(0)
    }

    /// Retires faces with fewer than two anchors, then brings the map into
    /// normal form and computes its key. Returns the updated hole-free flag.
    fn normalize(&self, mut m: EmbeddedGraph, bag: &BTreeSet<usize>, mut hf: bool) -> (Vec<i64>, EmbeddedGraph, bool) {
        let lone_anchor = m.vertex_count() == 1 && m.edge_count() == 0 && m.vertices().all(|x| is_anchor(&m, x, bag));
        if !lone_anchor && !retire_faces(&mut m, |g, x| is_anchor(g, x, bag)) {
            hf = false;
        }
        if self.certificate() {
            let s = compute_sketch(&m, bag, self.opts.hole_free);
            if self.opts.hole_free && !active_boundaries_ok(&s.map) {
                hf = false;
            }
            (s.key(), m.compacted(), hf)
        } else {
            if self.opts.hole_free && !active_boundaries_ok(&m) {
                hf = false;
            }
            collect_garbage(&mut m);
            dedup_nonextensible(&mut m, self.opts.hole_free);
            let m = m.compacted();
            (m.canonical_key(self.opts.hole_free), m, hf)
        }
    }

    fn insert(&self, out: &mut BTreeMap<Vec<i64>, Entry>, key: Vec<i64>, e: Entry) {
        if !self.opts.keep_all && !self.relevant(&e) {
            return;
        }
        match out.get_mut(&key) {
            None => {
                out.insert(key, e);
            }
            Some(old) => {
                if self.certificate() {
                    let rank = |x: &Entry| (self.relevant(x), x.hole_free, x.kmap);
                    if rank(&e) > rank(old) {
                        *old = e;
                    }
                } else {
                    old.kmap |= e.kmap;
                    old.hole_free |= e.hole_free;
                }
            }
        }
    }

    fn finish(&mut self, bag: &BTreeSet<usize>, out: BTreeMap<Vec<i64>, Entry>) -> Record {
        let entries: Vec<(Vec<i64>, Entry)> = out.into_iter().collect();
        self.stats.nodes += 1;
        self.stats.max_record = self.stats.max_record.max(entries.len());
        self.stats.total_entries += entries.len();
        for (_, e) in &entries {
            let vc = if self.certificate() {
                compute_sketch(&e.map, bag, self.opts.hole_free).vertex_count()
            } else {
                e.map.vertex_count()
            };
            self.stats.max_sketch_vertices = self.stats.max_sketch_vertices.max(vc);
        }
        Record {
            bag: bag.clone(),
            entries,
        }
    }

    pub fn leaf(&mut self, v: usize) -> Record {
        let mut m = EmbeddedGraph::new();
        let f = m.new_face(true);
        m.add_vertex(VertexKind::Real(v), f);
        let bag: BTreeSet<usize> = [v].into();
        let (key, m, _) = self.normalize(m, &bag, true);
        let mut out = BTreeMap::new();
        self.insert(
            &mut out,
            key,
            Entry {
                map: m,
                kmap: true,
                hole_free: true,
                provenance: Provenance::Leaf,
            },
        );
        self.finish(&bag, out)
    }

    pub fn forget(&mut self, child: &Record, v: usize, bag: &BTreeSet<usize>) -> Record {
        let mut out = BTreeMap::new();
        for (i, (_, e)) in child.entries.iter().enumerate() {
            let mut m = e.map.clone();
            if !self.certificate() {
                if let Some(vid) = m.find_real(v) {
                    let ints: Vec<usize> = m.neighbors(vid).into_iter().filter(|&x| m.is_intersection(x)).collect();
                    shortcut_vertex(&mut m, vid);
                    let mut seen = BTreeSet::new();
                    for x in ints {
                        if seen.insert(x) && m.v_alive[x] {
                            shortcut_vertex(&mut m, x);
                        }
                    }
                }
            }
            let (key, m, hf) = self.normalize(m, bag, e.hole_free);
            self.insert(
                &mut out,
                key,
                Entry {
                    map: m,
                    kmap: e.kmap,
                    hole_free: hf,
                    provenance: Provenance::Forget { child: i },
                },
            );
        }
        self.finish(bag, out)
    }

    pub fn introduce(&mut self, child: &Record, v: usize, bag: &BTreeSet<usize>) -> Record {
        let nbrs: BTreeSet<usize> = self.g.neighbors(v).filter(|w| child.bag.contains(w)).collect();
        let mut out = BTreeMap::new();
        for (i, (_, e)) in child.entries.iter().enumerate() {
            for m in introduce::introduce(&e.map, v, &nbrs, self.g, self.k_cap(), self.certificate()) {
                let kmap = e.kmap && Self::max_degree(&m) <= self.opts.k;
                let (key, m, hf) = self.normalize(m, bag, e.hole_free && kmap);
                self.insert(
                    &mut out,
                    key,
                    Entry {
                        map: m,
                        kmap,
                        hole_free: hf,
                        provenance: Provenance::Introduce { child: i },
                    },
                );
            }
        }
        self.finish(bag, out)
    }

    pub fn join(&mut self, left: &Record, right: &Record, bag: &BTreeSet<usize>) -> Record {
        let mut out = BTreeMap::new();
        for (i, (_, a)) in left.entries.iter().enumerate() {
            for (j, (_, b)) in right.entries.iter().enumerate() {
                for mut m in merge_maps(&a.map, &b.map, bag) {
                    if self.certificate() {
                        compactify_map(&mut m);
                    } else {
                        compactify_sketch(&mut m);
                    }
                    let kmap = a.kmap && b.kmap && Self::max_degree(&m) <= self.opts.k;
                    let (key, m, hf) = self.normalize(m, bag, a.hole_free && b.hole_free && kmap);
                    self.insert(
                        &mut out,
                        key,
                        Entry {
                            map: m,
                            kmap,
                            hole_free: hf,
                            provenance: Provenance::Join { left: i, right: j },
                        },
                    );
                }
            }
        }
        self.finish(bag, out)
    }

    /// Processes every node bottom-up and decides at the root.
    pub fn run(&mut self, ntd: &NiceTreeDecomposition) -> Outcome {
        self.stats.width = ntd.width();
        self.records = vec![None; ntd.nodes.len()];
        let Some(root) = ntd.root else {
            return Outcome {
                accepted: !self.opts.hole_free,
                witness: Some(Witness::new(EmbeddedGraph::new())),
                stats: self.stats.clone(),
            };
        };
        for id in ntd.postorder() {
            let node = &ntd.nodes[id];
            let rec = match node.kind {
                NodeKind::Leaf(v) => self.leaf(v),
                NodeKind::Introduce(v) => {
                    let c = self.take(node.children[0]);
                    let r = self.introduce(&c, v, &node.bag);
                    self.give_back(node.children[0], c);
                    r
                }
                NodeKind::Forget(v) => {
                    let c = self.take(node.children[0]);
                    let r = self.forget(&c, v, &node.bag);
                    self.give_back(node.children[0], c);
                    r
                }
                NodeKind::Join => {
                    let a = self.take(node.children[0]);
                    let b = self.take(node.children[1]);
                    let r = self.join(&a, &b, &node.bag);
                    self.give_back(node.children[0], a);
                    self.give_back(node.children[1], b);
                    r
                }
            };
            debug!("node {id} {:?}: {} entries", node.kind, rec.len());
            self.records[id] = Some(rec);
        }
        let rec = self.records[root].clone().unwrap_or_default();
        let mut witness = None;
        let mut accepted = false;
        for (_, e) in &rec.entries {
            if !self.relevant(e) {
                continue;
            }
            let mut m = e.map.clone();
            let complete = retire_all(&mut m);
            if self.opts.hole_free && !complete {
                continue;
            }
            accepted = true;
            if self.certificate() {
                witness = Some(Witness::new(m.compacted()));
            }
            break;
        }
        Outcome {
            accepted,
            witness,
            stats: self.stats.clone(),
        }
    }

    fn take(&mut self, id: usize) -> Record {
        if self.retain {
            self.records[id].clone().unwrap_or_default()
        } else {
            self.records[id].take().unwrap_or_default()
        }
    }

    fn give_back(&mut self, id: usize, r: Record) {
        if self.retain {
            self.records[id] = Some(r);
        }
    }
}

/// Removes inessential intersection vertices and twin-pairs visible in a
/// sketch (twin-pairs only around active faces, the others may hide parts of
/// the witness).
pub(crate) fn compactify_sketch(m: &mut EmbeddedGraph) {
    loop {
        if let Some(u) = first_inessential(m) {
            remove_vertex_merging(m, u);
        } else if let Some((_, b)) = twin_pair_where(m, true) {
            remove_vertex_merging(m, b);
        } else {
            break;
        }
    }
}

/// Runs the recognizer on `g` with a given nice decomposition.
pub fn run(g: &Graph, ntd: &NiceTreeDecomposition, opts: &RunOptions) -> Result<Outcome> {
    if opts.k == 0 {
        return Err(Error::InvalidK(opts.k));
    }
    ntd.validate(g)?;
    if opts.hole_free && !g.is_biconnected() {
        return Ok(Outcome::default());
    }
    Ok(Engine::new(g, opts.clone()).run(ntd))
}

/// Top-level recognition: splits into blocks (hole-free graphs must be
/// biconnected), runs each block and glues block witnesses at cut vertices.
pub fn recognize(g: &Graph, td: Option<&TreeDecomposition>, opts: &RunOptions) -> Result<Outcome> {
    if opts.k == 0 {
        return Err(Error::InvalidK(opts.k));
    }
    if let Some(td) = td {
        td.validate(g)?;
    }
    let n = g.n();
    if opts.hole_free {
        if n <= 1 || !g.is_biconnected() {
            return Ok(Outcome::default());
        }
        let td = td.cloned().unwrap_or_else(|| compute_td(g));
        return Ok(Engine::new(g, opts.clone()).run(&make_nice(&td)));
    }
    let blocks = biconnected_components(g);
    let mut stats = RunStats::default();
    let mut parts: Vec<(Vec<usize>, Witness)> = Vec::new();
    for b in &blocks {
        let sub = g.induced(&b.vertices);
        let btd = match td {
            Some(t) => t.restrict(&b.vertices),
            None => compute_td(&sub),
        };
        let out = Engine::new(&sub, opts.clone()).run(&make_nice(&btd));
        stats.nodes += out.stats.nodes;
        stats.total_entries += out.stats.total_entries;
        stats.max_record = stats.max_record.max(out.stats.max_record);
        stats.max_sketch_vertices = stats.max_sketch_vertices.max(out.stats.max_sketch_vertices);
        stats.width = stats.width.max(out.stats.width);
        if !out.accepted {
            return Ok(Outcome {
                accepted: false,
                witness: None,
                stats,
            });
        }
        if let Some(w) = out.witness {
            parts.push((b.vertices.clone(), w));
        }
    }
    let witness = if opts.mode == Mode::Certificate {
        Some(glue(n, &parts)?)
    } else {
        None
    };
    Ok(Outcome {
        accepted: true,
        witness,
        stats,
    })
}

/// Unites block witnesses (with block-local labels) into a witness of the
/// whole graph.
fn glue(n: usize, parts: &[(Vec<usize>, Witness)]) -> Result<Witness> {
    if parts.len() == 1 && parts[0].0.iter().copied().eq(0..n) {
        return Ok(parts[0].1.clone());
    }
    let mut inter: Vec<Vec<usize>> = Vec::new();
    for (verts, w) in parts {
        for nb in w.neighborhoods() {
            inter.push(nb.into_iter().map(|l| verts[l]).collect());
        }
    }
    let reals: Vec<usize> = (0..n).collect();
    let mut m = EmbeddedGraph::embed_witness(&reals, &inter)
        .ok_or_else(|| Error::Certificate("glued block witnesses are not planar".into()))?;
    compactify_map(&mut m);
    Ok(Witness::new(m.compacted()))
}

/// Smallest `k` accepted: binary search over `[1, t + 1]`, then a probe at
/// `n - 1` (and a search above `t + 1`) if nothing in range is accepted.
pub fn min_k(g: &Graph, td: Option<&TreeDecomposition>, hole_free: bool, mode: Mode) -> Result<Option<(usize, Outcome)>> {
    let td_owned;
    let td = match td {
        Some(t) => t,
        None => {
            td_owned = compute_td(g);
            &td_owned
        }
    };
    let t = td.width();
    let probe = |k: usize| recognize(g, Some(td), &RunOptions::new(k).hole_free(hole_free).mode(mode));
    let search = |mut lo: usize, mut hi: usize, mut best: Outcome| -> Result<(usize, Outcome)> {
        // invariant: hi accepted, everything below lo rejected
        while lo < hi {
            let mid = (lo + hi) / 2;
            let out = probe(mid)?;
            if out.accepted {
                hi = mid;
                best = out;
            } else {
                lo = mid + 1;
            }
        }
        Ok((hi, best))
    };
    let top = t + 1;
    let out = probe(top)?;
    if out.accepted {
        return search(1, top, out).map(Some);
    }
    let far = g.n().saturating_sub(1);
    if far > top {
        let out = probe(far)?;
        if out.accepted {
            return search(top + 1, far, out).map(Some);
        }
    }
    Ok(None)
}
