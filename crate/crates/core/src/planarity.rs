//! Planarity testing with embedding extraction.
//!
//! Blocks are embedded with the Demoucron–Malgrange–Pertuiset path-addition
//! algorithm; block rotations are concatenated at cut vertices. Parallel
//! edges are placed next to their first copy so that consecutive copies
//! bound digon faces, and self-loops bound monogon faces.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::graph::{biconnected_components, Graph};

/// Dart `2i` runs along `edges[i]` from its first to its second endpoint,
/// dart `2i + 1` in the opposite direction.
pub type Rotation = Vec<Vec<usize>>;

/// Returns a rotation system (per vertex, the cyclic order of outgoing darts)
/// realizing a sphere embedding of the multigraph, or `None` if it is not planar.
pub fn planar_rotation(n: usize, edges: &[(usize, usize)]) -> Option<Rotation> {
    let mut simple = Graph::new(n);
    let mut base: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut copies: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut loops: Vec<usize> = Vec::new();
    for (i, &(u, v)) in edges.iter().enumerate() {
        assert!(u < n && v < n, "edge endpoint out of range");
        if u == v {
            loops.push(i);
            continue;
        }
        let key = (u.min(v), u.max(v));
        match base.get(&key) {
            Some(&b) => copies.entry(b).or_default().push(i),
            None => {
                base.insert(key, i);
                simple.add_edge(u, v);
            }
        }
    }

    // cyclic neighbour order per vertex, built block by block
    let mut order: Vec<Vec<usize>> = vec![Vec::new(); n];
    for block in biconnected_components(&simple) {
        if block.edges.is_empty() {
            continue;
        }
        if block.edges.len() == 1 {
            let (a, b) = block.edges[0];
            order[a].push(b);
            order[b].push(a);
            continue;
        }
        let succ = embed_block(&block.vertices, &block.edges)?;
        for &v in &block.vertices {
            let local = &succ[&v];
            let start = *local.keys().next().unwrap();
            let mut w = start;
            loop {
                order[v].push(w);
                w = local[&w];
                if w == start {
                    break;
                }
            }
        }
    }

    let dart_from = |e: usize, from: usize| if edges[e].0 == from { 2 * e } else { 2 * e + 1 };
    let mut rot: Rotation = vec![Vec::new(); n];
    for v in 0..n {
        for &w in &order[v] {
            let key = (v.min(w), v.max(w));
            let b = base[&key];
            let extra = copies.get(&b).map(Vec::as_slice).unwrap_or(&[]);
            // the lower endpoint lists copies after the base dart, the upper one before it
            if v < w {
                rot[v].push(dart_from(b, v));
                rot[v].extend(extra.iter().map(|&c| dart_from(c, v)));
            } else {
                rot[v].extend(extra.iter().rev().map(|&c| dart_from(c, v)));
                rot[v].push(dart_from(b, v));
            }
        }
    }
    for &l in &loops {
        let v = edges[l].0;
        rot[v].push(2 * l);
        rot[v].push(2 * l + 1);
    }
    Some(rot)
}

pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    planar_rotation(n, edges).is_some()
}

/// Embeds a biconnected simple block; returns, per vertex, the rotation
/// successor map over its neighbours.
fn embed_block(
    vertices: &[usize],
    edges: &[(usize, usize)],
) -> Option<HashMap<usize, BTreeMap<usize, usize>>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    let m = edges.len();
    let cycle = find_cycle(vertices[0], &adj);
    let mut in_h: HashSet<usize> = cycle.iter().copied().collect();
    let mut embedded: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..cycle.len() {
        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        embedded.insert((a.min(b), a.max(b)));
    }
    let mut rev = cycle.clone();
    rev.reverse();
    let mut faces: Vec<Vec<usize>> = vec![cycle, rev];

    while embedded.len() < m {
        let frags = fragments(vertices, edges, &adj, &in_h, &embedded);
        let face_sets: Vec<HashSet<usize>> =
            faces.iter().map(|f| f.iter().copied().collect()).collect();
        let mut chosen: Option<(usize, usize)> = None;
        for (fi, frag) in frags.iter().enumerate() {
            let admissible: Vec<usize> = (0..faces.len())
                .filter(|&j| frag.attach.iter().all(|a| face_sets[j].contains(a)))
                .collect();
            match admissible.len() {
                0 => return None,
                1 => {
                    chosen = Some((fi, admissible[0]));
                    break;
                }
                _ => {
                    if chosen.is_none() {
                        chosen = Some((fi, admissible[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = chosen.expect("unembedded edges imply a fragment");
        let path = fragment_path(&frags[fi], &adj, &in_h);
        let face = faces.swap_remove(face_idx);
        let (f1, f2) = split_face(&face, &path);
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            embedded.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
        in_h.extend(path.iter().copied());
    }

    let mut succ: HashMap<usize, BTreeMap<usize, usize>> = HashMap::new();
    for f in &faces {
        let k = f.len();
        for i in 0..k {
            let p = f[i];
            let v = f[(i + 1) % k];
            let q = f[(i + 2) % k];
            succ.entry(v).or_default().insert(p, q);
        }
    }
    Some(succ)
}

fn find_cycle(start: usize, adj: &HashMap<usize, Vec<usize>>) -> Vec<usize> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut depth: HashMap<usize, usize> = HashMap::new();
    let mut stack = vec![(start, usize::MAX)];
    depth.insert(start, 0);
    let mut order = Vec::new();
    while let Some((v, p)) = stack.pop() {
        if order.contains(&v) {
            continue;
        }
        order.push(v);
        if p != usize::MAX {
            parent.insert(v, p);
            depth.insert(v, depth[&p] + 1);
        }
        for &w in &adj[&v] {
            if w == p {
                continue;
            }
            if order.contains(&w) {
                // back edge from v to an already visited vertex: walk up from v to w
                let mut cyc = vec![v];
                let mut x = v;
                let mut ok = true;
                while x != w {
                    match parent.get(&x) {
                        Some(&px) => {
                            x = px;
                            cyc.push(x);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && cyc.len() >= 3 {
                    return cyc;
                }
            } else {
                stack.push((w, v));
            }
        }
    }
    unreachable!("biconnected block with at least two edges has a cycle")
}

struct Fragment {
    attach: Vec<usize>,
    /// inner vertices (empty for a single chord edge)
    inner: HashSet<usize>,
    chord: Option<(usize, usize)>,
}

fn fragments(
    vertices: &[usize],
    edges: &[(usize, usize)],
    adj: &HashMap<usize, Vec<usize>>,
    in_h: &HashSet<usize>,
    embedded: &HashSet<(usize, usize)>,
) -> Vec<Fragment> {
    let mut out = Vec::new();
    for &(a, b) in edges {
        if in_h.contains(&a) && in_h.contains(&b) && !embedded.contains(&(a.min(b), a.max(b))) {
            out.push(Fragment {
                attach: vec![a, b],
                inner: HashSet::new(),
                chord: Some((a, b)),
            });
        }
    }
    let mut seen: HashSet<usize> = HashSet::new();
    for &v in vertices {
        if in_h.contains(&v) || seen.contains(&v) {
            continue;
        }
        let mut inner = HashSet::new();
        let mut attach = Vec::new();
        let mut queue = VecDeque::from([v]);
        seen.insert(v);
        while let Some(x) = queue.pop_front() {
            inner.insert(x);
            for &w in &adj[&x] {
                if in_h.contains(&w) {
                    if !attach.contains(&w) {
                        attach.push(w);
                    }
                } else if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        attach.sort_unstable();
        out.push(Fragment {
            attach,
            inner,
            chord: None,
        });
    }
    out
}

fn fragment_path(frag: &Fragment, adj: &HashMap<usize, Vec<usize>>, in_h: &HashSet<usize>) -> Vec<usize> {
    if let Some((a, b)) = frag.chord {
        return vec![a, b];
    }
    let a = frag.attach[0];
    // BFS from a through inner vertices until an inner vertex touches another attachment
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &w in &adj[&a] {
        if frag.inner.contains(&w) && !prev.contains_key(&w) {
            prev.insert(w, a);
            queue.push_back(w);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &w in &adj[&x] {
            if in_h.contains(&w) && w != a {
                let mut path = vec![w, x];
                let mut y = x;
                while prev[&y] != a {
                    y = prev[&y];
                    path.push(y);
                }
                path.push(a);
                path.reverse();
                return path;
            }
            if frag.inner.contains(&w) && !prev.contains_key(&w) {
                prev.insert(w, x);
                queue.push_back(w);
            }
        }
    }
    unreachable!("fragment of a biconnected block has two attachments")
}

fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = face.len();
    let a = path[0];
    let b = *path.last().unwrap();
    let i = face.iter().position(|&x| x == a).unwrap();
    let j = face.iter().position(|&x| x == b).unwrap();
    let inner = &path[1..path.len() - 1];
    let mut f1 = Vec::new();
    let mut t = i;
    loop {
        f1.push(face[t]);
        if t == j {
            break;
        }
        t = (t + 1) % k;
    }
    f1.extend(inner.iter().rev());
    let mut f2 = Vec::new();
    let mut t = j;
    loop {
        f2.push(face[t]);
        if t == i {
            break;
        }
        t = (t + 1) % k;
    }
    f2.extend(inner.iter());
    (f1, f2)
}
