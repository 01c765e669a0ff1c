//! Simple undirected graphs, PACE-style edge-list parsing, half-squares,
//! block decomposition and clique enumeration.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::ParseError;

pub type Vertex = usize;

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<BTreeSet<Vertex>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            g.add_edge(u, (u + 1) % n);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 1..n {
            g.add_edge(u - 1, u);
        }
        g
    }

    /// Adds `{u, v}`; returns false if it was already present.
    ///
    /// Panics on self-loops or out-of-range endpoints.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        assert!(u != v, "self-loop {u}");
        assert!(u < self.n() && v < self.n(), "edge ({u},{v}) out of range");
        let fresh = self.adj[u].insert(v);
        self.adj[v].insert(u);
        fresh
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj.get(u).is_some_and(|a| a.contains(&v))
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn is_clique(&self, vs: &[Vertex]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Subgraph induced by `keep`, relabelled to `0..keep.len()` in the given order.
    pub fn induced(&self, keep: &[Vertex]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let mut g = Graph::new(keep.len());
        for (i, &v) in keep.iter().enumerate() {
            for w in self.neighbors(v) {
                let j = index[w];
                if j != usize::MAX && i < j {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n()
    }

    /// Biconnected in the map-graph sense: connected and without cut vertices.
    /// Graphs with at most two vertices count as biconnected when connected.
    pub fn is_biconnected(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        self.n() <= 2 || biconnected_components(self).iter().filter(|b| !b.edges.is_empty()).count() == 1
    }

    /// PACE `.gr` text with 1-indexed vertices.
    pub fn to_pace(&self) -> String {
        let mut s = format!("p tw {} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{} {}", u + 1, v + 1);
        }
        s
    }
}

/// Parses the PACE `.gr` edge-list format (`p tw n m`, 1-indexed edge lines, `c` comments).
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match &mut graph {
            None => {
                if toks.len() != 4 || toks[0] != "p" || toks[1] != "tw" {
                    return Err(ParseError::at(line_no, "expected header `p tw <n> <m>`"));
                }
                let n = parse_num(toks[2], line_no)?;
                parse_num(toks[3], line_no)?;
                graph = Some(Graph::new(n));
            }
            Some(g) => {
                if toks.len() != 2 {
                    return Err(ParseError::at(line_no, "expected edge line `<u> <v>`"));
                }
                let u = parse_num(toks[0], line_no)?;
                let v = parse_num(toks[1], line_no)?;
                if u == 0 || v == 0 || u > g.n() || v > g.n() {
                    return Err(ParseError::at(line_no, format!("vertex id out of range in `{line}`")));
                }
                if u == v {
                    return Err(ParseError::at(line_no, format!("self-loop at vertex {u}")));
                }
                g.add_edge(u - 1, v - 1);
            }
        }
    }
    graph.ok_or_else(|| ParseError::at(0, "missing header line"))
}

pub(crate) fn parse_num(tok: &str, line_no: usize) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::at(line_no, format!("invalid number `{tok}`")))
}

/// Bipartite graph between `real_count` real vertices and a list of
/// intersection vertices, each given by its set of real neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteWitnessGraph {
    pub real_count: usize,
    pub intersections: Vec<Vec<Vertex>>,
}

impl BipartiteWitnessGraph {
    pub fn intersection_count(&self) -> usize {
        self.intersections.len()
    }

    pub fn total(&self) -> usize {
        self.real_count + self.intersections.len()
    }

    /// Edge list with intersection `i` numbered `real_count + i`.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for (i, nb) in self.intersections.iter().enumerate() {
            for &r in nb {
                out.push((r, self.real_count + i));
            }
        }
        out
    }
}

/// Real vertices adjacent iff they share an intersection neighbor.
pub fn half_square(w: &BipartiteWitnessGraph) -> Graph {
    let mut g = Graph::new(w.real_count);
    for nb in &w.intersections {
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if a != b {
                    g.add_edge(a, b);
                }
            }
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
}

/// Block decomposition. Every edge lies in exactly one block; isolated
/// vertices form trivial blocks. Returns blocks sorted by their vertex lists.
pub fn biconnected_components(g: &Graph) -> Vec<Block> {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut blocks = Vec::new();
    let mut edge_stack: Vec<(Vertex, Vertex)> = Vec::new();
    let adj: Vec<Vec<Vertex>> = (0..n).map(|v| g.neighbors(v).collect()).collect();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        if adj[root].is_empty() {
            disc[root] = timer;
            timer += 1;
            blocks.push(Block {
                vertices: vec![root],
                edges: vec![],
            });
            continue;
        }
        // iterative DFS: (vertex, parent, next neighbor index)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let w = adj[v][*idx];
                *idx += 1;
                if w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push((v, w));
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut edges = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            edges.push((e.0.min(e.1), e.0.max(e.1)));
                            if e == (p, v) {
                                break;
                            }
                        }
                        edges.sort_unstable();
                        let vertices: BTreeSet<Vertex> =
                            edges.iter().flat_map(|&(a, b)| [a, b]).collect();
                        blocks.push(Block {
                            vertices: vertices.into_iter().collect(),
                            edges,
                        });
                    }
                }
            }
        }
    }
    blocks.sort_by(|a, b| a.vertices.cmp(&b.vertices).then(a.edges.cmp(&b.edges)));
    blocks
}

/// Vertices shared by two or more blocks.
pub fn cut_vertices(blocks: &[Block]) -> Vec<Vertex> {
    let mut count = std::collections::BTreeMap::new();
    for b in blocks {
        for &v in &b.vertices {
            *count.entry(v).or_insert(0usize) += 1;
        }
    }
    count
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|(v, _)| v)
        .collect()
}

/// All cliques (not only maximal) with `min_size <= |C| <= max_size`,
/// each listed once as a sorted vertex list.
pub fn enumerate_cliques(g: &Graph, min_size: usize, max_size: usize) -> Vec<Vec<Vertex>> {
    assert!(2 <= min_size && min_size <= max_size);
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn extend(
        g: &Graph,
        current: &mut Vec<Vertex>,
        candidates: &[Vertex],
        min_size: usize,
        max_size: usize,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        if current.len() >= min_size {
            out.push(current.clone());
        }
        if current.len() == max_size {
            return;
        }
        for (i, &c) in candidates.iter().enumerate() {
            let next: Vec<Vertex> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(c, w))
                .collect();
            current.push(c);
            extend(g, current, &next, min_size, max_size, out);
            current.pop();
        }
    }
    let all: Vec<Vertex> = (0..g.n()).collect();
    extend(g, &mut current, &all, min_size, max_size, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

pub fn clique_number(g: &Graph) -> usize {
    if g.n() == 0 {
        return 0;
    }
    if g.m() == 0 {
        return 1;
    }
    enumerate_cliques(g, 2, g.n())
        .iter()
        .map(|c| c.len())
        .max()
        .unwrap_or(1)
}

/// All connected graphs on `n` vertices up to isomorphism, each in its
/// canonical labelling (the one whose edge mask is smallest). Meant for
/// exhaustive tests with small `n`.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 7, "exhaustive enumeration only for small n");
    let pairs: Vec<(Vertex, Vertex)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut index = vec![vec![0usize; n]; n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        index[a][b] = i;
        index[b][a] = i;
    }
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(Vertex, Vertex)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        let g = Graph::from_edges(n, &edges);
        if n > 0 && !g.is_connected() {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| edges.iter().fold(0u64, |m, &(a, b)| m | 1 << index[p[a]][p[b]]))
            .min()
            .unwrap_or(0);
        if canon == mask && seen.insert(canon) {
            out.push(g);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn parse_triangle() {
        let g = parse_graph("p tw 3 3\n1 2\n2 3\n1 3").unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn parse_isolated_and_duplicates() {
        let g = parse_graph("c hello\np tw 2 0\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 0));
        let g = parse_graph("p tw 3 2\n1 2\n1 2\n").unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn parse_errors_name_line() {
        let e = parse_graph("p tw 3 1\n1 4\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_graph("p tw 3 1\n2 2\n").unwrap_err();
        assert!(e.message.contains("self-loop"));
        let e = parse_graph("p td 3 1\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn half_square_small_cases() {
        let path = BipartiteWitnessGraph {
            real_count: 2,
            intersections: vec![vec![0, 1]],
        };
        assert_eq!(half_square(&path), Graph::complete(2));
        let star = BipartiteWitnessGraph {
            real_count: 3,
            intersections: vec![vec![0, 1, 2]],
        };
        assert_eq!(half_square(&star), Graph::complete(3));
    }

    #[test]
    fn cube_half_square_is_k4() {
        // Q_3 on bit strings; even-parity corners are reals.
        let even: Vec<usize> = (0..8).filter(|x: &usize| x.count_ones() % 2 == 0).collect();
        let odd: Vec<usize> = (0..8).filter(|x: &usize| x.count_ones() % 2 == 1).collect();
        let w = BipartiteWitnessGraph {
            real_count: 4,
            intersections: odd
                .iter()
                .map(|&o| {
                    even.iter()
                        .enumerate()
                        .filter(|&(_, &e)| (e ^ o).count_ones() == 1)
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect(),
        };
        // brute-force distance-2 check on the cube itself
        for (i, &a) in even.iter().enumerate() {
            for (j, &b) in even.iter().enumerate() {
                if i < j {
                    assert_eq!((a ^ b).count_ones(), 2);
                }
            }
        }
        assert_eq!(half_square(&w), Graph::complete(4));
    }

    #[test]
    fn blocks() {
        assert_eq!(biconnected_components(&Graph::complete(3)).len(), 1);
        let bowtie = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]);
        let b = biconnected_components(&bowtie);
        assert_eq!(b.len(), 2);
        assert_eq!(cut_vertices(&b), vec![2]);
        let p = biconnected_components(&Graph::path(3));
        assert_eq!(p.len(), 2);
        assert_eq!(cut_vertices(&p), vec![1]);
        let iso = biconnected_components(&Graph::new(2));
        assert_eq!(iso.len(), 2);
        assert!(!bowtie.is_biconnected());
        assert!(Graph::cycle(5).is_biconnected());
    }

    #[test]
    fn cliques() {
        assert_eq!(enumerate_cliques(&Graph::complete(3), 2, 3).len(), 4);
        assert_eq!(enumerate_cliques(&Graph::cycle(4), 2, 4).len(), 4);
        assert_eq!(enumerate_cliques(&Graph::complete(4), 3, 3).len(), 4);
        assert_eq!(clique_number(&Graph::complete(5)), 5);
    }

    proptest::proptest! {
        #[test]
        fn half_square_matches_pairwise(
            real in 1usize..7,
            inter in proptest::collection::vec(proptest::collection::btree_set(0usize..7, 1..4), 0..6)
        ) {
            let inter: Vec<Vec<usize>> = inter
                .into_iter()
                .map(|s| s.into_iter().filter(|&x| x < real).collect::<Vec<_>>())
                .collect();
            let w = BipartiteWitnessGraph { real_count: real, intersections: inter.clone() };
            let h = half_square(&w);
            for a in 0..real {
                proptest::prop_assert!(!h.has_edge(a, a));
                for b in 0..real {
                    let share = a != b && inter.iter().any(|s| s.contains(&a) && s.contains(&b));
                    proptest::prop_assert_eq!(h.has_edge(a, b), share);
                }
            }
        }

        #[test]
        fn blocks_partition_edges(edges in proptest::collection::vec((0usize..8, 0usize..8), 0..16)) {
            let mut g = Graph::new(8);
            for (a, b) in edges { if a != b { g.add_edge(a, b); } }
            let blocks = biconnected_components(&g);
            let mut all: Vec<_> = blocks.iter().flat_map(|b| b.edges.clone()).collect();
            all.sort_unstable();
            proptest::prop_assert_eq!(all, g.edges().collect::<Vec<_>>());
            for (i, x) in blocks.iter().enumerate() {
                for y in &blocks[i + 1..] {
                    let shared = x.vertices.iter().filter(|v| y.vertices.contains(v)).count();
                    proptest::prop_assert!(shared <= 1);
                }
            }
        }
    }
}
