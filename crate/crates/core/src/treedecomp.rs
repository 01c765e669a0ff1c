//! Tree decompositions: PACE `.td` parsing, validation, conversion to nice
//! form and a fallback construction from elimination orderings.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{ParseError, TdError};
use crate::graph::{parse_num, Graph};

/// Exact treewidth is computed up to this many vertices.
pub const EXACT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<usize>>,
    pub tree: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bag_cap().saturating_sub(1)
    }

    pub fn bag_cap(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Checks that the bags form a tree decomposition of `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), TdError> {
        let nb = self.bags.len();
        for (i, b) in self.bags.iter().enumerate() {
            if let Some(&v) = b.iter().find(|&&v| v >= g.n()) {
                return Err(TdError::VertexOutOfRange(i, v));
            }
        }
        if nb == 0 {
            return match g.n() {
                0 => Ok(()),
                _ => Err(TdError::MissingVertex(0)),
            };
        }
        if self.tree.len() + 1 != nb {
            return Err(TdError::NotATree(format!("{} bags but {} tree edges", nb, self.tree.len())));
        }
        let adj = self.adjacency()?;
        let mut seen = vec![false; nb];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(b) = queue.pop_front() {
            for &c in &adj[b] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(TdError::NotATree("tree edges do not connect all bags".into()));
        }
        for v in 0..g.n() {
            let holders: Vec<usize> = (0..nb).filter(|&b| self.bags[b].contains(&v)).collect();
            if holders.is_empty() {
                return Err(TdError::MissingVertex(v));
            }
            let mut reach = vec![false; nb];
            let mut queue = VecDeque::from([holders[0]]);
            reach[holders[0]] = true;
            while let Some(b) = queue.pop_front() {
                for &c in &adj[b] {
                    if !reach[c] && self.bags[c].contains(&v) {
                        reach[c] = true;
                        queue.push_back(c);
                    }
                }
            }
            if holders.iter().any(|&b| !reach[b]) {
                return Err(TdError::Disconnected(v));
            }
        }
        for (u, v) in g.edges() {
            if !self.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
                return Err(TdError::UncoveredEdge(u, v));
            }
        }
        Ok(())
    }

    fn adjacency(&self) -> Result<Vec<Vec<usize>>, TdError> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree {
            if a >= self.bags.len() || b >= self.bags.len() || a == b {
                return Err(TdError::NotATree(format!("bad tree edge ({}, {})", a + 1, b + 1)));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(adj)
    }

    /// Keeps only the vertices in `keep`, renumbered by their position in it.
    pub fn restrict(&self, keep: &[usize]) -> TreeDecomposition {
        let bags = self
            .bags
            .iter()
            .map(|b| keep.iter().enumerate().filter(|(_, v)| b.contains(v)).map(|(i, _)| i).collect())
            .collect();
        TreeDecomposition {
            bags,
            tree: self.tree.clone(),
        }
    }

    pub fn to_pace(&self, n: usize) -> String {
        let mut out = format!("s td {} {} {}\n", self.bags.len(), self.bag_cap(), n);
        for (i, b) in self.bags.iter().enumerate() {
            out.push_str(&format!("b {}", i + 1));
            for v in b {
                out.push_str(&format!(" {}", v + 1));
            }
            out.push('\n');
        }
        for &(a, b) in &self.tree {
            out.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        out
    }
}

/// Parses a PACE `.td` file and validates it against `g`.
pub fn parse_td(text: &str, g: &Graph) -> Result<TreeDecomposition, TdError> {
    let mut bags: Vec<BTreeSet<usize>> = Vec::new();
    let mut filled: Vec<bool> = Vec::new();
    let mut tree = Vec::new();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() || toks[0] == "c" {
            continue;
        }
        match toks[0] {
            "s" => {
                if header {
                    return Err(ParseError::at(ln, "duplicate header").into());
                }
                if toks.len() != 5 || toks[1] != "td" {
                    return Err(ParseError::at(ln, "expected `s td <bags> <width+1> <n>`").into());
                }
                let nb = parse_num(toks[2], ln)?;
                parse_num(toks[3], ln)?;
                let n = parse_num(toks[4], ln)?;
                if n != g.n() {
                    return Err(ParseError::at(ln, format!("decomposition is for {n} vertices, graph has {}", g.n())).into());
                }
                bags = vec![BTreeSet::new(); nb];
                filled = vec![false; nb];
                header = true;
            }
            "b" => {
                if !header {
                    return Err(ParseError::at(ln, "bag before header").into());
                }
                if toks.len() < 2 {
                    return Err(ParseError::at(ln, "missing bag id").into());
                }
                let id = parse_num(toks[1], ln)?;
                if id == 0 || id > bags.len() {
                    return Err(ParseError::at(ln, format!("bag id {id} out of range")).into());
                }
                if filled[id - 1] {
                    return Err(ParseError::at(ln, format!("bag {id} listed twice")).into());
                }
                filled[id - 1] = true;
                for t in &toks[2..] {
                    let v = parse_num(t, ln)?;
                    if v == 0 || v > g.n() {
                        return Err(TdError::VertexOutOfRange(id - 1, v));
                    }
                    bags[id - 1].insert(v - 1);
                }
            }
            _ => {
                if !header {
                    return Err(ParseError::at(ln, "tree edge before header").into());
                }
                if toks.len() != 2 {
                    return Err(ParseError::at(ln, "expected two bag ids").into());
                }
                let a = parse_num(toks[0], ln)?;
                let b = parse_num(toks[1], ln)?;
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(ParseError::at(ln, "tree edge refers to unknown bag").into());
                }
                tree.push((a - 1, b - 1));
            }
        }
    }
    if !header {
        return Err(ParseError::at(0, "missing header").into());
    }
    let td = TreeDecomposition { bags, tree };
    td.validate(g)?;
    Ok(td)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(usize),
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NodeKind,
    pub bag: BTreeSet<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: Option<usize>,
}

impl NiceTreeDecomposition {
    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// Node ids with children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let Some(root) = self.root else { return out };
        let mut stack = vec![(root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                out.push(v);
                continue;
            }
            stack.push((v, true));
            for &c in self.nodes[v].children.iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Node type rules, single-vertex root, and the plain decomposition
    /// conditions for `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), TdError> {
        let Some(root) = self.root else {
            return if g.n() == 0 { Ok(()) } else { Err(TdError::MissingVertex(0)) };
        };
        if self.nodes[root].bag.len() != 1 {
            return Err(TdError::NotNice("root bag must hold exactly one vertex".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let kids: Vec<&NiceNode> = n.children.iter().map(|&c| &self.nodes[c]).collect();
            let ok = match n.kind {
                NodeKind::Leaf(v) => kids.is_empty() && n.bag.len() == 1 && n.bag.contains(&v),
                NodeKind::Introduce(v) => {
                    kids.len() == 1 && !kids[0].bag.contains(&v) && {
                        let mut b = kids[0].bag.clone();
                        b.insert(v);
                        b == n.bag
                    }
                }
                NodeKind::Forget(v) => {
                    kids.len() == 1 && !n.bag.contains(&v) && {
                        let mut b = n.bag.clone();
                        b.insert(v);
                        b == kids[0].bag
                    }
                }
                NodeKind::Join => kids.len() == 2 && kids.iter().all(|k| k.bag == n.bag),
            };
            if !ok {
                return Err(TdError::NotNice(format!("node {i} ({:?})", n.kind)));
            }
        }
        let plain = self.as_plain();
        plain.validate(g)
    }

    pub fn as_plain(&self) -> TreeDecomposition {
        let mut tree = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                tree.push((i, c));
            }
        }
        TreeDecomposition {
            bags: self.nodes.iter().map(|n| n.bag.clone()).collect(),
            tree,
        }
    }

    fn push(&mut self, kind: NodeKind, bag: BTreeSet<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    /// Chain from `node` (or nothing) to a node whose bag is exactly `target`.
    fn adapt(&mut self, node: Option<usize>, target: &BTreeSet<usize>) -> Option<usize> {
        let mut cur = node;
        let mut bag = node.map(|n| self.nodes[n].bag.clone()).unwrap_or_default();
        let drop: Vec<usize> = bag.difference(target).copied().collect();
        for v in drop {
            if bag.len() == 1 {
                // keep a vertex until something else has been introduced
                break;
            }
            bag.remove(&v);
            cur = Some(self.push(NodeKind::Forget(v), bag.clone(), vec![cur.unwrap()]));
        }
        for &v in target {
            if bag.contains(&v) {
                continue;
            }
            match cur {
                None => {
                    bag.insert(v);
                    cur = Some(self.push(NodeKind::Leaf(v), bag.clone(), Vec::new()));
                }
                Some(c) => {
                    bag.insert(v);
                    cur = Some(self.push(NodeKind::Introduce(v), bag.clone(), vec![c]));
                }
            }
        }
        let leftover: Vec<usize> = bag.difference(target).copied().collect();
        for v in leftover {
            bag.remove(&v);
            cur = Some(self.push(NodeKind::Forget(v), bag.clone(), vec![cur.unwrap()]));
        }
        cur
    }
}

/// Converts a valid decomposition into nice form rooted at bag 0, with the
/// root reduced to its smallest vertex. Empty bags are bridged by passing the
/// single nonempty child subtree through.
pub fn make_nice(td: &TreeDecomposition) -> NiceTreeDecomposition {
    let mut nice = NiceTreeDecomposition::default();
    if td.bags.is_empty() {
        return nice;
    }
    let nb = td.bags.len();
    let mut adj = vec![Vec::new(); nb];
    for &(a, b) in &td.tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    // iterative postorder from bag 0
    let mut parent = vec![usize::MAX; nb];
    let mut order = Vec::with_capacity(nb);
    let mut stack = vec![0usize];
    let mut seen = vec![false; nb];
    seen[0] = true;
    while let Some(b) = stack.pop() {
        order.push(b);
        for &c in &adj[b] {
            if !seen[c] {
                seen[c] = true;
                parent[c] = b;
                stack.push(c);
            }
        }
    }
    let mut built: Vec<Option<usize>> = vec![None; nb];
    for &b in order.iter().rev() {
        let bag = &td.bags[b];
        let kids: Vec<usize> = adj[b].iter().copied().filter(|&c| parent[c] == b).filter_map(|c| built[c]).collect();
        if bag.is_empty() {
            built[b] = kids.first().copied();
            continue;
        }
        let mut adapted: Vec<usize> = kids.into_iter().filter_map(|k| nice.adapt(Some(k), bag)).collect();
        if adapted.is_empty() {
            adapted.push(nice.adapt(None, bag).unwrap());
        }
        let mut cur = adapted[0];
        for &other in &adapted[1..] {
            cur = nice.push(NodeKind::Join, bag.clone(), vec![cur, other]);
        }
        built[b] = Some(cur);
    }
    if let Some(top) = built[0] {
        let keep: BTreeSet<usize> = nice.nodes[top].bag.iter().take(1).copied().collect();
        nice.root = nice.adapt(Some(top), &keep);
    }
    nice
}

/// Decomposition from an elimination ordering.
pub fn from_elimination_order(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition {
            bags: Vec::new(),
            tree: Vec::new(),
        };
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut higher: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    for &v in order {
        let nb: BTreeSet<usize> = adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        for &a in &nb {
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        let mut bag = nb.clone();
        bag.insert(v);
        bags.push(bag);
        higher.push(nb);
    }
    let mut tree = Vec::new();
    let mut roots = Vec::new();
    for (i, nb) in higher.iter().enumerate() {
        match nb.iter().min_by_key(|&&w| pos[w]) {
            Some(&w) => tree.push((i, pos[w])),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        tree.push((w[0], w[1]));
    }
    TreeDecomposition { bags, tree }
}

/// Exact treewidth ordering by dynamic programming over vertex subsets.
fn exact_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).fold(0u32, |m, w| m | 1 << w)).collect();
    // q(S, v): vertices outside S ∪ {v} reachable from v through S
    let q = |s: u32, v: usize| -> u32 {
        let mut comp = 1u32 << v;
        let mut frontier = 1u32 << v;
        while frontier != 0 {
            let x = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = nbr[x] & s & !comp;
            comp |= new;
            frontier |= new;
        }
        let mut out = 0u32;
        let mut c = comp;
        while c != 0 {
            let x = c.trailing_zeros() as usize;
            c &= c - 1;
            out |= nbr[x];
        }
        out & !comp & !s
    };
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut tw = vec![u8::MAX; 1usize << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = u8::MAX;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let val = tw[rest as usize].max(q(rest, v).count_ones() as u8);
            best = best.min(val);
        }
        tw[s as usize] = best;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            if tw[rest as usize].max(q(rest, v).count_ones() as u8) == tw[s as usize] {
                order.push(v);
                s = rest;
                break;
            }
        }
    }
    order.reverse();
    order
}

fn min_fill_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, 0);
        for v in (0..n).filter(|&v| alive[v]) {
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    if !adj[nb[i]].contains(&nb[j]) {
                        fill += 1;
                    }
                }
            }
            if (fill, nb.len()) < (best.0, best.1) {
                best = (fill, nb.len(), v);
            }
        }
        let v = best.2;
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        alive[v] = false;
        order.push(v);
    }
    order
}

/// A tree decomposition of `g`: of minimum width when `g` has at most
/// [`EXACT_LIMIT`] vertices, otherwise from the min-fill heuristic.
pub fn compute_td(g: &Graph) -> TreeDecomposition {
    let order = if g.n() <= EXACT_LIMIT { exact_order(g) } else { min_fill_order(g) };
    from_elimination_order(g, &order)
}
