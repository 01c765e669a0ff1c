//! Certificate documents: a witness embedding as JSON.
//!
//! Reals keep their vertex ids `0..n`; intersections are numbered from `n`
//! in order of their neighbour lists. Each rotation list starts at its
//! smallest neighbour, and each face walk starts at its smallest dart, so
//! the text depends only on the embedding. An isolated vertex is written
//! as a one-vertex walk.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::embed::{EmbeddedGraph, VertexKind};
use crate::error::{Error, Result};
use crate::witness::Witness;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionEntry {
    pub id: usize,
    pub neighbors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceEntry {
    pub face: usize,
    pub walks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub k: usize,
    pub hole_free: bool,
    pub intersections: Vec<IntersectionEntry>,
    pub rotation: BTreeMap<String, Vec<usize>>,
    pub position: Vec<FaceEntry>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Certificate(msg.into())
}

fn rotate_to_min<T: Ord + Copy>(v: &mut [T]) {
    if let Some(i) = (0..v.len()).min_by_key(|&i| v[i]) {
        v.rotate_left(i);
    }
}

impl Certificate {
    /// Writes `w` as a certificate for a graph on `n` vertices.
    pub fn from_witness(w: &Witness, n: usize, k: usize, hole_free: bool) -> Result<Certificate> {
        let m = &w.map;
        let mut id = vec![usize::MAX; m.vertex_slots()];
        let mut inter: Vec<(Vec<usize>, usize)> = Vec::new();
        for v in m.vertices() {
            match m.label(v) {
                Some(l) if l < n => id[v] = l,
                Some(l) => return Err(bad(format!("real {l} is not below n = {n}"))),
                None => {
                    let nb: Vec<usize> = m.real_neighbors(v).into_iter().collect();
                    if nb.len() != m.degree(v) {
                        return Err(bad("intersection with a repeated or non-real neighbour"));
                    }
                    inter.push((nb, v));
                }
            }
        }
        let reals: BTreeSet<usize> = m.vertices().filter_map(|v| m.label(v)).collect();
        if reals.len() != n {
            return Err(bad(format!("witness has {} reals, expected {n}", reals.len())));
        }
        inter.sort();
        let mut intersections = Vec::with_capacity(inter.len());
        for (j, (nb, v)) in inter.into_iter().enumerate() {
            id[v] = n + j;
            intersections.push(IntersectionEntry { id: n + j, neighbors: nb });
        }
        let mut rotation = BTreeMap::new();
        for v in m.vertices() {
            let mut r: Vec<usize> = m.darts_at(v).into_iter().map(|d| id[m.head(d)]).collect();
            rotate_to_min(&mut r);
            rotation.insert(id[v].to_string(), r);
        }
        let mut position: Vec<(Vec<Vec<usize>>, usize)> = Vec::new();
        for f in m.faces() {
            let mut walks: Vec<Vec<usize>> = f
                .walks
                .iter()
                .map(|w| {
                    let mut darts: Vec<(usize, usize)> = w.iter().map(|&d| (id[m.tail(d)], id[m.head(d)])).collect();
                    rotate_to_min(&mut darts);
                    darts.into_iter().map(|(t, _)| t).collect()
                })
                .collect();
            walks.extend(f.isolated.iter().map(|&v| vec![id[v]]));
            walks.sort();
            position.push((walks, f.id));
        }
        position.sort();
        Ok(Certificate {
            n,
            k,
            hole_free,
            intersections,
            rotation,
            position: position
                .into_iter()
                .enumerate()
                .map(|(i, (walks, _))| FaceEntry { face: i, walks })
                .collect(),
        })
    }

    /// Rebuilds the embedded witness, checking that rotation and position
    /// describe a planar embedding of the listed graph.
    pub fn to_witness(&self) -> Result<Witness> {
        let n = self.n;
        let total = n + self.intersections.len();
        let mut g = EmbeddedGraph::new();
        for v in 0..n {
            g.add_vertex(VertexKind::Real(v), 0);
        }
        let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); total];
        for (j, x) in self.intersections.iter().enumerate() {
            if x.id != n + j {
                return Err(bad(format!("intersection ids must run from {n} upwards")));
            }
            g.add_vertex(VertexKind::Intersection, 0);
            for &r in &x.neighbors {
                if r >= n {
                    return Err(bad(format!("intersection {} lists non-real {r}", x.id)));
                }
                if !nbrs[x.id].insert(r) {
                    return Err(bad(format!("intersection {} lists {r} twice", x.id)));
                }
                nbrs[r].insert(x.id);
            }
        }
        // one dart per ordered adjacent pair
        let mut dart: HashMap<(usize, usize), usize> = HashMap::new();
        for (x, nb) in nbrs.iter().enumerate().skip(n) {
            for &r in nb {
                let e = g.e_alive.len();
                g.e_alive.push(true);
                g.tail.extend([x, r]);
                g.face.extend([usize::MAX; 2]);
                g.counter.extend([1, 1]);
                dart.insert((x, r), 2 * e);
                dart.insert((r, x), 2 * e + 1);
            }
        }
        let nd = g.tail.len();
        g.rnext = vec![usize::MAX; nd];
        g.rprev = vec![usize::MAX; nd];
        if self.rotation.len() != total {
            return Err(bad(format!("rotation has {} vertices, expected {total}", self.rotation.len())));
        }
        for (key, r) in &self.rotation {
            let v: usize = key.parse().map_err(|_| bad(format!("bad vertex id {key:?}")))?;
            if v >= total {
                return Err(bad(format!("rotation of unknown vertex {v}")));
            }
            if r.iter().copied().collect::<BTreeSet<_>>() != nbrs[v] || r.len() != nbrs[v].len() {
                return Err(bad(format!("rotation of {v} does not match its neighbours")));
            }
            for i in 0..r.len() {
                let a = dart[&(v, r[i])];
                let b = dart[&(v, r[(i + 1) % r.len()])];
                g.rnext[a] = b;
                g.rprev[b] = a;
            }
            g.vdart[v] = r.first().map(|&u| dart[&(v, u)]);
        }
        let comp = g.component_ids();
        let ncomp = comp.iter().filter(|&&c| c != usize::MAX).max().map_or(0, |c| c + 1);
        // faces and components form a tree under the position system
        let mut dsu: Vec<usize> = (0..self.position.len() + ncomp).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut incidences = 0;
        let mut placed = vec![false; total];
        for (i, fe) in self.position.iter().enumerate() {
            if fe.face != i {
                return Err(bad("faces must be numbered in order"));
            }
            let f = g.new_face(false);
            for w in &fe.walks {
                match w.as_slice() {
                    [] => return Err(bad(format!("empty walk in face {i}"))),
                    &[v] => {
                        if v >= total || g.vdart[v].is_some() || placed[v] {
                            return Err(bad(format!("{v} is not an isolated vertex, or is placed twice")));
                        }
                        placed[v] = true;
                        g.iso_face[v] = f;
                    }
                    _ => {
                        let start = *dart
                            .get(&(w[0], w[1]))
                            .ok_or_else(|| bad(format!("walk step {}-{} is not an edge", w[0], w[1])))?;
                        let orbit = g.walk(start);
                        let ok = orbit.len() == w.len()
                            && orbit.iter().zip(w).all(|(&d, &v)| g.tail[d] == v)
                            && orbit.iter().all(|&d| g.face[d] == usize::MAX);
                        if !ok {
                            return Err(bad(format!("walk in face {i} is not a face boundary")));
                        }
                        for d in orbit {
                            g.face[d] = f;
                        }
                    }
                }
                let c = find(&mut dsu, self.position.len() + comp[w[0]]);
                let fr = find(&mut dsu, i);
                if c == fr {
                    return Err(bad(format!("face {i} meets a component twice")));
                }
                dsu[c] = fr;
                incidences += 1;
            }
        }
        if g.face.iter().any(|&f| f == usize::MAX) || (0..total).any(|v| g.vdart[v].is_none() && !placed[v]) {
            return Err(bad("some face boundary is not listed"));
        }
        if incidences + 1 != self.position.len() + ncomp {
            return Err(bad("position system does not describe a sphere"));
        }
        g.check_consistency()?;
        Ok(Witness::new(g))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BipartiteWitnessGraph;
    use crate::witness::verify_witness;
    use crate::Graph;

    fn cube() -> Witness {
        let w = BipartiteWitnessGraph {
            real_count: 4,
            intersections: vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        };
        Witness::embed(&w).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let c = Certificate::from_witness(&cube(), 4, 3, true).unwrap();
        let text = c.to_json();
        let back = Certificate::from_json(&text).unwrap();
        let again = Certificate::from_witness(&back.to_witness().unwrap(), 4, 3, true).unwrap();
        assert_eq!(again.to_json(), text);
        assert_eq!(c.position.len(), 6);
    }

    #[test]
    fn reloaded_witness_verifies() {
        let c = Certificate::from_witness(&cube(), 4, 3, true).unwrap();
        let w = Certificate::from_json(&c.to_json()).unwrap().to_witness().unwrap();
        let r = verify_witness(&Graph::complete(4), &w);
        assert!(r.is_witness && r.is_biconnected_quadrangulation);
    }

    #[test]
    fn disconnected_witness_keeps_its_faces() {
        let w = BipartiteWitnessGraph {
            real_count: 3,
            intersections: vec![vec![0, 1]],
        };
        let c = Certificate::from_witness(&Witness::embed(&w).unwrap(), 3, 2, false).unwrap();
        assert_eq!(c.position.len(), 1);
        assert_eq!(c.position[0].walks, vec![vec![0, 3, 1, 3], vec![2]]);
        let text = c.to_json();
        let again = Certificate::from_witness(&Certificate::from_json(&text).unwrap().to_witness().unwrap(), 3, 2, false).unwrap();
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn rejects_a_wrong_rotation() {
        let mut c = Certificate::from_witness(&cube(), 4, 3, true).unwrap();
        c.rotation.get_mut("0").unwrap().swap(0, 1);
        assert!(c.to_witness().is_err());
    }

    #[test]
    fn rejects_unknown_edges() {
        let mut c = Certificate::from_witness(&cube(), 4, 3, true).unwrap();
        c.position[0].walks[0][1] = 0;
        assert!(c.to_witness().is_err());
    }
}
