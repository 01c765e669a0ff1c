use mapwit::cert::Certificate;
use mapwit::oracle::Oracle;
use mapwit::render::{is_crossing_free, layout};
use mapwit::witness::check_hole_free;
use mapwit::{compute_td, parse_graph, parse_td, recognize, verify_witness, Graph, Mode, RunOptions};

fn octahedron() -> Graph {
    let mut g = Graph::complete(6);
    let mut h = Graph::new(6);
    for (a, b) in g.edges().collect::<Vec<_>>() {
        if a / 2 != b / 2 {
            h.add_edge(a, b);
        }
    }
    g = h;
    g
}

fn grid(w: usize, h: usize) -> Graph {
    let mut g = Graph::new(w * h);
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w {
                g.add_edge(r * w + c, r * w + c + 1);
            }
            if r + 1 < h {
                g.add_edge(r * w + c, (r + 1) * w + c);
            }
        }
    }
    g
}

fn check(g: &Graph, k: usize, hole_free: bool) -> bool {
    let opts = RunOptions::new(k).hole_free(hole_free).mode(Mode::Certificate);
    let out = recognize(g, None, &opts).unwrap();
    let decided = recognize(g, None, &RunOptions::new(k).hole_free(hole_free)).unwrap();
    assert_eq!(out.accepted, decided.accepted);
    if let Some(w) = &out.witness {
        let r = verify_witness(g, w);
        assert!(r.is_witness && r.is_compact, "{:?}", r.first_failure);
        assert!(r.max_intersection_degree <= k);
        assert!(!hole_free || check_hole_free(w));
        let c = Certificate::from_witness(w, g.n(), k, hole_free).unwrap();
        let text = c.to_json();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert!(verify_witness(g, &back.to_witness().unwrap()).is_witness);
        assert!(is_crossing_free(&layout(w).unwrap()));
    }
    out.accepted
}

#[test]
fn files_to_certificate() {
    let g = parse_graph("c comment\np tw 5 8\n1 2\n1 3\n1 4\n1 5\n2 3\n3 4\n4 5\n5 2\n").unwrap();
    let td = parse_td("s td 2 4 5\nb 1 1 2 3 5\nb 2 1 3 4 5\n1 2\n", &g).unwrap();
    let out = recognize(&g, Some(&td), &RunOptions::new(3).mode(Mode::Certificate)).unwrap();
    assert!(out.accepted);
    assert!(verify_witness(&g, &out.witness.unwrap()).is_witness);
    let hf = recognize(&g, Some(&td), &RunOptions::new(3).hole_free(true)).unwrap().accepted;
    assert_eq!(hf, Oracle::default().is_hole_free_k_map(&g, 3).unwrap().0);
}

#[test]
fn planar_graphs_are_3_maps() {
    assert!(check(&octahedron(), 3, false));
    assert!(check(&grid(4, 3), 3, false));
    assert!(check(&Graph::cycle(8), 2, false));
    assert!(check(&Graph::path(6), 2, false));
}

#[test]
fn hole_free_cases() {
    assert!(check(&Graph::complete(2), 2, true));
    assert!(!check(&Graph::cycle(4), 2, true));
    assert!(!Oracle::default().is_hole_free_k_map(&Graph::cycle(4), 2).unwrap().0);
    assert!(check(&Graph::complete(4), 3, true));
    assert!(!check(&Graph::path(3), 5, true));
    assert!(check(&octahedron(), 3, true));
}

#[test]
fn disconnected_and_blocks() {
    let mut g = Graph::complete(4);
    let mut h = Graph::new(9);
    for (a, b) in g.edges().collect::<Vec<_>>() {
        h.add_edge(a, b);
    }
    h.add_edge(3, 4);
    h.add_edge(4, 5);
    h.add_edge(5, 3);
    h.add_edge(7, 8);
    g = h;
    assert!(check(&g, 3, false));
    assert!(check(&g, 2, false));
    assert!(check(&Graph::complete(5), 4, false));
    assert!(!check(&Graph::complete(5), 3, false));
}

#[test]
fn computed_decompositions_are_valid() {
    for g in [octahedron(), grid(5, 4), Graph::complete(6)] {
        let td = compute_td(&g);
        td.validate(&g).unwrap();
    }
}
