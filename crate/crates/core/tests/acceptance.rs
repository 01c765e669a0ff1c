//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero on an unexpected failure.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use mapwit::cert::Certificate;
use mapwit::dp::Engine;
use mapwit::graph::connected_graphs;
use mapwit::oracle::Oracle;
use mapwit::planarity::is_planar;
use mapwit::treedecomp::{NiceNode, NodeKind};
use mapwit::witness::{check_hole_free, is_compact, Compactness};
use mapwit::{recognize, verify_witness, Graph, Mode, NiceTreeDecomposition, RunOptions, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a criterion run leaves behind: its verdict, a transcript that must
/// not change between runs, and the certificates and sketch sizes it saw.
#[derive(Default)]
struct Run {
    failures: Vec<String>,
    transcript: String,
    certificates: Vec<(Graph, usize, bool, Witness)>,
    sketch_violations: Vec<String>,
    sketch_checks: usize,
    notes: Vec<String>,
}

impl Run {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 5 {
            self.failures.push(msg);
        } else if self.failures.len() == 5 {
            self.failures.push("...".into());
        }
    }

    /// Runs the recognizer in both modes, checks they agree, and records the
    /// answer, the certificate and the sketch size.
    fn recognize(&mut self, tag: &str, g: &Graph, k: usize, hf: bool) -> bool {
        let opts = RunOptions::new(k).hole_free(hf);
        let d = recognize(g, None, &opts).expect("valid input");
        let c = recognize(g, None, &opts.clone().mode(Mode::Certificate)).expect("valid input");
        if d.accepted != c.accepted {
            self.fail(format!("{tag}: decision says {}, certificate mode says {}", d.accepted, c.accepted));
        }
        for out in [&d, &c] {
            self.sketch_checks += 1;
            let cap = 12 * (out.stats.width + 1);
            if out.stats.max_sketch_vertices > cap {
                self.sketch_violations.push(format!("{tag}: sketch of {} vertices, cap {cap}", out.stats.max_sketch_vertices));
            }
        }
        let _ = writeln!(self.transcript, "{tag} k={k} hf={hf} {}", if c.accepted { "YES" } else { "NO" });
        if let Some(w) = c.witness.filter(|_| c.accepted) {
            match Certificate::from_witness(&w, g.n(), k, hf) {
                Ok(doc) => self.transcript.push_str(&doc.to_json()),
                Err(e) => self.fail(format!("{tag}: certificate not written: {e}")),
            }
            self.certificates.push((g.clone(), k, hf, w));
        }
        d.accepted
    }

    fn line(&self, n: usize, summary: &str, elapsed: Duration) -> (bool, String) {
        let ok = self.failures.is_empty();
        let mut s = format!("criterion {n}: {} {summary} [{:.1}s]", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        for f in &self.failures {
            let _ = write!(s, "\n    {f}");
        }
        for f in &self.notes {
            let _ = write!(s, "\n    note: {f}");
        }
        (ok, s)
    }
}

fn oracle(g: &Graph, k: usize, hf: bool) -> bool {
    let o = Oracle::default();
    let r = if hf { o.is_hole_free_k_map(g, k) } else { o.is_k_map(g, k) };
    r.expect("oracle input in range").0
}

fn random_graphs(count: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(7..=10);
            let mut g = Graph::new(n);
            for v in 1..n {
                let u = rng.gen_range(0..v);
                g.add_edge(u, v);
            }
            for _ in 0..rng.gen_range(0..=n + 4) {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if a != b {
                    g.add_edge(a, b);
                }
            }
            g
        })
        .collect()
}

fn criterion_1() -> Run {
    let mut run = Run::default();
    let mut graphs: Vec<Graph> = (1..=6).flat_map(connected_graphs).collect();
    let small = graphs.len();
    graphs.extend(random_graphs(200, 7));
    let mut planar = 0;
    for (i, g) in graphs.iter().enumerate() {
        let p = is_planar(g.n(), &g.edges().collect::<Vec<_>>());
        planar += p as usize;
        if run.recognize(&format!("c1 #{i}"), g, 3, false) != p {
            run.fail(format!("graph {i} {:?}: planar = {p}", g.edges().collect::<Vec<_>>()));
        }
    }
    if small != 143 {
        run.fail(format!("{small} connected graphs with at most 6 vertices, expected 143"));
    }
    run.notes.push(format!("{small} small + 200 random graphs, {planar} planar"));
    run
}

fn criterion_2() -> Run {
    let mut run = Run::default();
    let mut checked = 0;
    for n in 1..=5 {
        for (i, g) in connected_graphs(n).iter().enumerate() {
            for k in 2..=5 {
                for hf in [false, true] {
                    let dp = run.recognize(&format!("c2 n={n} #{i}"), g, k, hf);
                    let o = oracle(g, k, hf);
                    checked += 1;
                    if dp != o {
                        run.fail(format!("{:?} k={k} hf={hf}: dp {dp}, oracle {o}", g.edges().collect::<Vec<_>>()));
                    }
                }
            }
        }
    }
    run.notes.push(format!("{checked} comparisons"));
    run
}

fn criterion_3() -> Run {
    let mut run = Run::default();
    for k in 1..=5 {
        for m in 2..=9 {
            let g = Graph::complete(m);
            let bound = 3 * k / 2;
            if m > bound {
                if run.recognize(&format!("c3 K{m}"), &g, k, false) {
                    let o = if m <= 6 { format!(", oracle {}", oracle(&g, k, false)) } else { String::new() };
                    run.fail(format!("K{m} accepted at k={k} although {m} > {bound}{o}"));
                }
            } else if m <= 6 {
                let dp = run.recognize(&format!("c3 K{m}"), &g, k, false);
                let o = oracle(&g, k, false);
                if dp != o {
                    run.fail(format!("K{m} at k={k}: dp {dp}, oracle {o}"));
                }
            }
        }
    }
    run
}

/// Certificates from the runs of criteria 1 to 3.
fn criterion_4(runs: &[&Run]) -> Run {
    let mut run = Run::default();
    let mut count = 0;
    for (g, k, hf, w) in runs.iter().flat_map(|r| &r.certificates) {
        count += 1;
        let tag = format!("{:?} k={k} hf={hf}", g.edges().collect::<Vec<_>>());
        let r = verify_witness(g, w);
        if !r.is_witness {
            run.fail(format!("{tag}: not a witness: {:?}", r.first_failure));
        }
        if is_compact(w) != Compactness::Compact {
            run.fail(format!("{tag}: not compact"));
        }
        if r.max_intersection_degree > *k {
            run.fail(format!("{tag}: degree {} > k", r.max_intersection_degree));
        }
        if *hf && !check_hole_free(w) {
            run.fail(format!("{tag}: not hole-free"));
        }
        let nv = g.n();
        let cap = if *hf { 3 * nv as i64 - 4 } else { 6 * nv as i64 - 10 };
        if nv >= 3 && w.vertex_count() as i64 > cap {
            run.fail(format!("{tag}: {} witness vertices > {cap}", w.vertex_count()));
        }
        let doc = Certificate::from_witness(w, g.n(), *k, *hf).expect("certificate");
        let text = doc.to_json();
        let again = Certificate::from_json(&text)
            .and_then(|d| d.to_witness())
            .and_then(|w2| Certificate::from_witness(&w2, g.n(), *k, *hf))
            .map(|d| d.to_json());
        if again.as_deref().ok() != Some(text.as_str()) {
            run.fail(format!("{tag}: certificate does not round-trip"));
        }
    }
    run.notes.push(format!("{count} certificates"));
    run
}

struct Builder {
    nodes: Vec<NiceNode>,
}

enum Op {
    I(usize),
    F(usize),
}
use Op::{F, I};

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new() }
    }

    fn push(&mut self, kind: NodeKind, bag: BTreeSet<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    /// A leaf followed by introduce and forget steps.
    fn path(&mut self, v: usize, ops: &[Op]) -> usize {
        let leaf = self.push(NodeKind::Leaf(v), [v].into(), vec![]);
        self.then(leaf, ops)
    }

    fn then(&mut self, mut at: usize, ops: &[Op]) -> usize {
        for op in ops {
            let mut bag = self.nodes[at].bag.clone();
            let kind = match *op {
                I(v) => {
                    bag.insert(v);
                    NodeKind::Introduce(v)
                }
                F(v) => {
                    bag.remove(&v);
                    NodeKind::Forget(v)
                }
            };
            at = self.push(kind, bag, vec![at]);
        }
        at
    }

    fn join(&mut self, a: usize, b: usize) -> usize {
        let bag = self.nodes[a].bag.clone();
        self.push(NodeKind::Join, bag, vec![a, b])
    }

    fn done(self, root: usize) -> NiceTreeDecomposition {
        NiceTreeDecomposition {
            nodes: self.nodes,
            root: Some(root),
        }
    }
}

fn instances() -> Vec<(&'static str, Graph, usize, bool, NiceTreeDecomposition)> {
    let k2 = || Graph::complete(2);
    let k3 = || Graph::complete(3);
    let c4 = || Graph::cycle(4);
    let c5 = || Graph::cycle(5);
    let k4 = || Graph::complete(4);
    let diamond = || Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]);
    let house = || Graph::from_edges(5, &[(0, 1), (0, 2), (0, 4), (1, 2), (2, 3), (3, 4)]);
    let w4 = || Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (4, 1)]);
    let k23 = || Graph::from_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]);
    let k5e = || Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4)]);

    let edge = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), F(0)]);
        b.done(r)
    };
    let triangle = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(2), F(0), F(1)]);
        b.done(r)
    };
    let triangle_join = || {
        let mut b = Builder::new();
        let l = b.path(0, &[I(1), I(2)]);
        let r = b.path(2, &[I(0), I(1)]);
        let j = b.join(l, r);
        let r = b.then(j, &[F(0), F(1)]);
        b.done(r)
    };
    let square = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(3), F(0), I(2), F(1), F(3)]);
        b.done(r)
    };
    let pentagon = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(4), F(0), I(2), F(1), I(3), F(2), F(4)]);
        b.done(r)
    };
    let clique4 = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(2), I(3), F(0), F(1), F(2)]);
        b.done(r)
    };
    let clique4_join = || {
        let mut b = Builder::new();
        let l = b.path(0, &[I(1), I(2), I(3)]);
        let r = b.path(3, &[I(2), I(1), I(0)]);
        let j = b.join(l, r);
        let r = b.then(j, &[F(3), F(2), F(1)]);
        b.done(r)
    };
    let diamond_td = || {
        let mut b = Builder::new();
        let r = b.path(1, &[I(3), I(0), F(0), I(2), F(3), F(1)]);
        b.done(r)
    };
    let house_td = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(2), F(1), I(4), I(3), F(0), F(4), F(2)]);
        b.done(r)
    };
    let wheel_td = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(2), I(3), F(2), I(4), F(1), F(3), F(0)]);
        b.done(r)
    };
    let k23_td = || {
        let mut b = Builder::new();
        let l = b.path(0, &[I(1), I(2), F(2)]);
        let r = b.path(1, &[I(0), I(3), F(3)]);
        let j = b.join(l, r);
        let r = b.then(j, &[I(4), F(4), F(0)]);
        b.done(r)
    };
    let k5e_td = || {
        let mut b = Builder::new();
        let r = b.path(0, &[I(1), I(2), I(3), F(3), I(4), F(0), F(1), F(2)]);
        b.done(r)
    };
    vec![
        ("K2", k2(), 2, false, edge()),
        ("K2 hole-free", k2(), 2, true, edge()),
        ("K3", k3(), 2, false, triangle()),
        ("K3 with join", k3(), 3, false, triangle_join()),
        ("C4", c4(), 2, false, square()),
        ("C4 hole-free", c4(), 3, true, square()),
        ("C5", c5(), 3, false, pentagon()),
        ("C5 hole-free", c5(), 2, true, pentagon()),
        ("K4", k4(), 3, false, clique4()),
        ("K4 hole-free", k4(), 3, true, clique4()),
        ("K4 with join", k4(), 4, false, clique4_join()),
        ("diamond", diamond(), 3, false, diamond_td()),
        ("diamond hole-free", diamond(), 3, true, diamond_td()),
        ("house", house(), 3, false, house_td()),
        ("house hole-free", house(), 3, true, house_td()),
        ("W4", w4(), 3, false, wheel_td()),
        ("W4 hole-free", w4(), 4, true, wheel_td()),
        ("K2,3 with join", k23(), 3, false, k23_td()),
        ("K2,3 hole-free", k23(), 2, true, k23_td()),
        ("K5 minus an edge", k5e(), 3, false, k5e_td()),
    ]
}

fn criterion_5() -> Run {
    let mut run = Run::default();
    let mut bags = 0;
    for (name, g, k, hf, ntd) in instances() {
        if let Err(e) = ntd.validate(&g) {
            run.fail(format!("{name}: decomposition rejected: {e}"));
            continue;
        }
        let mut engine = Engine::new(&g, RunOptions::new(k).hole_free(hf).mode(Mode::Certificate));
        engine.retain = true;
        let out = engine.run(&ntd);
        let _ = writeln!(run.transcript, "c5 {name} {}", out.accepted);
        let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ntd.nodes.len()];
        for id in ntd.postorder() {
            let node = &ntd.nodes[id];
            let mut seen: BTreeSet<usize> = node.children.iter().flat_map(|&c| below[c].clone()).collect();
            seen.extend(node.bag.iter().copied());
            below[id] = seen.clone();
            let dp = engine.records[id].as_ref().map(|r| r.keys()).unwrap_or_default();
            let or = Oracle::default()
                .compact_witness_keys_on(&g, &seen, &node.bag, k, hf)
                .expect("oracle input in range");
            bags += 1;
            let _ = writeln!(run.transcript, "  node {id} {} keys", dp.len());
            if dp != or {
                run.fail(format!(
                    "{name}: node {id} {:?} bag {:?}: {} keys, oracle {} ({} only in the record, {} only in the oracle)",
                    node.kind,
                    node.bag,
                    dp.len(),
                    or.len(),
                    dp.difference(&or).count(),
                    or.difference(&dp).count()
                ));
            }
        }
    }
    run.notes.push(format!("{bags} bags"));
    run
}

fn criterion_6() -> Run {
    let mut run = Run::default();
    let k4 = Graph::complete(4);
    let out = recognize(&k4, None, &RunOptions::new(3).hole_free(true).mode(Mode::Certificate)).expect("valid input");
    let cube = Witness::embed(&mapwit::BipartiteWitnessGraph {
        real_count: 4,
        intersections: vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    })
    .expect("cube is planar");
    match (&out.accepted, &out.witness) {
        (true, Some(w)) if w.key() == cube.key() => {}
        (true, _) => run.fail("K4 hole-free at k=3: witness is not the cube".into()),
        (false, _) => run.fail("K4 hole-free at k=3 rejected".into()),
    }
    if run.recognize("c6 P3", &Graph::path(3), 3, true) {
        run.fail("P3 accepted as hole-free".into());
    }
    let bowtie = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]);
    if run.recognize("c6 bowtie", &bowtie, 3, true) {
        run.fail("bowtie accepted as hole-free".into());
    }
    run.recognize("c6 K4", &k4, 3, true);
    run
}

/// Sketch sizes from the other runs, and the slope of decision-mode time on
/// graphs of width 3.
fn criterion_7(runs: &[&Run]) -> Run {
    let mut run = Run::default();
    let violations: Vec<&String> = runs.iter().flat_map(|r| &r.sketch_violations).collect();
    for v in violations.iter().take(5) {
        run.fail((*v).clone());
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for n in (50..=500).step_by(50) {
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in i + 1..(i + 4).min(n) {
                g.add_edge(i, j);
            }
        }
        let t = Instant::now();
        let out = recognize(&g, None, &RunOptions::new(3)).expect("valid input");
        points.push((n as f64, t.elapsed().as_secs_f64()));
        if !out.accepted || out.stats.width != 3 {
            run.fail(format!("n={n}: accepted {} width {}", out.accepted, out.stats.width));
        }
        let cap = 12 * (out.stats.width + 1);
        if out.stats.max_sketch_vertices > cap {
            run.fail(format!("n={n}: sketch of {} vertices", out.stats.max_sketch_vertices));
        }
    }
    let slope = |p: &[(f64, f64)]| {
        let m = p.len() as f64;
        let (sx, sy) = p.iter().fold((0.0, 0.0), |a, q| (a.0 + q.0, a.1 + q.1));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let den: f64 = p.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
        num / den
    };
    let (lo, hi) = points.split_at(points.len() / 2);
    let ratio = slope(hi) / slope(lo);
    if !(0.5..=2.0).contains(&ratio) {
        run.fail(format!("slope on the larger half is {ratio:.2} times the slope on the smaller half"));
    }
    run.notes.push(format!(
        "{} sketch size checks, slope ratio {ratio:.2}, {:.1} ms per vertex",
        runs.iter().map(|r| r.sketch_checks).sum::<usize>(),
        1e3 * slope(&points)
    ));
    run
}

fn main() {
    let mut lines: Vec<(bool, String)> = Vec::new();
    let mut first: Vec<(Run, Duration)> = Vec::new();
    let criteria: [fn() -> Run; 5] = [criterion_1, criterion_2, criterion_3, criterion_5, criterion_6];
    for c in criteria {
        let t = Instant::now();
        let r = c();
        first.push((r, t.elapsed()));
    }
    let [c1, c2, c3, c5, c6] = first.try_into().ok().expect("five runs");
    let t = Instant::now();
    let c4 = criterion_4(&[&c1.0, &c2.0, &c3.0]);
    let c4_time = t.elapsed();
    let t = Instant::now();
    let c7 = criterion_7(&[&c1.0, &c2.0, &c3.0, &c5.0, &c6.0]);
    let c7_time = t.elapsed();

    lines.push(c1.0.line(1, "recognize at k=3 equals planarity", c1.1));
    lines.push(c2.0.line(2, "decision equals the oracle on graphs with at most 5 vertices", c2.1));
    lines.push(c3.0.line(3, "clique bound", c3.1));
    lines.push(c4.line(4, "certificates verify, are compact and within the size bounds", c4_time));
    lines.push(c5.0.line(5, "record key sets equal compact witness key sets", c5.1));
    lines.push(c6.0.line(6, "hole-free spot checks", c6.1));
    lines.push(c7.line(7, "sketch sizes and linear scaling", c7_time));

    // second run of everything with a transcript
    let t = Instant::now();
    let again = [criterion_1(), criterion_2(), criterion_3(), criterion_5(), criterion_6()];
    let mut run8 = Run::default();
    for (name, (a, b)) in ["1", "2", "3", "5", "6"].iter().zip([&c1.0, &c2.0, &c3.0, &c5.0, &c6.0].iter().zip(again.iter())) {
        if a.transcript != b.transcript {
            run8.fail(format!("criterion {name}: transcripts differ"));
        }
        if a.failures != b.failures {
            run8.fail(format!("criterion {name}: failure reports differ"));
        }
    }
    lines.push(run8.line(8, "two runs give identical answers and certificates", t.elapsed()));

    let mut unexpected = 0;
    for (ok, line) in &lines {
        println!("{line}");
        if !ok && !known_failure(line) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}

/// K4 is planar, so a subdivision of K4 is a witness with degree-2
/// intersections and K4 is a 2-map graph; the clique bound fails at k = 2.
fn known_failure(line: &str) -> bool {
    let mut details = line.lines().skip(1).filter(|l| !l.trim_start().starts_with("note:"));
    line.starts_with("criterion 3: FAIL")
        && details.all(|l| l.trim() == "K4 accepted at k=2 although 4 > 3, oracle true")
}
