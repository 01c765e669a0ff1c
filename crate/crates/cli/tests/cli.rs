use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mapwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapwit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn complete(n: usize) -> String {
    let mut s = format!("p tw {n} {}\n", n * (n - 1) / 2);
    for a in 1..=n {
        for b in a + 1..=n {
            s += &format!("{a} {b}\n");
        }
    }
    s
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SIX_CYCLE: &str = r#"{
  "n": 3, "k": 2, "hole_free": false,
  "intersections": [
    {"id": 3, "neighbors": [0, 1]},
    {"id": 4, "neighbors": [0, 2]},
    {"id": 5, "neighbors": [1, 2]}
  ],
  "rotation": {"0": [3, 4], "1": [3, 5], "2": [4, 5], "3": [0, 1], "4": [0, 2], "5": [1, 2]},
  "position": [
    {"face": 0, "walks": [[0, 3, 1, 5, 2, 4]]},
    {"face": 1, "walks": [[0, 4, 2, 5, 1, 3]]}
  ]
}"#;

const EDGE_AND_POINT: &str = r#"{
  "n": 3, "k": 2, "hole_free": false,
  "intersections": [{"id": 3, "neighbors": [0, 1]}],
  "rotation": {"0": [3], "1": [3], "2": [], "3": [0, 1]},
  "position": [{"face": 0, "walks": [[0, 3, 1, 3], [2]]}]
}"#;

#[test]
fn min_k_of_a_triangle() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k3.gr", &complete(3));
    let o = mapwit(&["recognize", g.to_str().unwrap(), "--min-k", "--oracle-check"]);
    assert_eq!(stdout(&o).trim(), "YES k=2");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn k7_is_not_a_4_map() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k7.gr", &complete(7));
    let o = mapwit(&["recognize", g.to_str().unwrap(), "--k", "4"]);
    assert_eq!(stdout(&o).trim(), "NO");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hole_free_k4_certificate_verifies_and_renders() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k4.gr", &complete(4));
    let c = dir.path().join("c.json");
    let o = mapwit(&["recognize", g.to_str().unwrap(), "--k", "3", "--hole-free", "--certificate", c.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "YES k=3");
    assert_eq!(o.status.code(), Some(0));
    let o = mapwit(&["verify", g.to_str().unwrap(), c.to_str().unwrap(), "--k", "3", "--hole-free"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let svg = dir.path().join("c.svg");
    let o = mapwit(&["render", c.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<circle").count() + text.matches("<rect").count(), 8);
}

#[test]
fn six_cycle_witness_of_a_triangle() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k3.gr", &complete(3));
    let w = write(dir.path(), "w.json", SIX_CYCLE);
    let (g, w) = (g.to_str().unwrap(), w.to_str().unwrap());
    assert_eq!(mapwit(&["verify", g, w, "--k", "2"]).status.code(), Some(0));
    assert_eq!(mapwit(&["verify", g, w, "--hole-free"]).status.code(), Some(1));
    let svg = std::path::Path::new(w).with_extension("svg");
    assert_eq!(mapwit(&["render", w, "-o", svg.to_str().unwrap()]).status.code(), Some(0));
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 6);
}

#[test]
fn half_square_mismatch_is_invalid() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k3.gr", &complete(3));
    let w = write(dir.path(), "w.json", EDGE_AND_POINT);
    let o = mapwit(&["verify", g.to_str().unwrap(), w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("INVALID"));
}

#[test]
fn oracle_subcommand() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k4.gr", &complete(4));
    let o = mapwit(&["oracle", g.to_str().unwrap(), "--k", "3", "--hole-free"]);
    assert_eq!(stdout(&o).trim(), "YES k=3");
    let g = write(dir.path(), "k5.gr", &complete(5));
    assert_eq!(mapwit(&["oracle", g.to_str().unwrap(), "--k", "3"]).status.code(), Some(1));
}

#[test]
fn errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(mapwit(&["recognize", "/nonexistent.gr", "--k", "3"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.gr", "p tw 2 1\n1 7\n");
    assert_eq!(mapwit(&["recognize", bad.to_str().unwrap(), "--k", "3"]).status.code(), Some(2));
    let g = write(dir.path(), "k3.gr", &complete(3));
    assert_eq!(mapwit(&["recognize", g.to_str().unwrap()]).status.code(), Some(2));
    let junk = write(dir.path(), "junk.json", "{\"n\": 3}");
    assert_eq!(mapwit(&["verify", g.to_str().unwrap(), junk.to_str().unwrap()]).status.code(), Some(2));
    let td = write(dir.path(), "k3.td", "s td 1 2 3\nb 1 1 2\n");
    assert_eq!(mapwit(&["recognize", g.to_str().unwrap(), "--td", td.to_str().unwrap(), "--k", "3"]).status.code(), Some(2));
}

#[test]
fn decomposition_from_file() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "c4.gr", "p tw 4 4\n1 2\n2 3\n3 4\n4 1\n");
    let td = write(dir.path(), "c4.td", "s td 2 3 4\nb 1 1 2 3\nb 2 1 3 4\n1 2\n");
    let o = mapwit(&["recognize", g.to_str().unwrap(), "--td", td.to_str().unwrap(), "--k", "2", "--decision-only"]);
    assert_eq!(stdout(&o).trim(), "YES k=2");
}

#[test]
fn certificates_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "w4.gr", "p tw 5 8\n1 2\n1 3\n1 4\n1 5\n2 3\n3 4\n4 5\n5 2\n");
    let mut texts = Vec::new();
    for i in 0..2 {
        let c = dir.path().join(format!("c{i}.json"));
        let o = mapwit(&["recognize", g.to_str().unwrap(), "--min-k", "--certificate", c.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(std::fs::read_to_string(c).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}
