use std::path::Path;
use std::process::{Command, Output};

use pathtomo::graph::{parse_graph, NodeId};
use pathtomo::interference::{parse_matrix_csv, write_matrix_csv, InterferenceMatrix};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathtomo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_measure_recover() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["generate", "--n", "10", "--seed", "7", "-o", "g.txt"][..],
        &["fmatrix", "-g", "g.txt", "-o", "f.csv"],
        &["recover", "--algo", "general", "-f", "f.csv", "-o", "ghat.txt"],
        &["export-dot", "-g", "ghat.txt", "-o", "ghat.dot"],
    ] {
        let o = run(d, args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    }
    let g = parse_graph(&std::fs::read_to_string(d.join("g.txt")).unwrap()).unwrap();
    let h = parse_graph(&std::fs::read_to_string(d.join("ghat.txt")).unwrap()).unwrap();
    assert_eq!(g.overlay_count(), h.overlay_count());
    let f = parse_matrix_csv(&std::fs::read_to_string(d.join("f.csv")).unwrap()).unwrap();
    assert_eq!(f.overlays().len(), g.overlay_count());
    assert!(std::fs::read_to_string(d.join("ghat.dot")).unwrap().starts_with("graph G {"));
}

#[test]
fn tree_recovery_rejects_a_ring() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["generate", "--family", "ring", "--n", "8", "-o", "r.txt"]).status.success());
    assert!(run(d, &["fmatrix", "-g", "r.txt", "-o", "f.csv"]).status.success());
    let o = run(d, &["recover", "--algo", "tree", "-f", "f.csv", "-o", "t.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotATree"), "{}", stderr(&o));
    assert!(!d.join("t.txt").exists());
}

#[test]
fn ring_recovery_needs_five_overlays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["generate", "--family", "ring", "--n", "4", "-o", "r.txt"]).status.success());
    assert!(run(d, &["fmatrix", "-g", "r.txt", "-o", "f.csv"]).status.success());
    let o = run(d, &["recover", "--algo", "ring", "-f", "f.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("TooFewOverlays"));
}

#[test]
fn exact_bounds_on_a_path_interference_graph() {
    // four tunnels interfering along a path a-b-c-d: three cliques, so at
    // least two links
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut f = InterferenceMatrix::for_overlays([NodeId(1), NodeId(2), NodeId(3)]);
    let t = |s: u32, e: u32| f.index().index(NodeId(s), NodeId(e)).unwrap();
    let (a, b, c, dd) = (t(1, 2), t(1, 3), t(2, 3), t(3, 2));
    for (x, y) in [(a, b), (b, c), (c, dd)] {
        f.set(x, y, true);
    }
    std::fs::write(d.join("f.csv"), write_matrix_csv(&f)).unwrap();
    let o = run(d, &["bounds", "-f", "f.csv", "--exact"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("clique cover: 3\n"), "{out}");
    assert!(out.contains("lower bound: 2\n"), "{out}");
    assert!(out.contains("interfering pairs: 3\n"), "{out}");
}

#[test]
fn ilp_export_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("g.txt"), "overlay 3 underlay 1\n1 4\n2 4\n3 4\n").unwrap();
    assert!(run(d, &["fmatrix", "-g", "g.txt", "-o", "f.csv"]).status.success());
    let o = run(d, &["ilp-export", "-f", "f.csv", "--nodes", "5", "-o", "model.lp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lp = std::fs::read_to_string(d.join("model.lp")).unwrap();
    assert!(pathtomo::ilp::parse_lp(&lp).is_ok());
    let o = run(d, &["ilp-solve", "-f", "f.csv", "--nodes", "5", "-o", "opt.txt", "--solution", "opt.sol"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("optimum: 3 links"));
    let o = run(d, &["verify", "-f", "f.csv", "-s", "opt.sol", "--nodes", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "feasible: 3 links\n");
    let o = run(d, &["verify", "-f", "f.csv", "-g", "opt.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn verify_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // star matrix checked against two hubs: tunnels 1>3 and 2>4 now share
    // the hub link
    std::fs::write(d.join("star.txt"), "overlay 4 underlay 1\n1 5\n2 5\n3 5\n4 5\n").unwrap();
    std::fs::write(d.join("hubs.txt"), "overlay 4 underlay 2\n1 5\n2 5\n3 6\n4 6\n5 6\n").unwrap();
    assert!(run(d, &["fmatrix", "-g", "star.txt", "-o", "f.csv"]).status.success());
    let o = run(d, &["verify", "-f", "f.csv", "-g", "hubs.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Infeasible"));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["recover", "--algo", "bogus", "-f", "f.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--algo"));
    let o = run(dir.path(), &["generate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"));
    let o = run(dir.path(), &["fmatrix", "-g", "missing.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.txt"), "family = tree\nrecovery = tree\nn = 4, 8\ntrials = 3\n").unwrap();
    let o = run(d, &["evaluate", "-c", "c.txt", "-o", "r.csv", "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[1..].iter().all(|r| r.contains(",tree,0,0,")), "{csv}");
    assert!(stdout(&o).contains("4,3,0,0.000"));
    std::fs::write(d.join("bad.txt"), "overlay_fraction = 2\n").unwrap();
    let o = run(d, &["evaluate", "-c", "bad.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidConfig"));
}
