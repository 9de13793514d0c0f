use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collective_dfs::encodings::{four_qubit_basis, uv_states};
use collective_dfs::qubit_space::{QubitCount, StateVector};
use collective_dfs::{CVector, C64};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collective-dfs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// State from `[(bits, [re, im]), …]` JSON.
fn state_from_json(n: usize, amps: &Value) -> StateVector {
    let q = QubitCount::new(n).unwrap();
    let mut v = CVector::zeros(q.dim());
    for entry in amps.as_array().unwrap() {
        let bits = entry[0].as_str().unwrap();
        let idx = usize::from_str_radix(bits, 2).unwrap();
        v[idx] = C64::new(entry[1][0].as_f64().unwrap(), entry[1][1].as_f64().unwrap());
    }
    StateVector::new(v)
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn decompose_examples() {
    let one = ok(&["decompose", "--n", "1"]);
    assert!(one.contains("J=1/2 x1\n"));
    let three = ok(&["decompose", "--n", "3"]);
    assert!(three.contains("J=3/2 x1\nJ=1/2 x2\n"));
    assert!(three.contains("dim V(1) = 2"));
    let four = ok(&["decompose", "--n", "4"]);
    assert!(four.contains("J=2 x1\nJ=1 x3\nJ=0 x2\n"));
    assert!(four.contains("dim V(2) = 2"));

    let too_big = run(&["decompose", "--n", "9"]);
    assert_eq!(too_big.status.code(), Some(2));
    assert!(!too_big.stderr.is_empty());
}

#[test]
fn cdfs_examples() {
    let dir = TempDir::new().unwrap();
    let case_ii = write(&dir, "c2.json", r#"{"n":3,"a":{"uniform":1},"b":{"preset":"case-ii","b12":0.4,"b13":-0.9}}"#);
    let report: Value = serde_json::from_str(&ok(&["cdfs", "--model", s(&case_ii), "--k", "1", "--json"])).unwrap();
    let sector = &report[0];
    assert_eq!(sector["cdfs_dimension"], 1);
    assert_eq!(sector["df_dimension"], 2);
    let w = state_from_json(3, &sector["basis"][0]["amplitudes"]);
    assert!(w.overlap(&uv_states().0) > 1.0 - 1e-10);
    // the remainder is |v⟩, which leaks at a finite rate
    let rest = &sector["remainder"][0];
    assert!(state_from_json(3, &rest["amplitudes"]).overlap(&uv_states().1) > 1.0 - 1e-10);
    assert!(rest["tau2"].as_f64().unwrap() > 0.0);

    let uniform = write(&dir, "u3.json", r#"{"n":3,"a":{"uniform":1},"b":{"preset":"uniform","value":0.7}}"#);
    let text = ok(&["cdfs", "--model", s(&uniform), "--k", "1"]);
    assert!(text.contains("CDFS dimension 2"), "{text}");

    let random = write(&dir, "r7.json", r#"{"n":4,"a":{"uniform":1},"b":{"preset":"random","seed":7}}"#);
    let text = ok(&["cdfs", "--model", s(&random), "--k", "1"]);
    assert!(text.contains("DF dimension 3, CDFS dimension 0"), "{text}");
    assert_eq!(text.matches("tau2 = ").count(), 3);

    let broken = write(&dir, "bad.json", r#"{"n":3,"b":{"preset":"case-ii","b12":0.4}}"#);
    assert_eq!(run(&["cdfs", "--model", s(&broken)]).status.code(), Some(2));
    let extra = write(&dir, "extra.json", r#"{"n":3,"c":1,"b":{"preset":"uniform","value":1}}"#);
    assert_eq!(run(&["cdfs", "--model", s(&extra)]).status.code(), Some(2));
    assert_eq!(run(&["cdfs", "--model", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn evolve_examples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traj.csv");

    let two = write(&dir, "s2.json", r#"{"n":2,"a":{"uniform":1},"b":{"preset":"uniform","value":0.5}}"#);
    let summary = ok(&["evolve", "--model", s(&two), "--state", "singlet", "--t", "10", "--out", s(&out)]);
    assert!(summary.contains("final fidelity"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,fidelity,trace,purity\n"));
    assert!(csv_column(&csv, 1).iter().all(|f| (f - 1.0).abs() < 1e-12));

    let case_ii = write(&dir, "c2.json", r#"{"n":3,"a":{"uniform":1},"b":{"preset":"case-ii","b12":0.4,"b13":-0.9}}"#);
    ok(&["evolve", "--model", s(&case_ii), "--state", "u", "--t", "10", "--out", s(&out)]);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv_column(&csv, 1).iter().all(|f| (f - 1.0).abs() < 1e-6));

    let seed3 = write(&dir, "r3.json", r#"{"n":4,"a":{"uniform":0.3},"b":{"preset":"random","seed":3}}"#);
    let summary = ok(&["evolve", "--model", s(&seed3), "--state", "omega-zero", "--t", "20", "--no-dissipator", "--out", s(&out)]);
    let leakage: f64 = summary.rsplit(' ').next().unwrap().trim().parse().unwrap();
    assert!(leakage < 1e-9, "{summary}");

    // without --out the CSV goes to stdout
    let csv = ok(&["evolve", "--model", s(&two), "--state", "01", "--t", "1"]);
    assert!(csv.starts_with("t,fidelity,trace,purity\n0,1,1,1\n"));

    let unknown = run(&["evolve", "--model", s(&seed3), "--state", "u", "--t", "1"]);
    assert_eq!(unknown.status.code(), Some(2));
    let guard = run(&["evolve", "--model", s(&seed3), "--state", "a", "--t", "1", "--dt", "1"]);
    assert_eq!(guard.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guard.stderr).contains("too large"));
}

#[test]
fn evolve_reads_state_files() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"n":4,"b":{"preset":"random","seed":3}}"#);
    let g = four_qubit_basis().state('g').unwrap().clone();
    let amps: Vec<[f64; 2]> = g.amplitudes().iter().map(|z| [z.re, z.im]).collect();
    let state = write(&dir, "g.json", &serde_json::json!({ "amplitudes": amps }).to_string());
    let csv = ok(&["evolve", "--model", s(&model), "--state", s(&state), "--t", "1"]);
    let purity = csv_column(&csv, 3);
    assert!(purity.iter().all(|p| (p - 1.0).abs() < 1e-9));
}

#[test]
fn metrics_examples() {
    let fig1b = ok(&["metrics", "--fig", "1b"]);
    assert!(fig1b.starts_with("r,product\n"));
    let r = csv_column(&fig1b, 0);
    let product = csv_column(&fig1b, 1);
    assert_eq!(r.len(), 501);
    let best = (0..r.len()).max_by(|&a, &b| product[a].total_cmp(&product[b])).unwrap();
    assert!((0.21..=0.24).contains(&r[best]), "argmax {}", r[best]);

    let fig1a = ok(&["metrics", "--fig", "1a"]);
    assert!(fig1a.starts_with("r,d_df,p_df\n"));
    assert!(fig1a.ends_with("\n0.5,1,0\n"));

    let fig2 = ok(&["metrics", "--fig", "2"]);
    let p = csv_column(&fig2, 1);
    assert_eq!(p.len(), 250);
    assert!(p[0] > p[1] && p[1] > p[249]);

    let small = ok(&["metrics", "--fig", "2", "--n", "4"]);
    assert_eq!(small, "j_tot,p_df_jtot\n1,0.666666666667\n2,0.5\n");
    assert_eq!(run(&["metrics", "--fig", "2", "--n", "5"]).status.code(), Some(2));
    assert_eq!(run(&["metrics", "--fig", "3"]).status.code(), Some(2));
}

#[test]
fn encode4_examples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("enc.json");

    let uniform = write(&dir, "u.json", r#"{"preset":"uniform","value":1}"#);
    let degenerate = run(&["encode4", "--b", s(&uniform), "--out", s(&out)]);
    assert_eq!(degenerate.status.code(), Some(3));
    let export: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(export["degenerate"], true);

    // b13 = b23 and b24 = b14 ≠ b13
    let omega2_zero = write(
        &dir,
        "g.json",
        r#"{"n":4,"b":{"matrix":[
            [[0,0],[0.3,0],[0.5,0],[0.9,0]],
            [[0.3,0],[0,0],[0.5,0],[0.9,0]],
            [[0.5,0],[0.5,0],[0,0],[0.2,0]],
            [[0.9,0],[0.9,0],[0.2,0],[0,0]]]}}"#,
    );
    ok(&["encode4", "--b", s(&omega2_zero), "--out", s(&out)]);
    let export: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(export["omega2"].as_f64().unwrap().abs() < 1e-12);
    let zero_l = state_from_json(4, &export["states"][0]["amplitudes"]);
    assert!(zero_l.overlap(four_qubit_basis().state('g').unwrap()) > 1.0 - 1e-12);

    let seeded = write(&dir, "r.json", r#"{"preset":"random","seed":11}"#);
    let export: Value = serde_json::from_str(&ok(&["encode4", "--b", s(&seeded)])).unwrap();
    let states = export["states"].as_array().unwrap();
    assert_eq!(states.len(), 3);
    for st in states {
        assert!(st["coupling_residual"].as_f64().unwrap() < 1e-10, "{st}");
    }

    let wrong_size = write(&dir, "n3.json", r#"{"n":3,"b":{"preset":"uniform","value":1}}"#);
    assert_eq!(run(&["encode4", "--b", s(&wrong_size)]).status.code(), Some(2));
    let complex = write(
        &dir,
        "c.json",
        r#"{"matrix":[
            [[0,0],[0,1],[0,0],[0,0]],
            [[0,-1],[0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]]]}"#,
    );
    assert_eq!(run(&["encode4", "--b", s(&complex)]).status.code(), Some(2));
}

#[test]
fn reproduce_figures_is_deterministic() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    ok(&["reproduce-figures", "--out-dir", s(first.path())]);
    let out = bin()
        .args(["reproduce-figures", "--out-dir", s(second.path())])
        .env("COLLECTIVE_DFS_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    for name in ["fig1.csv", "fig2.csv", "fig2_series.csv"] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between runs");
    }
    let series = std::fs::read_to_string(first.path().join("fig2_series.csv")).unwrap();
    assert!(series.starts_with("n,p_jtot_1,p_jtot_2,p_jtot_half\n6,"));
    for line in series.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] > v[2] && v[2] > v[3], "{line}");
    }

    let bad = bin()
        .args(["reproduce-figures", "--out-dir", s(first.path())])
        .env("COLLECTIVE_DFS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn text_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"n":4,"a":{"uniform":0.5},"b":{"preset":"random","seed":5}}"#);
    let runs = [
        vec!["cdfs", "--model", s(&model)],
        vec!["evolve", "--model", s(&model), "--state", "omega-one-plus", "--t", "2"],
        vec!["encode4", "--b", s(&model)],
    ];
    for args in runs {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}

#[test]
fn every_command_has_help() {
    for cmd in ["decompose", "cdfs", "evolve", "metrics", "encode4", "reproduce-figures"] {
        let text = ok(&[cmd, "--help"]);
        assert!(text.contains("Usage"), "{cmd}");
    }
    assert!(ok(&["--help"]).contains("reproduce-figures"));
}
