use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mpgrad::io::{parse_filtration, parse_measure};
use mpgrad::{hilbert_measure, rank_measure};
use tempfile::TempDir;

fn mpgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpgrad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn bundled(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

/// Two vertices at (0,0) and (1,0) joined by an edge at (1,1).
fn two_vertex(dir: &Path) -> (String, String) {
    (
        write(dir, "k.txt", "0\n1\n0,1\n"),
        write(dir, "f.txt", "0,0\n1,0\n1,1\n"),
    )
}

#[test]
fn compute_two_vertex_hilbert() {
    let d = TempDir::new().unwrap();
    let (k, f) = two_vertex(d.path());
    let o = mpgrad(&["compute", "--complex", &k, "--filtration", &f, "--n", "2", "--degree", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "loc_1,loc_2,multiplicity\n0,0,+1\n1,0,+1\n1,1,-1\n");
    assert!(stderr(&o).contains("total mass 1"));
}

#[test]
fn compute_output_round_trips() {
    let d = TempDir::new().unwrap();
    let (k, f) = two_vertex(d.path());
    let filtration = parse_filtration(
        &fs::read_to_string(&k).unwrap(),
        &fs::read_to_string(&f).unwrap(),
        2,
    )
    .unwrap();
    for (descriptor, expected) in [
        ("hilbert", hilbert_measure(&filtration, 0)),
        ("rank", rank_measure(&filtration, 0).unwrap()),
    ] {
        let out = d.path().join(format!("{descriptor}.csv"));
        let o = mpgrad(&[
            "compute", "--complex", &k, "--filtration", &f, "--n", "2",
            "--descriptor", descriptor, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(parse_measure(&fs::read_to_string(&out).unwrap()).unwrap(), expected);
        let o = mpgrad(&["distance", out.to_str().unwrap(), out.to_str().unwrap()]);
        assert_eq!(stdout(&o).trim(), "0");
    }
}

#[test]
fn compute_high_degree_is_empty() {
    let d = TempDir::new().unwrap();
    let (k, f) = two_vertex(d.path());
    let out = d.path().join("m.csv");
    let o = mpgrad(&[
        "compute", "--complex", &k, "--filtration", &f, "--n", "2", "--degree", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(out).unwrap(), "loc_1,loc_2,multiplicity\n");
}

#[test]
fn data_errors_exit_with_two() {
    let d = TempDir::new().unwrap();
    let (k, f) = two_vertex(d.path());
    let o = mpgrad(&["compute", "--complex", &k, "--filtration", &f, "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1: expected 3 values, found 2"), "{}", stderr(&o));

    let open = write(d.path(), "open.txt", "0\n0,1\n");
    let vals = write(d.path(), "open_f.txt", "0\n1\n");
    let o = mpgrad(&["compute", "--complex", &open, "--filtration", &vals, "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing its face [1]"), "{}", stderr(&o));

    let bad = write(d.path(), "bad_f.txt", "1\n0\n0\n");
    let o = mpgrad(&["compute", "--complex", &k, "--filtration", &bad, "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(mpgrad(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mpgrad(&["compute", "--n", "2"]).status.code(), Some(1));
    assert_eq!(mpgrad(&["distance", "/no/such/file", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(mpgrad(&["--help"]).status.code(), Some(0));
}

#[test]
fn distance_examples() {
    let d = TempDir::new().unwrap();
    let a = write(d.path(), "a.csv", "loc_1,loc_2,multiplicity\n0,0,+1\n");
    let b = write(d.path(), "b.csv", "loc_1,loc_2,multiplicity\n3,4,+1\n");
    let c = write(d.path(), "c.csv", "loc_1,loc_2,multiplicity\n3,4,+2\n");
    let plan = d.path().join("plan.csv");
    let o = mpgrad(&["distance", &a, &b, "--ground", "rn", "--out", plan.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "4");
    assert_eq!(
        fs::read_to_string(plan).unwrap(),
        "left_measure,left_index,right_measure,right_index,cost\na,0,b,0,4\n"
    );
    assert_eq!(stdout(&mpgrad(&["distance", &a, &a])).trim(), "0");

    let o = mpgrad(&["distance", &a, &c]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "inf");
    assert!(stderr(&o).contains("WARN"));

    let o = mpgrad(&["distance", &a, &b, "--ground", "bars"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn landscape_of_the_chain() {
    let d = TempDir::new().unwrap();
    let k = write(d.path(), "k.txt", "0\n1\n0,1\n");
    let f = write(d.path(), "f.txt", "0\n1\n2\n");
    let z = write(d.path(), "z.csv", "1.5\n-1\n");
    let o = mpgrad(&["landscape", "--complex", &k, "--filtration", &f, "--n", "1", "--k", "2", "--points", &z]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "z_1,value\n1.5,0.5\n-1,0\n");
}

fn config(dir: &Path, body: &str) -> String {
    write(dir, "run.json", body)
}

#[test]
fn zero_epochs_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let cfg = config(
        d.path(),
        r#"{"points": {"uniform_square": {"count": 5, "seed": 1}},
            "pipeline": {"kind": "rips"},
            "loss": {"kind": "distance", "target": "zero", "degree": 1},
            "schedule": {"kind": "harmonic", "a0": 0.1},
            "epochs": 0}"#,
    );
    let o = mpgrad(&["optimize", "--config", &cfg, "--out", d.path().join("t").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epochs"));
}

#[test]
fn optimize_is_deterministic_and_writes_every_epoch() {
    let d = TempDir::new().unwrap();
    let cfg = config(
        d.path(),
        r#"{"points": {"uniform_square": {"count": 10, "seed": 3}},
            "pipeline": {"kind": "function_rips", "bandwidth": {"fixed": 0.3}},
            "loss": {"kind": "distance", "target": "zero", "degree": 1, "sign": -1},
            "schedule": {"kind": "harmonic", "a0": 0.5},
            "epochs": 4, "noise": 0.01}"#,
    );
    let run = |name: &str| {
        let out = d.path().join(name);
        let o = mpgrad(&["optimize", "--config", &cfg, "--seed", "11", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let log = fs::read_to_string(a.join("trajectory.jsonl")).unwrap();
    assert_eq!(log, fs::read_to_string(b.join("trajectory.jsonl")).unwrap());
    assert_eq!(log.lines().count(), 5);
    for e in 0..5 {
        let name = format!("epoch_{e:04}.csv");
        assert_eq!(
            fs::read_to_string(a.join(&name)).unwrap(),
            fs::read_to_string(b.join(&name)).unwrap()
        );
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 11);
}

#[test]
fn optimize_filtration_values() {
    let d = TempDir::new().unwrap();
    write(d.path(), "k.txt", "0\n1\n2\n0,1\n1,2\n0,2\n");
    write(d.path(), "f.txt", "0\n0.5\n1\n1.5\n2\n2.5\n");
    let cfg = config(
        d.path(),
        r#"{"complex": "k.txt", "filtration": "f.txt", "n": 1,
            "loss": {"kind": "integration", "integrand": {"norm_power": 2.0}, "degree": 0},
            "schedule": {"kind": "constant", "a0": 0.01},
            "epochs": 3}"#,
    );
    let out = d.path().join("t");
    let o = mpgrad(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(summary["final_loss"].as_f64().unwrap() < summary["initial_loss"].as_f64().unwrap());
    assert_eq!(fs::read_to_string(out.join("complex.txt")).unwrap(), "0\n1\n2\n0,1\n0,2\n1,2\n");
    assert_eq!(fs::read_to_string(out.join("epoch_0000.csv")).unwrap(), "0\n0.5\n1\n1.5\n2.5\n2\n");
}

#[test]
fn bundled_two_parameter_run() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("t");
    let o = mpgrad(&["optimize", "--config", &bundled("unit-square-2param.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(s["final_loss"].as_f64().unwrap() > s["initial_loss"].as_f64().unwrap());
    assert!(s["max_norm"].as_f64().unwrap() < 3.0);
}

#[test]
fn bundled_one_parameter_run() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("t");
    let o = Command::new(env!("CARGO_BIN_EXE_mpgrad"))
        .args(["optimize", "--config", &bundled("unit-square-1param.json"), "--out", out.to_str().unwrap()])
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("diameter ratio"));
    let s: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(s["diameter_ratio"].as_f64().unwrap() > 2.0);
}
