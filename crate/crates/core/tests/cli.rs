use std::process::{Command, Output};

fn szwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szwalk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_cycle4_has_four_angles_and_eight_states() {
    let o = szwalk(&["spectrum", "--fixture", "cycle:4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[3].parse::<usize>().unwrap()).sum::<usize>(), 8);
    let mut angles: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    assert_eq!(angles.len(), 4);
}

#[test]
fn generator_verify_cycle3_exits_zero() {
    let o = szwalk(&["generator", "--fixture", "cycle:3", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_single_edge_writes_ten_rows_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nu.csv");
    let o = szwalk(&["simulate", "--fixture", "single-edge", "--steps", "4", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().nth(2).unwrap().ends_with(",0.0000000000000000e0"));
}

#[test]
fn exit_codes() {
    assert_eq!(szwalk(&["spectrum", "--fixture", "cycle:4", "--graph", "g.json"]).status.code(), Some(2));
    assert_eq!(szwalk(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(szwalk(&["spectrum", "--graph", "/nonexistent/g.json"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing-dir").join("out.csv");
    let o = szwalk(&["spectrum", "--fixture", "cycle:4", "--output", blocked.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(szwalk(&["--help"]).status.code(), Some(0));
}

#[test]
fn graph_file_with_explicit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // path a-b-c; arc "k:f" runs along edge k, "k:b" against it
    let doc = serde_json::json!({
        "vertices": ["a", "b", "c"],
        "edges": [{"u": "a", "v": "b"}, {"u": "b", "v": "c"}],
        "weights": {
            "0:f": [1.0, 0.0], "0:b": [0.6, 0.0],
            "1:f": [0.0, 0.8], "1:b": [s, s],
        },
        "one_form": {"0": 0.25},
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let o = szwalk(&["validate", "--graph", p, "--weight", "explicit"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim_h"], 4);
    assert_eq!(v["report"]["passed"], true);

    // weights violating the vertex normalization are rejected up front
    let mut bad = doc.clone();
    bad["weights"]["0:f"] = serde_json::json!([0.5, 0.0]);
    std::fs::write(&path, bad.to_string()).unwrap();
    assert_eq!(szwalk(&["spectrum", "--graph", p, "--weight", "explicit"]).status.code(), Some(2));
}

#[test]
fn localize_and_fuzz_run() {
    let o = szwalk(&["localize", "--fixture", "cycle:4", "--init", "vertex-uniform:v0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["localizes"], true);
    let o = szwalk(&["fuzz", "--seeds", "20..23"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3 of 3 instances passed"));
}
