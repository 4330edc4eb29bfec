use std::path::PathBuf;

use super::*;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("szwalk").chain(args.iter().copied()).map(String::from).collect()
}

fn cfg(args: &[&str]) -> RunConfig {
    parse_config(argv(args)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    match parse_config(argv(args)) {
        Ok(c) => match run_command(&c) {
            Ok(o) => i32::from(!o.passed),
            Err(e) => e.exit_code(),
        },
        Err(e) => e.exit_code(),
    }
}

#[test]
fn fixture_source_and_defaults() {
    let c = cfg(&["spectrum", "--fixture", "cycle:4"]);
    assert_eq!(c.command, Command::Spectrum);
    assert_eq!(c.input, Some(InputSource::Fixture("cycle:4".into())));
    assert_eq!(c.steps, DEFAULT_STEPS);
    assert_eq!(c.weight, WeightMode::Grover);
    assert_eq!(c.one_form, None);
    assert_eq!(c.tol_ker, 1e-9);
}

#[test]
fn simulate_flags() {
    let c = cfg(&["simulate", "--graph", "g.json", "--steps", "500", "--init", "arc:0"]);
    assert_eq!(c.input, Some(InputSource::Graph(PathBuf::from("g.json"))));
    assert_eq!(c.steps, 500);
    assert_eq!(c.init, "arc:0");
}

#[test]
fn two_sources_is_usage_error() {
    let e = parse_config(argv(&["spectrum", "--fixture", "cycle:4", "--graph", "g.json"])).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn missing_source_and_unknown_command() {
    assert_eq!(parse_config(argv(&["spectrum"])).unwrap_err().exit_code(), 2);
    assert_eq!(parse_config(argv(&["transmogrify"])).unwrap_err().exit_code(), 2);
    assert_eq!(parse_config(argv(&["fuzz", "--fixture", "cycle:3"])).unwrap_err().exit_code(), 2);
}

#[test]
fn tolerances_must_be_positive() {
    for bad in ["0", "-1e-9", "NaN"] {
        let e = parse_config(argv(&["spectrum", "--fixture", "cycle:4", "--tol-ker", bad])).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{bad}");
    }
}

#[test]
fn random_seed_and_window_parsing() {
    let c = cfg(&["localize", "--random", "6,3,9", "--window", "5,40"]);
    assert_eq!(c.input, Some(InputSource::Random { dim_h: 6, dim_k: 3, seed: 9 }));
    assert_eq!(c.window, Some((5, 40)));
    assert_eq!(cfg(&["fuzz", "--seeds", "3..7"]).seeds, (3, 7));
    assert_eq!(cfg(&["fuzz", "--seeds", "3..=7"]).seeds, (3, 8));
    assert!(parse_config(argv(&["fuzz", "--seeds", "7..3"])).is_err());
    assert!(parse_config(argv(&["localize", "--random", "6,3"])).is_err());
    assert!(parse_config(argv(&["localize", "--random", "6,3,1", "--window", "9,2"])).is_err());
}

#[test]
fn config_file_layering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"fixture": "cycle:5", "steps": 7, "one-form": [0.5, 0, 0, 0, 0], "cesaro": true}"#).unwrap();
    let p = path.to_str().unwrap();
    let c = cfg(&["simulate", "--config", p, "--steps", "9"]);
    assert_eq!(c.input, Some(InputSource::Fixture("cycle:5".into())));
    assert_eq!(c.steps, 9);
    assert_eq!(c.one_form, Some(vec![0.5, 0.0, 0.0, 0.0, 0.0]));
    assert!(c.cesaro);
    let c = cfg(&["simulate", "--config", p, "--one-form", "0,0,0,0,1"]);
    assert_eq!(c.one_form, Some(vec![0.0, 0.0, 0.0, 0.0, 1.0]));
    // a flag source plus a file source is still two sources
    assert_eq!(parse_config(argv(&["simulate", "--config", p, "--random", "4,2,1"])).unwrap_err().exit_code(), 2);
}

#[test]
fn config_file_rejects_unknown_keys_and_bad_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"fixture": "cycle:5", "stepz": 7}"#).unwrap();
    let p = path.to_str().unwrap().to_string();
    assert_eq!(parse_config(argv(&["spectrum", "--config", &p])).unwrap_err().exit_code(), 2);
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(parse_config(argv(&["spectrum", "--config", &p])).unwrap_err().exit_code(), 2);
    let missing = dir.path().join("absent.json");
    let e = parse_config(argv(&["spectrum", "--config", missing.to_str().unwrap()])).unwrap_err();
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn spectrum_cycle4_csv() {
    let out = run_command(&cfg(&["spectrum", "--fixture", "cycle:4"])).unwrap();
    let mut lines = out.body.lines();
    assert_eq!(lines.next(), Some("angle,re,im,multiplicity,provenance"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let total: usize = rows.iter().map(|r| r[3].parse::<usize>().unwrap()).sum();
    assert_eq!(total, 8);
    let mut angles: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    assert_eq!(angles.len(), 4);
}

#[test]
fn generator_verify_cycle3_passes() {
    assert_eq!(code(&["generator", "--fixture", "cycle:3", "--verify"]), 0);
    let out = run_command(&cfg(&["generator", "--fixture", "cycle:3", "--verify"])).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&out.body).unwrap();
    assert_eq!(doc["block_dims"]["D1_plus"], 2);
    assert_eq!(doc["report"]["passed"], true);
}

#[test]
fn simulate_single_edge_alternates() {
    let out = run_command(&cfg(&["simulate", "--fixture", "single-edge", "--steps", "4"])).unwrap();
    let rows: Vec<&str> = out.body.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for (n, pair) in rows.chunks(2).enumerate() {
        let p0: f64 = pair[0].split(',').nth(2).unwrap().parse().unwrap();
        let expected = if n % 2 == 0 { 1.0 } else { 0.0 };
        assert!((p0 - expected).abs() < 1e-15, "n={n}: {p0}");
    }
}

#[test]
fn simulate_cesaro_and_limit_rows() {
    let out = run_command(&cfg(&["simulate", "--fixture", "single-edge", "--steps", "4", "--cesaro", "--limit"])).unwrap();
    let tail: Vec<&str> = out.body.lines().rev().take(4).collect();
    assert!(tail[0].starts_with("-1,") && tail[1].starts_with("-1,"));
    assert!(tail[2].starts_with("-2,") && tail[3].starts_with("-2,"));
    for row in tail {
        let p: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((p - 0.5).abs() < 1e-12, "{row}");
    }
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["simulate", "--random", "7,3,4", "--steps", "20", "--init", "random:5"][..],
        &["spectrum", "--fixture", "complete:4"][..],
        &["validate", "--fixture", "cycle:5", "--one-form", "0.3,0,0,0,0"][..],
    ] {
        let a = run_command(&cfg(args)).unwrap().body;
        let b = run_command(&cfg(args)).unwrap().body;
        assert_eq!(a, b);
    }
}

#[test]
fn validate_passes_on_twisted_cycle() {
    assert_eq!(code(&["validate", "--fixture", "cycle:5", "--one-form", "0.3,0,0,0,0"]), 0);
    let out = run_command(&cfg(&["validate", "--fixture", "cycle:4", "--no-derived"])).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&out.body).unwrap();
    assert!(doc["walk"].get("u").is_none());
    assert!(doc["walk"].get("d_a").is_some());
}

#[test]
fn bad_inputs_are_usage_errors() {
    assert_eq!(code(&["spectrum", "--fixture", "dodecahedron"]), 2);
    assert_eq!(code(&["simulate", "--fixture", "cycle:3", "--init", "arc:99"]), 2);
    assert_eq!(code(&["simulate", "--fixture", "cycle:3", "--one-form", "1,2"]), 2);
    assert_eq!(code(&["spectrum", "--fixture", "cycle:3", "--weight", "explicit"]), 2);
    assert_eq!(code(&["spectrum", "--graph", "/nonexistent/g.json"]), 3);
}

#[test]
fn infer_graph_from_unitary_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let w = crate::fixtures::three_by_three_unitary();
    let doc = serde_json::json!({
        "matrix": crate::linop::OperatorJson::from(&w),
        "blocks": [{"label": "a", "indices": [0]}, {"label": "b", "indices": [1, 2]}],
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = run_command(&cfg(&["infer-graph", "--unitary", path.to_str().unwrap()])).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
    let arcs: Vec<(String, String)> = serde_json::from_value(v["arcs"].clone()).unwrap();
    assert_eq!(arcs.len(), 4);
    assert!(arcs.contains(&("a".into(), "b".into())) && arcs.contains(&("b".into(), "a".into())));
    assert_eq!(code(&["spectrum", "--unitary", path.to_str().unwrap()]), 2);
}

#[test]
fn fuzz_table() {
    let out = run_command(&cfg(&["fuzz", "--seeds", "1..4"])).unwrap();
    assert!(out.passed, "{}", out.body);
    assert_eq!(out.body.lines().count(), 5);
    assert!(out.body.ends_with("3 of 3 instances passed\n"));
}
