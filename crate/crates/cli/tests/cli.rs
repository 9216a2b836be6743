use std::process::{Command, Output};

use serde_json::Value;

fn fanlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fanlab"))
        .args(args)
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = fanlab(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn rational(v: &Value) -> (String, String) {
    (
        v["num"].as_str().unwrap().to_string(),
        v["den"].as_str().unwrap().to_string(),
    )
}

#[test]
fn validate_exit_codes() {
    assert_eq!(
        fanlab(&["validate", "--catalog", "p2"]).status.code(),
        Some(0)
    );
    assert_eq!(
        fanlab(&["validate", "--catalog", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(fanlab(&["validate"]).status.code(), Some(2));
    assert_eq!(fanlab(&["frobnicate"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("fanlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("overlap.json");
    std::fs::write(
        &bad,
        r#"{"color_table": {}, "format_version": 1, "lattice_rank": 2, "mode": "toric",
            "maximal_cones": [{"rays": [0, 1]}, {"rays": [0, 2]}],
            "rays": [[1, 0], [0, 1], [1, 1]]}"#,
    )
    .unwrap();
    let (code, v) = json(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["valid"], Value::Bool(false));
    let missing = dir.join("missing.json");
    assert_eq!(
        fanlab(&["validate", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn catalog_show_round_trips_through_input() {
    let out = fanlab(&["catalog", "show", "incidence:4,2"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = std::env::temp_dir().join(format!("fanlab-cli-rt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("incidence.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let (code, v) = json(&["invariants", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["picard_number"], 2);
    assert_eq!(v["dimension"], 10);
    let list = fanlab(&["catalog", "list"]);
    assert!(String::from_utf8(list.stdout)
        .unwrap()
        .lines()
        .any(|l| l == "incidence:m,k"));
}

#[test]
fn cones_and_certificates() {
    let (code, v) = json(&["cones", "--catalog", "f1"]);
    assert_eq!(code, 1);
    assert_eq!(v["equal"], false);
    assert_eq!(
        rational(&v["certificate"]["value"]),
        ("-1".into(), "1".into())
    );
    let (code, v) = json(&["cones", "--catalog", "incidence:4,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["equal"], true);
    let (code, v) = json(&["cones", "--catalog", "f1xp1", "--k", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["equal"], false);
    let (code, _) = json(&["cones", "--catalog", "p1p1p1", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(
        fanlab(&["cones", "--catalog", "p2", "--k", "5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn intersections_are_exact_rationals() {
    let (code, v) = json(&["intersect", "--catalog", "p112", "--rays", "0,0"]);
    assert_eq!(code, 0);
    assert_eq!(rational(&v["value"]), ("1".into(), "2".into()));
    let (code, v) = json(&["intersect", "--catalog", "incidence:4,2", "--divisor", "a1"]);
    assert_eq!(code, 0);
    let values: Vec<(String, String)> = v["intersections"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| rational(&r["value"]))
        .collect();
    assert!(values.contains(&("1".into(), "1".into())));
    let (code, v) = json(&["divisors", "--catalog", "p112", "--divisor", "r0"]);
    assert_eq!(code, 0);
    assert_eq!(v["pl"]["cartier"], false);
    assert_eq!(v["pl"]["q_cartier"], true);
}

#[test]
fn mori_and_classify() {
    let (code, v) = json(&["mori", "--catalog", "incidence-blowup:4,2"]);
    assert_eq!(code, 0);
    let rays = v["extremal_rays"].as_array().unwrap();
    let idx = rays
        .iter()
        .position(|r| {
            r["curves"]
                .as_array()
                .unwrap()
                .iter()
                .any(|c| c["curve"].as_str().unwrap().starts_with("C(a2"))
        })
        .unwrap();
    let (code, v) = json(&[
        "mori",
        "--catalog",
        "incidence-blowup:4,2",
        "--ray",
        &idx.to_string(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["kind"], "divisorial");
    assert_eq!(v["target"]["maximal_cones"][0]["colors"][0], "a2");
    let (code, v) = json(&["classify", "--catalog", "incidence:4,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["factor_picard_numbers"], serde_json::json!([1]));
    let (code, v) = json(&["classify", "--catalog", "f1"]);
    assert_eq!(code, 1);
    assert_eq!(v["nef1_eq_psef1"], false);
}

#[test]
fn thread_cap_does_not_change_output() {
    let a = fanlab(&[
        "cones",
        "--catalog",
        "f1xp1",
        "--k",
        "2",
        "--format",
        "json",
    ]);
    let b = Command::new(env!("CARGO_BIN_EXE_fanlab"))
        .args([
            "cones",
            "--catalog",
            "f1xp1",
            "--k",
            "2",
            "--format",
            "json",
        ])
        .env("FANLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}
