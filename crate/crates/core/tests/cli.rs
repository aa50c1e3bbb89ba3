use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> (i32, Value, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_diffprod"))
        .args(args)
        .output()
        .expect("binary runs");
    let v = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (
        status.code().unwrap(),
        v,
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

#[test]
fn diagnose_exit_codes() {
    let (code, v, _) = cli(&["diagnose", &data("grid_sqbad.json")]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("good")));
    assert_eq!(v["xi_min"]["x1"], 3);
    let (code, v, _) = cli(&["diagnose", &data("f3.json")]);
    assert_eq!((code, v["verdict"].as_str()), (2, Some("bad_path")));
    let (code, v, _) = cli(&["diagnose", &data("impossible.json")]);
    assert_eq!((code, v["verdict"].as_str()), (2, Some("impossible")));
}

#[test]
fn synth_and_check() {
    let (code, v, _) = cli(&["synth", &data("badgrids1.json")]);
    assert_eq!(code, 2);
    assert_eq!(v["countermodel_verified"], true);
    let (code, _, err) = cli(&["synth", &data("g4.json")]);
    assert_eq!(code, 1, "{err}");

    let (code, v, _) = cli(&["check", "[v] p -> p", &data("f3.json")]);
    assert_eq!((code, v["result"].as_str()), (2, Some("refuted")));
    let (code, _, _) = cli(&["check", "[h] p -> p", &data("f3.json")]);
    assert_eq!(code, 0);
    let (code, v, _) = cli(&[
        "check",
        "[h] p -> p",
        &data("f3.json"),
        "--mode",
        "sampled",
        "--trials",
        "50",
    ]);
    assert_eq!(
        (code, v["result"].as_str()),
        (3, Some("no_counterexample_found"))
    );
}

#[test]
fn assemble_profile_matches() {
    let (code, v, _) = cli(&["assemble", &data("grid_sqbad.json"), "--summary"]);
    assert_eq!(code, 0);
    assert_eq!(v["profile"], v["xi"]);
    assert!(v.get("map").is_none());
    let (code, _, err) = cli(&[
        "assemble",
        &data("grid_sqbad.json"),
        "--xi",
        r#"{"x1":3,"x2":5,"y1":6,"y2":6}"#,
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("x2"), "{err}");
}

#[test]
fn game_replays_from_transcript() {
    let dir = std::env::temp_dir().join(format!("diffprod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("t.json");
    let out_s = out.to_str().unwrap();
    let (code, _, _) = cli(&[
        "game",
        "--cluster",
        r#"{"ii":3}"#,
        "--strategy",
        "from-pmorphism",
        "--rounds",
        "6",
        "--seed",
        "4",
        "--out",
        out_s,
    ]);
    assert_eq!(code, 0);
    let first = std::fs::read_to_string(&out).unwrap();
    let (code, replay, _) = cli(&[
        "game",
        "--cluster",
        r#"{"ii":3}"#,
        "--strategy",
        "from-pmorphism",
        "--rounds",
        "6",
        "--adversary",
        "scripted",
        "--script",
        out_s,
    ]);
    assert_eq!(code, 0);
    let first: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(first["transcript"], replay["transcript"]);

    let (code, v, _) = cli(&[
        "game",
        "--cluster",
        r#"{"ri":1,"ir":1}"#,
        "--adversary",
        "exhaustive",
        "--rounds",
        "6",
    ]);
    assert_eq!((code, v["outcome"].as_str()), (2, Some("stuck")));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn experiments_are_reproducible() {
    let (code, a, err) = cli(&["experiment", "nonfinax", "--k", "8", "--seed", "3"]);
    assert_eq!(code, 0, "{err}");
    let (_, b, _) = cli(&["experiment", "nonfinax", "--k", "8", "--seed", "3"]);
    assert_eq!(a, b);
    assert_eq!(a["verified"], true);
    let (code, _, err) = cli(&["experiment", "nonfinax", "--k", "2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn parse_and_classify() {
    let (code, v, _) = cli(&["parse", "p -> [h]<h> p"]);
    assert_eq!(code, 0);
    assert_eq!(v["vars"], serde_json::json!(["p"]));
    let (_, v, _) = cli(&["classify", "--cluster", r#"{"rr":1,"ri":1}"#]);
    assert_eq!(v["type"], "H2VSw");
    let (code, _, _) = cli(&["parse", "p ->"]);
    assert_eq!(code, 1);
}
