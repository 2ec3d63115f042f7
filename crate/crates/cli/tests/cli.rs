use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thickknot"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thickknot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn octagon() -> PathBuf {
    let vs: Vec<[f64; 3]> = (0..8)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 8.0;
            [a.cos(), a.sin(), 0.0]
        })
        .collect();
    scratch("octagon.json", &serde_json::json!({ "vertices": vs }).to_string())
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn ok(cmd: &mut Command) -> Value {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    json(&out)
}

#[test]
fn octagon_thickness_closed_form() {
    let v = ok(bin().args(["thickness", "--in"]).arg(octagon()));
    let close = |k: &str, want: f64| (v[k].as_f64().unwrap() - want).abs() < 1e-6;
    assert!(close("min_rad", 0.923880));
    assert!(close("dcsd", 1.847759));
    assert!(close("thickness", 0.923880));
    assert!(close("ropelength", 6.627417));
}

#[test]
fn curl_sweep_has_one_r1_event() {
    let v = ok(bin().args(["sweep", "--path"]).arg(data("curl.json")).args(["--dir", "0,0,1"]));
    let events = v["events"].as_array().unwrap();
    assert_eq!(events.len(), 1);
    assert!(events[0]["kind"].as_str().unwrap().starts_with("R1"));
    assert!(events[0]["lambda"].as_f64().unwrap() >= 6.283185);
}

#[test]
fn radius_zero_ball_is_one_vertex() {
    let v = ok(bin().args(["ball", "--pd", "empty", "--radius", "0"]));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 1);
    assert!(v["edges"].as_array().unwrap().is_empty());
}

#[test]
fn trefoil_pd_text() {
    let v = ok(bin().args(["diagram", "--pd", "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)"]));
    assert_eq!(v["crossings"], 3);
    assert_eq!(v["determinant"], 3);
}

#[test]
fn tighten_requires_seed() {
    let out = bin().args(["tighten", "--in"]).arg(octagon()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_direction_is_usage_error() {
    let out = bin().args(["project", "--in"]).arg(octagon()).args(["--dir", "1,2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_error_is_structured() {
    let bad = scratch("folded.json", r#"{"vertices": [[0,0,0],[1,0,0],[0,0,0]]}"#);
    let out = bin().args(["thickness", "--in"]).arg(bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "InvalidPolygon");

    let out = bin().args(["project", "--in"]).arg(octagon()).args(["--dir", "0,0,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "InvalidDirection");
}

#[test]
fn tighten_replays_byte_identical() {
    let cfg = scratch("tighten.json", r#"{"seed": 5, "iterations": 3000, "restarts": 2}"#);
    let run = || {
        bin().args(["tighten", "--in"]).arg(octagon()).arg("--config").arg(&cfg).output().unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 5);
    assert!(v["ropelength"].as_f64().unwrap() <= v["initial_ropelength"].as_f64().unwrap());
}

#[test]
fn config_overrides_flags() {
    let cfg = scratch("radius.json", r#"{"radius": 1}"#);
    let v = ok(bin().args(["ball", "--pd", "empty", "--radius", "0", "--config"]).arg(cfg));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
}

#[test]
fn jobs_do_not_change_output() {
    let run = |jobs: &str| {
        bin().args(["merge-tree", "--in"]).arg(data("two_cluster.json")).args(["--jobs", jobs]).output().unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["internal_nodes"], 1);
}

#[test]
fn out_flag_writes_file() {
    let target = std::env::temp_dir().join(format!("thickknot-cli-out-{}.json", std::process::id()));
    let out = bin().args(["ball", "--pd", "empty", "--radius", "1", "--out"]).arg(&target).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 5);
}

#[test]
fn recognition_and_growth_on_unknot_family() {
    let v = ok(bin().args(["recognize", "--in"]).arg(data("unknot_moves.json")).args(["--radius", "1"]));
    assert!(v["lambda"].as_f64().unwrap() >= 6.283185);
    assert_eq!(v["caveat"], "empirical-upper-bound");

    let g = ok(bin().args(["growth", "--in"]).arg(data("unknot_moves.json")));
    let levels = g["levels"].as_array().unwrap();
    let top = levels.last().unwrap();
    // the round representative is a second, unlinked crossingless vertex
    assert_eq!(top["vertices"], 5);
    // the pentagon moves are not reachable from the ideal round vertex
    assert!(top["reidemeister_radius"].is_null());
    assert_eq!(top["components"], 2);
}
