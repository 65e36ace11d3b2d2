use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphdesign")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_slice(&run(&all).stdout).expect("valid json")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sphdesign-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), 3);
    assert_eq!(code(&["verify"]), 3);
    assert_eq!(code(&["verify", "--catalog", "no_such_thing"]), 3);
    assert_eq!(code(&["verify", "--config", "/nonexistent/file.cfg"]), 3);
    assert_eq!(code(&["verify", "--catalog", "hexagon"]), 0);
    assert_eq!(code(&["verify", "--catalog", "hexagon", "--min-strength", "6"]), 1);
    assert_eq!(code(&["certify", "--catalog", "hexagon"]), 0);
    assert_eq!(code(&["certify", "--catalog", "icosahedron"]), 1);
    assert_eq!(code(&["dims", "--max-m", "5", "--variant", "nope"]), 3);
}

#[test]
fn errors_go_to_stderr() {
    let out = run(&["verify", "--catalog", "no_such_thing"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_thing"));
}

#[test]
fn catalog_lists_every_entry() {
    let out = String::from_utf8(run(&["catalog"]).stdout).unwrap();
    for name in sphdesign::configs::CATALOG_NAMES {
        assert!(out.contains(name), "{name} missing");
    }
}

#[test]
fn config_file_matches_builtin() {
    let dir = scratch("config");
    let f = dir.join("e6.cfg");
    assert_eq!(code(&["catalog", "e6_min", "--out", s(&f)]), 0);
    let a = json(&["verify", "--catalog", "e6_min"]);
    let b = json(&["verify", "--config", s(&f)]);
    assert_eq!(a["design"]["strength"], b["design"]["strength"]);
    assert_eq!(a["angles"], b["angles"]);
    assert_eq!(a["design"]["tight"], b["design"]["tight"]);
    assert_eq!(b["design"]["strength"], 5);
}

#[test]
fn certificate_round_trip() {
    let dir = scratch("cert");
    let cert = dir.join("d4.alpha");
    assert_eq!(code(&["certify", "--catalog", "d4_min", "--save-certificate", s(&cert)]), 0);
    assert!(cert.exists());
    assert_eq!(code(&["certify", "--catalog", "d4_min", "--certificate", s(&cert)]), 0);
    assert_eq!(code(&["structure", "--catalog", "d4_min", "--certificate", s(&cert)]), 0);
    let v = json(&["derive", "--catalog", "d4_min", "--certificate", s(&cert)]);
    let sizes: Vec<u64> = v["levels"].as_array().unwrap().iter().map(|l| l["size"].as_u64().unwrap()).collect();
    assert_eq!(sizes, vec![6, 12, 6]);

    // a certificate for the wrong configuration is rejected
    assert_ne!(code(&["certify", "--catalog", "e6_min", "--certificate", s(&cert)]), 0);
}

#[test]
fn derive_writes_level_files() {
    let dir = scratch("derive");
    let out = dir.join("levels");
    assert_eq!(code(&["derive", "--catalog", "d4_min", "--out", s(&out)]), 0);
    let files = std::fs::read_dir(&out).unwrap().count();
    assert_eq!(files, 3);
    let lvl = out.join("level_0.cfg");
    let v = json(&["verify", "--config", s(&lvl), "--t-max", "4"]);
    assert!(v["design"]["strength"].as_u64().unwrap() >= 3);
}

#[test]
fn manifest_is_deterministic() {
    let dir = scratch("manifest");
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    for m in [&a, &b] {
        assert_eq!(code(&["--manifest", s(m), "certify", "--catalog", "icosahedron"]), 1);
    }
    let read = |p: &PathBuf| -> Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (ma, mb) = (read(&a), read(&b));
    assert_eq!(ma["report_sha256"], mb["report_sha256"]);
    assert_eq!(ma["inputs"], mb["inputs"]);
    assert_eq!(ma["exit_code"], 1);
    assert_eq!(ma["command"], "certify");
    assert!(ma["witnesses"].as_array().unwrap().iter().any(|w| w[0] == "n0" && w[1] == "16/3"));
    assert_eq!(ma["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn json_and_text_agree() {
    let v = json(&["verify", "--catalog", "hexagon"]);
    assert_eq!(v["design"]["strength"], 5);
    let text = String::from_utf8(run(&["verify", "--catalog", "hexagon"]).stdout).unwrap();
    assert!(text.contains("strength: 5"));
    assert!(text.contains("tight: yes"));
}

#[test]
fn structure_on_a_non_minimal_design_fails() {
    assert_eq!(code(&["structure", "--catalog", "icosahedron"]), 1);
}
