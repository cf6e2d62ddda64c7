use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn crnt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn parametrize_histidine_json() {
    let f = fixture("networks/histidine.crn");
    let out = crnt(&["parametrize", f.to_str().unwrap(), "--json", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "parametrized");
    assert_eq!(v["structure"]["deficiency"], 1);
    assert_eq!(v["translation"]["certificate"]["holds"], true);
    assert_eq!(v["efm"]["modes"][0]["vector"][0], "1/1");
    assert!(v["parametrization"]["residuals"]["mass_action"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["gcrn"]["phantom_edges"][0]["label"], "sigma1");
    assert!(v.get("timings_ms").is_none());
}

#[test]
fn sbml_input_gives_same_translation() {
    let a = json(&crnt(&["translate", fixture("sbml/histidine.xml").to_str().unwrap(), "--json"]));
    let b = json(&crnt(&["translate", fixture("networks/histidine.crn").to_str().unwrap(), "--json"]));
    assert_eq!(a["translation"]["reactions"], b["translation"]["reactions"]);
    assert_eq!(a["format"], "sbml");
}

#[test]
fn text_output_and_early_verbs() {
    let f = fixture("networks/mapk.crn");
    let out = crnt(&["efm", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("mapk.crn: stopped after efm"), "{text}");
    assert!(text.contains("flux modes: 8"));
    let v = json(&crnt(&["analyze", f.to_str().unwrap(), "--json"]));
    assert_eq!(v["structure"]["deficiency"], 2);
    assert!(v.get("efm").is_none());
}

#[test]
fn sigma_and_distinguished_flags() {
    let f = fixture("networks/mapk.crn");
    let v = json(&crnt(&["parametrize", f.to_str().unwrap(), "--json", "--sigma", "sigma1=2.0"]));
    let s = &v["parametrization"]["sigma"];
    assert_eq!(s["sigma1"], 2.0);
    assert_eq!(v["parametrization"]["conditions"][0]["solved_for"], "sigma2");
    let v = json(&crnt(&["parametrize", f.to_str().unwrap(), "--json", "--distinguished", "10"]));
    assert_eq!(v["gcrn"]["vertices"][10]["distinguished"], true);
    assert_eq!(v["status"], "parametrized");
    let bad = crnt(&["parametrize", f.to_str().unwrap(), "--sigma", "0=1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.crn");
    std::fs::write(&one, "a: A -> B\n").unwrap();
    let out = crnt(&["translate", one.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("efm_rejected"));

    let broken = dir.path().join("broken.crn");
    std::fs::write(&broken, "a: A -> B\nb: C -> C\n").unwrap();
    let out = crnt(&["translate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("self-loop"), "{err}");

    let rates = dir.path().join("rates.txt");
    std::fs::write(&rates, "nope = 1\n").unwrap();
    let h = fixture("networks/histidine.crn");
    let out = crnt(&["parametrize", h.to_str().unwrap(), "--rates-file", rates.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let c9 = fixture("pathological/complete9.crn");
    let out = crnt(&["translate", c9.to_str().unwrap(), "--timeout-secs", "1", "--json"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "timeout");
}

#[test]
fn rates_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.txt");
    std::fs::write(&rates, "r1 = 2\nr2 = 3\nr3 = 5\nr4 = 7\n").unwrap();
    let h = fixture("networks/histidine.crn");
    let v = json(&crnt(&["parametrize", h.to_str().unwrap(), "--json", "--rates-file", rates.to_str().unwrap(), "--sigma", "1=1"]));
    let x = v["parametrization"]["point"]["X"].as_f64().unwrap();
    // x = k4 / sigma on the histidine parametrization.
    assert!((x - 7.0).abs() < 1e-12, "{x}");
}

#[test]
fn batch_counts_and_output_files() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["histidine", "zigzag", "mapk"] {
        std::fs::copy(fixture(&format!("networks/{f}.crn")), dir.path().join(format!("{f}.crn"))).unwrap();
    }
    std::fs::write(dir.path().join("corrupt.crn"), "a: A -> \n").unwrap();
    let out_dir = dir.path().join("out");
    let out = crnt(&[
        "batch",
        dir.path().to_str().unwrap(),
        "--parametrize",
        "--json",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["total"], 4);
    assert_eq!(v["counts"]["parametrized"], 3);
    assert_eq!(v["counts"]["parse_error"], 1);
    assert!(out_dir.join("zigzag.crn.json").is_file());
    assert!(out_dir.join("summary.json").is_file());
    assert!(!out_dir.join("corrupt.crn.json").exists());

    let again = crnt(&["batch", dir.path().to_str().unwrap(), "--parametrize", "--json"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn batch_of_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = crnt(&["batch", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "total 0:");
}
