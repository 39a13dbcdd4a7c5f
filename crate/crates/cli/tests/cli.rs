use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn testdata() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata")
}

fn fixture(rel: &str) -> String {
    testdata().join(rel).display().to_string()
}

fn fzip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fzip")).args(args).output().expect("fzip runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn orbits_census_json() {
    let out = fzip(&["orbits", "--d", "2", "--dprime", "1", "--q", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["orbits"], 2);
    assert_eq!(v["mass"], "3/2");
    assert_eq!(v["group_order"], 6);
    assert_eq!(v["k_order"], 4);
}

#[test]
fn orbits_accept_explicit_weights() {
    let a = fzip(&["orbits", "--w", "1,0", "--q", "3", "--json"]);
    let b = fzip(&["orbits", "--d", "2", "--dprime", "1", "--q", "3", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn jacobson_prints_components_and_certificates() {
    let out = fzip(&["verify", "--suite", "jacobson", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("J_1 = "));
    assert!(text.contains("J_2 = "));
    assert!(text.contains("in [a,a]: "));
}

#[test]
fn goldens_match() {
    let dir = testdata().display().to_string();
    for suite in ["orbits", "jacobson"] {
        let out = fzip(&["verify", "--suite", suite, "--testdata", &dir, "--json"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        let v = json_of(&out);
        let golden = v["golden"].as_array().unwrap();
        assert!(!golden.is_empty());
        assert!(golden.iter().all(|g| g["matches"] == true));
    }
}

#[test]
fn missing_golden_fails() {
    let dir = std::env::temp_dir().join("fzip-empty-testdata");
    let out = fzip(&["verify", "--suite", "jacobson", "--testdata", &dir.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bless_requires_testdata() {
    assert_eq!(fzip(&["verify", "--all", "--bless"]).status.code(), Some(2));
}

#[test]
fn katz_check_exit_codes() {
    let ok = fzip(&["katz-check", "--chart", &fixture("katz/chart_identity.json"), "--omega", &fixture("katz/omega_zero.json")]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = fzip(&["katz-check", "--chart", &fixture("katz/chart_identity.json"), "--omega", &fixture("katz/omega_e12.json")]);
    assert_eq!(bad.status.code(), Some(1));
    let unip = fzip(&[
        "katz-check",
        "--json",
        "--chart",
        &fixture("katz/chart_unipotent.json"),
        "--omega",
        &fixture("katz/omega_e12.json"),
    ]);
    assert_eq!(unip.status.code(), Some(0));
    assert_eq!(json_of(&unip)["satisfied"], true);
}

#[test]
fn solve_finds_known_solution() {
    let out = fzip(&["solve", "--json", "--chart", &fixture("katz/chart_unipotent.json"), "--deg", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let e12: Value = serde_json::from_str(&std::fs::read_to_string(fixture("katz/omega_e12.json")).unwrap()).unwrap();
    assert!(v["solutions"].as_array().unwrap().contains(&e12));
}

#[test]
fn flipped_convention_is_accepted() {
    let args = |conv: &'static str| {
        fzip(&[
            "--sign-convention",
            conv,
            "katz-check",
            "--chart",
            &fixture("katz/chart_unipotent.json"),
            "--omega",
            &fixture("katz/omega_zero.json"),
        ])
    };
    // KS of omega = 0 is E12 dx in either frame here, so both reject it.
    assert_eq!(args("standard").status.code(), Some(1));
    assert_eq!(args("flipped").status.code(), Some(1));
}

#[test]
fn am_kernel_examples() {
    let alpha = json_of(&fzip(&["am-kernel", "--json", "--spec", &fixture("am/alpha_p.json")]));
    assert_eq!(alpha["dim"], 2);
    let mu = json_of(&fzip(&["am-kernel", "--json", "--spec", &fixture("am/mu_p_laurent.json")]));
    assert_eq!(mu["dim"], 1);
    let dlog: Value = serde_json::from_str("[[[[[-1],[1]]]]]").unwrap();
    assert_eq!(mu["basis"][0], dlog);
}

#[test]
fn parse_errors_report_byte_offsets() {
    let path = std::env::temp_dir().join("fzip-bad-chart.json");
    std::fs::write(&path, "{\"field\": 2,\n \"n\": ?}").unwrap();
    let out = fzip(&["solve", "--chart", &path.display().to_string(), "--deg", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte offset 19"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fzip(&["orbits", "--d", "2"]).status.code(), Some(2));
    assert_eq!(fzip(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(fzip(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fzip(&["orbits", "--d", "2", "--dprime", "1", "--q", "6"]).status.code(), Some(2));
}

#[test]
fn output_independent_of_threads() {
    for args in [
        vec!["lau", "--d", "3", "--dprime", "1", "--q", "2", "--json"],
        vec!["orbits", "--d", "3", "--dprime", "1", "--q", "3", "--json"],
        vec!["solve", "--chart", "CHART", "--deg", "4", "--json"],
    ] {
        let chart = fixture("katz/chart_unipotent.json");
        let args: Vec<&str> = args.iter().map(|a| if *a == "CHART" { chart.as_str() } else { a }).collect();
        let one = fzip(&[&["--threads", "1"], args.as_slice()].concat());
        let many = fzip(&[&["--threads", "4"], args.as_slice()].concat());
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, many.stdout, "{args:?}");
    }
}

#[test]
fn grading_with_structure() {
    let out = fzip(&["grading", "--d", "3", "--dprime", "1", "--q", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["dims"], serde_json::json!([2, 5, 2]));
    assert_eq!(v["structure"]["open_cell_injective"], true);
}
