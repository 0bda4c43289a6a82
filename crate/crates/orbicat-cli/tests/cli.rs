use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn orbicat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbicat")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn centre_check_vec_z2_matches_four_simples() {
    let o = orbicat(&["pipeline", "centre-check", "builtin:vec_z2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["match"]["result"], "match");
    assert_eq!(v["ca"]["count"], 4);
    assert_eq!(v["centre"]["count"], 4);
    for key in ["version", "tol", "seed", "psi_branch"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn centre_check_from_a_category_file() {
    let dir = tempfile::tempdir().unwrap();
    let cat = orbicat(&["cat", "builtin", "fibonacci"]);
    let path = write(dir.path(), "fib.json", std::str::from_utf8(&cat.stdout).unwrap());
    let o = orbicat(&["pipeline", "centre-check", &path]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    for route in ["ca", "centre"] {
        let gd = v[route]["modular_data"]["global_dim"][0].as_f64().unwrap();
        assert!((gd - 13.090169943749475).abs() < 1e-9, "{route}: {gd}");
    }
}

#[test]
fn corrupted_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", "{\n  \"labels\": [\"1\",\n");
    let o = orbicat(&["cat", "check", &path]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "parse");
    assert!(e["line"].as_u64().is_some());
    assert!(e["column"].as_u64().is_some());
}

#[test]
fn missing_file_is_an_io_error() {
    let o = orbicat(&["orbifold", "check", "/nonexistent/datum.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn ising_datum_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let datum = dir.path().join("ising_datum.json");
    let d = datum.to_str().unwrap();
    let b = orbicat(&["orbifold", "build-spherical", "builtin:ising", "-o", d]);
    assert_eq!(b.status.code(), Some(0));
    let o = orbicat(&["orbifold", "check", d, "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["orbifold"]["simple"], true);
    assert_eq!(v["tol"], 1e-8);

    let m = orbicat(&["ca", "modular", d, "--json"]);
    assert_eq!(m.status.code(), Some(0));
    let v = stdout_json(&m);
    assert_eq!(v["count"], 9);
    let md = &v["modular_data"];
    assert_eq!(md["labels"].as_array().unwrap().len(), 9);
    assert_eq!(md["smatrix"].as_array().unwrap().len(), 9);
    assert!(v["report"]["checks"]["s_invertible"]["pass"].as_bool().unwrap());
}

#[test]
fn compare_size_mismatch_is_no_match() {
    let dir = tempfile::tempdir().unwrap();
    let a = orbicat(&["centre", "builtin:vec_z2"]);
    let b = orbicat(&["centre", "builtin:vec_z3"]);
    let pa = write(dir.path(), "a.json", std::str::from_utf8(&a.stdout).unwrap());
    let pb = write(dir.path(), "b.json", std::str::from_utf8(&b.stdout).unwrap());
    let o = orbicat(&["compare", &pa, &pb]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["match"]["result"], "no_match");

    let same = orbicat(&["compare", &pa, &pa]);
    assert_eq!(same.status.code(), Some(0));
}

#[test]
fn toric_code_condensation() {
    let dir = tempfile::tempdir().unwrap();
    let alg = write(
        dir.path(),
        "alg.json",
        r#"{"support":["1","e"],"mult":[
            {"idx":["1","1","1"],"val":[1,0]},{"idx":["1","e","e"],"val":[1,0]},
            {"idx":["e","1","e"],"val":[1,0]},{"idx":["e","e","1"],"val":[1,0]}]}"#,
    );
    let o = orbicat(&["locmod", "builtin:toric_code", &alg]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["count"], 1);
    assert!((v["modular_data"]["global_dim"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let f = write(
        dir.path(),
        "f.json",
        r#"{"support":[0,3],"mult":[
            {"idx":[0,0,0],"val":[1,0]},{"idx":[0,3,3],"val":[1,0]},
            {"idx":[3,0,3],"val":[1,0]},{"idx":[3,3,0],"val":[1,0]}]}"#,
    );
    let o = orbicat(&["locmod", "builtin:toric_code", &f]);
    assert_eq!(o.status.code(), Some(1));
    let v = stdout_json(&o);
    assert_eq!(v["algebra_report"]["checks"]["twist_trivial"]["pass"], false);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["pipeline", "centre-check", "builtin:ising", "--seed", "7"];
    let a = orbicat(&args);
    let b = orbicat(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn table_output_lists_checks() {
    let o = orbicat(&["cat", "check", "builtin:fibonacci", "--table"]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("residual"));
    assert!(s.contains("pass"));
}

#[test]
fn thread_limit_is_honoured_and_validated() {
    let ok = Command::new(env!("CARGO_BIN_EXE_orbicat"))
        .args(["centre", "builtin:fibonacci"])
        .env("ORBICAT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_orbicat"))
        .args(["centre", "builtin:fibonacci"])
        .env("ORBICAT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(stderr_json(&bad)["error"], "usage");
}

#[test]
fn unknown_builtin_is_an_input_error() {
    let o = orbicat(&["centre", "builtin:nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "input");
}
