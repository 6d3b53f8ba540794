//! End-to-end tests of the binary: flags, formats, exit codes, file
//! round-trips. Heavier mathematical guarantees live in the acceptance
//! suite.

use std::path::Path;
use std::process::{Command, Output};

fn revcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn write_instance(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const UNIFORM_PAIR: &str = r#"{
    "kind": "independent",
    "items": [
        [{"value": "1", "prob": "1/2"}, {"value": "2", "prob": "1/2"}],
        [{"value": "1", "prob": "1/2"}, {"value": "2", "prob": "1/2"}]
    ]
}"#;

const POINT_MASS: &str = r#"{
    "kind": "independent",
    "items": [
        [{"value": "3", "prob": "1"}],
        [{"value": "1/2", "prob": "1"}]
    ]
}"#;

#[test]
fn compute_bundle_benchmark_on_uniform_pair() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "pair.json", UNIFORM_PAIR);
    let out = revcheck(&["compute", &file, "--what", "brev", "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("\"exact\": \"9/4\""), "{text}");
}

#[test]
fn compute_all_on_point_mass_collapses() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "point.json", POINT_MASS);
    let out = revcheck(&["compute", &file, "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let quantities = doc["quantities"].as_array().unwrap();
    assert_eq!(quantities.len(), 4);
    for q in quantities {
        assert_eq!(q["exact"], "7/2", "{q}");
    }
}

#[test]
fn verify_generated_corpus_passes() {
    let out = revcheck(&["verify", "--gen", "semi", "--seeds", "1..6", "--suite", "semi"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("checks hold"));
}

#[test]
fn verify_single_seed_and_aliases() {
    let out = revcheck(&["verify", "--gen", "cbv", "--seeds", "2", "--suite", "cbv"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("common_base_value[2]"));
}

#[test]
fn verify_output_is_byte_identical_across_runs() {
    let args = ["verify", "--gen", "linear", "--seeds", "0..3", "--suite", "linear",
        "--format", "json"];
    let a = revcheck(&args);
    let b = revcheck(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reduce_writes_a_valid_reduced_instance() {
    let dir = tempfile::tempdir().unwrap();
    let gen = revcheck(&[
        "gen", "--kind", "cbv", "--seed", "5",
        "--out", dir.path().join("cbv.json").to_str().unwrap(),
    ]);
    assert!(gen.status.success(), "{gen:?}");

    let input = dir.path().join("cbv.json");
    let out = revcheck(&["reduce", input.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");

    let reduced = dir.path().join("cbv.reduced.json");
    assert!(reduced.exists());
    // The reduced file is itself a usable instance with the same bundle law.
    let brev_of = |path: &Path| {
        let out = revcheck(&["compute", path.to_str().unwrap(), "--what", "brev",
            "--format", "csv"]);
        assert!(out.status.success(), "{out:?}");
        stdout(&out).lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string()
    };
    assert_eq!(brev_of(&input), brev_of(&reduced));
}

#[test]
fn csv_has_one_check_per_row() {
    let out = revcheck(&["verify", "--gen", "iid", "--seeds", "0..2", "--suite", "core",
        "--format", "csv"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "suite,check,lhs,rhs,holds");
    for line in lines {
        assert_eq!(line.split(',').count(), 5, "{line}");
        assert!(line.ends_with(",true"), "{line}");
    }
}

#[test]
fn float_mode_reports_approximations_only() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "pair.json", UNIFORM_PAIR);
    let out = revcheck(&["compute", &file, "--mode", "float", "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for q in doc["quantities"].as_array().unwrap() {
        assert_eq!(q["exact"], serde_json::Value::Null);
    }
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = revcheck(&["gen", "--kind", "linear", "--seed", "9"]);
    let b = revcheck(&["gen", "--kind", "linear", "--seed", "9"]);
    let c = revcheck(&["gen", "--kind", "linear", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let unknown_flag = revcheck(&["compute", "--no-such-flag"]);
    assert_eq!(unknown_flag.status.code(), Some(2));

    let missing = revcheck(&["compute", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_instance(dir.path(), "bad.json", r#"{"kind": "independent""#);
    let malformed = revcheck(&["compute", &bad]);
    assert_eq!(malformed.status.code(), Some(2));
    let stderr = String::from_utf8(malformed.stderr).unwrap();
    assert!(stderr.contains("line"), "parse errors cite a position: {stderr}");

    let wrong_kind = revcheck(&["reduce", &write_instance(dir.path(), "p.json", POINT_MASS)]);
    assert_eq!(wrong_kind.status.code(), Some(2));
}

#[test]
fn cap_violations_name_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "pair.json", UNIFORM_PAIR);
    let out = revcheck(&["compute", &file, "--max-atoms", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("cap"), "{stderr}");
}

#[test]
fn verify_requires_exactly_one_source() {
    let neither = revcheck(&["verify", "--suite", "core"]);
    assert_eq!(neither.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "pair.json", UNIFORM_PAIR);
    let both = revcheck(&["verify", &file, "--gen", "semi", "--suite", "core"]);
    assert_eq!(both.status.code(), Some(2));
}
