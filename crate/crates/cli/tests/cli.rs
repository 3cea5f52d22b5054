use std::fs;
use std::path::{Path, PathBuf};

use boxguard_cli::{dispatch, EXIT_FALSE, EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN};
use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch(std::iter::once("boxguard").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_samples(dir: &TempDir, name: &str, records: &[(&[f64], &str, bool)]) -> PathBuf {
    let mut labels: Vec<&str> = records.iter().map(|r| r.1).collect();
    labels.sort_unstable();
    labels.dedup();
    let dim = records.first().map_or(1, |r| r.0.len());
    let mut text = json!({"format_version": "1", "kind": "samples", "dimension": dim, "labels": labels}).to_string();
    text.push('\n');
    for (f, l, c) in records {
        text.push_str(&json!({"features": f, "predicted": l, "correct": c}).to_string());
        text.push('\n');
    }
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

fn grid_samples(dir: &TempDir) -> PathBuf {
    let mut recs: Vec<(Vec<f64>, &str, bool)> = Vec::new();
    for i in 0..30 {
        let x = i as f64 * 0.1;
        recs.push((vec![x, 0.0], "car", true));
        recs.push((vec![10.0 + x, 0.0], "car", false));
    }
    let refs: Vec<(&[f64], &str, bool)> = recs.iter().map(|(f, l, c)| (f.as_slice(), *l, *c)).collect();
    write_samples(dir, "train.jsonl", &refs)
}

fn write_trace(dir: &TempDir, values: &[&str]) -> PathBuf {
    let p = path(dir, "trace.jsonl");
    let text: String = values.iter().map(|v| format!("{{\"p\":{v}}}\n")).collect();
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_spec_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (vec!["true", "true", "true"], EXIT_OK, "true"),
        (vec!["true", "\"unknown\"", "true"], EXIT_UNKNOWN, "unknown"),
        (vec!["true", "false", "true"], EXIT_FALSE, "false"),
    ];
    for (values, code, verdict) in cases {
        let trace = write_trace(&dir, &values);
        let r = run(&["check-spec", "--expr", "G[0,2] p", "--trace", s(&trace)]);
        assert_eq!(r.code, code, "{}", r.stderr);
        let report: Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(report["verdict"], verdict);
    }
}

#[test]
fn check_spec_composes_guarantees() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, &["true", "true", "true"]);
    let formula = path(&dir, "phi.txt");
    fs::write(&formula, "G[0,2] pedestrian{eps=0.01, delta=0.001, level=instance} & p").unwrap();
    let g = path(&dir, "g.json");
    fs::write(&g, json!({"format_version": "1", "atoms": {"p": {"epsilon": 0.05, "delta": 0.01}}}).to_string()).unwrap();
    let out = path(&dir, "report.json");
    let r = run(&[
        "check-spec",
        "--formula",
        s(&formula),
        "--trace",
        s(&trace),
        "--guarantees",
        s(&g),
        "--out",
        s(&out),
    ]);
    // pedestrian is absent from the trace, so the verdict is unknown
    assert_eq!(r.code, EXIT_UNKNOWN, "{}", r.stderr);
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let g = &report["guarantee"];
    assert_eq!(g["epsilon"], 0.05);
    assert!((g["delta"].as_f64().unwrap() - (3.0 * 0.001 + 0.01)).abs() < 1e-15);
    assert_eq!(report["unguaranteed"], json!([]));
}

#[test]
fn conflicting_external_guarantee_is_rejected() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, &["true"]);
    let g = path(&dir, "g.json");
    fs::write(&g, json!({"format_version": "1", "atoms": {"p": {"epsilon": 0.5, "delta": 0.01}}}).to_string()).unwrap();
    let r = run(&["check-spec", "--expr", "p{eps=0.1,delta=0.01}", "--trace", s(&trace), "--guarantees", s(&g)]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("conflicting"), "{}", r.stderr);
}

#[test]
fn build_query_assess_pipeline() {
    let dir = TempDir::new().unwrap();
    let train = grid_samples(&dir);
    let mon = path(&dir, "mon.json");
    let r = run(&["build", "--in", s(&train), "--out", s(&mon), "--k", "1", "--seed", "7"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);

    let q = run(&["query", "--monitor", s(&mon), "--features", "1.0,0", "--label", "car"]);
    assert_eq!(q.code, EXIT_OK, "{}", q.stderr);
    let v: Value = serde_json::from_str(&q.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "accept");
    let q = run(&["query", "--monitor", s(&mon), "--features", "11.0,0", "--label", "car"]);
    let v: Value = serde_json::from_str(&q.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "reject");
    let q = run(&["query", "--monitor", s(&mon), "--features", "-5,0", "--label", "car"]);
    let v: Value = serde_json::from_str(&q.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "uncertain");
    let q = run(&["query", "--monitor", s(&mon), "--features", "1.0", "--label", "car"]);
    assert_eq!(q.code, EXIT_INPUT);

    let report = path(&dir, "assess.json");
    let a = run(&[
        "assess",
        "--monitor",
        s(&mon),
        "--holdout",
        s(&train),
        "--m-min",
        "5",
        "--out",
        s(&report),
    ]);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    let rep: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["holdout_samples"], 60);
    assert_eq!(rep["guarantee"]["boxes"].as_array().unwrap().len(), 2);
    assert!((rep["guarantee"]["delta"].as_f64().unwrap() - 0.075).abs() < 1e-15);

    let trace = write_trace(&dir, &["true", "true"]);
    let bind = format!("p={}", s(&report));
    let c = run(&["check-spec", "--expr", "G[0,1] p", "--trace", s(&trace), "--bind", &bind]);
    assert_eq!(c.code, EXIT_OK, "{}", c.stderr);
    let out: Value = serde_json::from_str(&c.stdout).unwrap();
    assert_eq!(out["guarantee"]["epsilon"], rep["guarantee"]["epsilon"]);
}

#[test]
fn assess_with_empty_holdout_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let train = grid_samples(&dir);
    let mon = path(&dir, "mon.json");
    assert_eq!(run(&["build", "--in", s(&train), "--out", s(&mon)]).code, EXIT_OK);
    let empty = path(&dir, "empty.jsonl");
    fs::write(&empty, "{\"format_version\":\"1\",\"kind\":\"samples\",\"dimension\":2,\"labels\":[\"car\"]}\n").unwrap();
    let r = run(&["assess", "--monitor", s(&mon), "--holdout", s(&empty)]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("held-out"), "{}", r.stderr);
}

#[test]
fn malformed_sample_log_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "bad.jsonl");
    fs::write(
        &p,
        "{\"format_version\":\"1\",\"kind\":\"samples\",\"dimension\":2,\"labels\":[\"a\"]}\n\
         {\"features\":[1,2],\"predicted\":\"a\",\"correct\":true}\n\
         {\"features\":[1],\"predicted\":\"a\",\"correct\":true}\n",
    )
    .unwrap();
    let r = run(&["build", "--in", s(&p), "--out", s(&path(&dir, "m.json"))]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("bad.jsonl:3"), "{}", r.stderr);
    assert!(!path(&dir, "m.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(run(&["build", "--nope"]).code, EXIT_INPUT);
    assert_eq!(run(&[]).code, EXIT_INPUT);
    let help = run(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("check-spec"));
}

#[test]
fn builds_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let train = grid_samples(&dir);
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    for out in [&a, &b] {
        assert_eq!(run(&["build", "--in", s(&train), "--out", s(out), "--k", "3", "--seed", "7"]).code, EXIT_OK);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn seed_flag_beats_environment() {
    let dir = TempDir::new().unwrap();
    let dist = path(&dir, "dist.json");
    fs::write(
        &dist,
        json!({"format_version": "1", "distribution": {
            "components": [{"label": "a", "weight": 1.0, "mean": [0.0], "std": [1.0]}]
        }})
        .to_string(),
    )
    .unwrap();
    let gen = |name: &str, extra: &[&str]| {
        let out = path(&dir, name);
        let mut args = vec!["simulate", "--dist", s(&dist), "--n", "20", "--out", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(run(&args).code, EXIT_OK);
        fs::read(out).unwrap()
    };
    // Only this test touches GUARD_SEED.
    std::env::set_var("GUARD_SEED", "3");
    let env_seeded = gen("env.jsonl", &[]);
    let flag_seeded = gen("flag.jsonl", &["--seed", "4"]);
    std::env::remove_var("GUARD_SEED");
    assert_eq!(env_seeded, gen("three.jsonl", &["--seed", "3"]));
    assert_eq!(flag_seeded, gen("four.jsonl", &["--seed", "4"]));
    assert_ne!(env_seeded, flag_seeded);
}

#[test]
fn frames_with_rules_produce_a_trace() {
    let dir = TempDir::new().unwrap();
    let frames = path(&dir, "frames.jsonl");
    fs::write(
        &frames,
        "{\"frame\":0,\"detections\":[{\"id\":1,\"class\":\"ped\",\"pr\":0.9,\"bb\":[0,0,1,2]}]}\n\
         {\"frame\":1,\"detections\":[{\"id\":1,\"class\":\"ped\",\"pr\":0.8,\"bb\":[0,0,1,2]}]}\n",
    )
    .unwrap();
    let rules = path(&dir, "rules.json");
    fs::write(
        &rules,
        json!({"format_version": "1", "rules": [{"atom": "ped", "kind": "exists", "class": "ped", "min_pr": 0.5}]})
            .to_string(),
    )
    .unwrap();
    let r = run(&["check-spec", "--expr", "G[0,1] ped", "--frames", s(&frames), "--rules", s(&rules)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r = run(&["check-spec", "--expr", "G[0,2] ped", "--frames", s(&frames), "--rules", s(&rules)]);
    assert_eq!(r.code, EXIT_UNKNOWN, "{}", r.stderr);
}
