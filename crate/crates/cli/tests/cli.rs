use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

use reductio_core::gadgets::GadgetTemplate;

const BIN: &str = env!("CARGO_BIN_EXE_reductio");

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn scratch() -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "reductio-cli-{}-{}",
        std::process::id(),
        NEXT.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn failed_checks(rep: &Value) -> Vec<&Value> {
    rep["verdicts"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Every `p/q` string anywhere in the value is in lowest terms with q > 1.
fn assert_lowest_terms(v: &Value) {
    match v {
        Value::String(s) => {
            if let Some((p, q)) = s.split_once('/') {
                if let (Ok(p), Ok(q)) = (p.parse::<i128>(), q.parse::<i128>()) {
                    assert!(q > 1 && gcd(p, q) == 1, "{s} is not reduced");
                }
            }
        }
        Value::Array(xs) => xs.iter().for_each(assert_lowest_terms),
        Value::Object(m) => m.values().for_each(assert_lowest_terms),
        _ => {}
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["reduce", "verify", "/definitely/not/here.json"]).status.code(), Some(2));
    assert_eq!(run(&["reduce", "build", "matching3reg", "--eps", "x"]).status.code(), Some(2));
    assert_eq!(run(&["suite", "run", "--filter", "no-such-criterion"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn enumeration_limit_is_enforced() {
    let out = run(&["--limit-n", "4", "reduce", "build", "matching3reg", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--limit-n"));
}

#[test]
fn record_round_trip_and_tampering() {
    let dir = scratch();
    let rec = dir.join("m.json");
    let out = run(&["reduce", "build", "matching3reg", "-o", rec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(failed_checks(&report(&out)).is_empty());

    let out = run(&["reduce", "verify", rec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    v["c1"][0] = Value::String("5/2".into());
    let bad = dir.join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(&["reduce", "verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    let failed = failed_checks(&rep);
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| c["witness"].is_string()));
}

#[test]
fn every_reduction_builds_and_reverifies() {
    let dir = scratch();
    for name in ["maxxor-maxcut", "sparsest", "balsep", "ug1f", "ug-noteq"] {
        let rec = dir.join(format!("{name}.json"));
        let out = run(&["reduce", "build", name, "-o", rec.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let out = run(&["reduce", "verify", rec.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let written: Value = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
        assert_lowest_terms(&written);
    }
}

#[test]
fn reports_are_byte_stable_and_reduced() {
    let args = ["reduce", "build", "balsep"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let rep = report(&a);
    assert!(rep["inputsDigest"].as_str().unwrap().starts_with("sha256:"));
    assert!(rep["timingMs"].is_null());
    assert_lowest_terms(&rep);

    let other = run(&["reduce", "build", "balsep", "--eps", "1/8"]);
    assert_ne!(report(&other)["inputsDigest"], rep["inputsDigest"]);
}

#[test]
fn report_flag_writes_file() {
    let dir = scratch();
    let path = dir.join("report.json");
    let out = run(&["--report", path.to_str().unwrap(), "twlp", "build", "--problem", "vc", "--n", "4", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep["command"], "twlp build");
}

#[test]
fn suite_known_failures_do_not_fail_the_run() {
    let out = run(&["suite", "run", "--filter", "twlp"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["results"]["criterion7.status"], "known failure");
    let names: Vec<&str> = failed_checks(&rep).iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["criterion7.Matching.admissibility.gluing", "criterion7.Matching.alpha"]);
}

#[test]
fn shipped_corpus_is_current() {
    let c = corpus();
    let out = run(&["corpus", "--check", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let text = std::fs::read_to_string(c.join("gadget_standard.json")).unwrap();
    let g: GadgetTemplate = serde_json::from_str(&text).unwrap();
    assert_eq!(g, GadgetTemplate::standard());
}

#[test]
fn corpus_check_detects_drift() {
    let dir = scratch();
    assert_eq!(run(&["corpus", "--out", dir.to_str().unwrap()]).status.code(), Some(0));
    std::fs::write(dir.join("k3.graph"), "3\n1 2\n").unwrap();
    let out = run(&["corpus", "--check", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    let failed = failed_checks(&rep);
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["check"], "k3.graph");
}

#[test]
fn slack_nmf_verify_round_trip() {
    let dir = scratch();
    let (m, f) = (dir.join("s.json"), dir.join("f.json"));
    let out = run(&["slack", "build", "--problem", "maxcut", "--n", "3", "-o", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rank: usize = report(&out)["results"]["trivialSize"].as_str().unwrap().parse().unwrap();

    let out = run(&["slack", "nmf", m.to_str().unwrap(), "--rank", &rank.to_string(), "-o", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(&["slack", "verify", m.to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn slack_of_record_sides() {
    let dir = scratch();
    let rec = dir.join("m.json");
    run(&["reduce", "build", "matching3reg", "-o", rec.to_str().unwrap()]);
    for side in ["source", "target"] {
        let out = run(&["slack", "build", "--record", rec.to_str().unwrap(), "--side", side]);
        assert_eq!(out.status.code(), Some(0), "{side}");
    }
}

#[test]
fn twlp_solve_independent_set_on_p4() {
    let g = corpus().join("path4.graph");
    let out = run(&["twlp", "solve", "--problem", "is", "--graph", g.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["results"]["lpValue"], "2");
    assert_eq!(rep["results"]["bruteForce"], "2");
}

#[test]
fn twlp_model_file_and_alpha() {
    let dir = scratch();
    let model = dir.join("model.json");
    let out = run(&["twlp", "build", "--problem", "maxcut", "--n", "4", "--k", "2", "-o", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let c4 = corpus().join("cycle4.graph");
    let out = run(&["twlp", "solve", "--problem", "maxcut", "--graph", c4.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["lpValue"], "4");

    let alpha = dir.join("alpha.json");
    let out = run(&["twlp", "alpha", "--problem", "vc", "--graph", c4.to_str().unwrap(), "-o", alpha.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(alpha.exists());

    let k4 = corpus().join("k4.graph");
    let out = run(&["twlp", "solve", "--problem", "maxcut", "--graph", k4.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("treewidth 3"));
}

#[test]
fn twlp_unique_games_swaps() {
    let k3 = corpus().join("k3.graph");
    let out = run(&["twlp", "solve", "--problem", "ug", "--graph", k3.to_str().unwrap(), "--swaps", "100"]);
    assert_eq!(out.status.code(), Some(0));
    // An odd number of swaps around a triangle leaves one edge unsatisfied.
    assert_eq!(report(&out)["results"]["bruteForce"], "2");
    let out = run(&["twlp", "solve", "--problem", "ug", "--graph", k3.to_str().unwrap(), "--swaps", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lasserre_compose_then_verify() {
    let dir = scratch();
    let pe = dir.join("pe.json");
    let csp = corpus().join("three_clauses.json");
    let out = run(&["lasserre", "compose", "--csp", csp.to_str().unwrap(), "-o", pe.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(&["lasserre", "verify", pe.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&pe).unwrap()).unwrap();
    v["values"].as_array_mut().unwrap().pop();
    std::fs::write(&pe, v.to_string()).unwrap();
    assert_eq!(run(&["lasserre", "verify", pe.to_str().unwrap()]).status.code(), Some(2));
}
