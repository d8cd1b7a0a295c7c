use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

use wplab::coener::{CodedSet, Schedule};
use wplab::ttwp::m_reduction_word;

fn wplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let o = wplab(&all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (v, o.status.code().expect("exit code"))
}

fn temp_file(contents: &str) -> PathBuf {
    static N: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("wplab-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("f{}", N.fetch_add(1, Ordering::SeqCst)));
    fs::write(&path, contents).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn word_commands() {
    assert_eq!(stdout(&wplab(&["word", "reduce", "a a^-1 b"])), "b\n");
    assert_eq!(stdout(&wplab(&["word", "expsum", "--gen", "v", "v a v^-1"])), "0\n");
    assert_eq!(stdout(&wplab(&["word", "reduce", ""])), "1\n");
    assert_eq!(stdout(&wplab(&["word", "invert", "a b^2"])), "b^-2 a^-1\n");
    let bad = wplab(&["word", "reduce", "a^"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("byte 2"));
}

#[test]
fn decide_examples() {
    let (v, code) = json(&["decide", "--mode", "both", "s"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["tt"]["equal_identity"], false);
    assert_eq!(v["result"]["tt"]["reason"]["rule"], "sigma-exponent");

    let (v, code) = json(&["decide", "--mode", "both", "b b"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["tt"]["equal_identity"], true);
    assert_eq!(v["result"]["agreement"], true);
}

#[test]
fn decide_m_reduction_matches_membership() {
    let text = "0 4\n3 1\nperiodic 6 2 9 5\n";
    let schedule = temp_file(text);
    let coded = CodedSet::new(Schedule::parse(text).unwrap().0);
    for x in 0..12 {
        let w = m_reduction_word(x).to_string();
        let (v, code) = json(&["decide", "--mode", "both", "--schedule", p(&schedule), &w]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["agreement"], true);
        assert_eq!(v["result"]["tt"]["equal_identity"], coded.contains(x), "x = {x}");
    }
}

#[test]
fn decide_with_oracle_file() {
    let oracle = temp_file("0 1\n");
    let (v, code) = json(&["decide", "--oracle", p(&oracle), "(t b)^6"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["tt"]["equal_identity"], true);
    assert_eq!(v["result"]["literal"]["equal_identity"], false);
    assert_eq!(v["result"]["literal"]["reason"]["rule"], "literal-case-2-count");

    let o = wplab(&["decide", "--oracle", p(&oracle), "b s^-2 t s^2 s t s^-1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("no answer for [2]"), "{err}");
}

#[test]
fn verify_code_examples() {
    let (v, code) = json(&["verify-code", "--builtin", "identity", "3", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["report"]["f_agree"], true);
    assert_eq!(v["result"]["report"]["perm_agree"], true);

    let (v, code) = json(&["verify-code", "--builtin", "identity", "1", "2", "--bound", "4"]);
    assert_eq!(code, 0);
    let r = &v["result"]["report"];
    assert_eq!(r["f_agree"], false);
    assert_eq!(r["f_witness"]["n"], 0);
    assert!(r["perm_witness"]["point"].is_object());
    assert_eq!(r["consistent"], true);

    for (x, y) in [("0", "5"), ("7", "2")] {
        let (v, code) = json(&["verify-code", "--builtin", "trivial", x, y]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["report"]["consistent"], true);
    }
}

#[test]
fn verify_code_reports_bad_tables() {
    let table = temp_file("2 0 3\ndefault 0\n");
    let o = wplab(&["verify-code", "--table", p(&table), "2", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let table = temp_file("2 0 1\ndefault x\n");
    let (v, code) = json(&["verify-code", "--table", p(&table), "--layout", "packed", "2", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["report"]["layout"], "packed");
}

#[test]
fn abelian_examples() {
    let z2 = temp_file("x\nx^2\n");
    let (v, _) = json(&["abelian", "invariants", p(&z2)]);
    assert_eq!(v["result"], serde_json::json!({ "free_rank": 0, "invariant_factors": [2] }));

    let ab = temp_file("a b\na^2\nb^3\n");
    let c6 = temp_file("c\nc^6\n");
    let (v, _) = json(&["abelian", "iso", p(&ab), p(&c6)]);
    assert_eq!(v["result"]["iso"], true);

    let free = temp_file("a\n");
    let (v, code) = json(&["abelian", "diagonal", p(&free)]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["check"]["output"]["free_rank"], 2);
    assert_eq!(v["result"]["check"]["passed"], true);
}

#[test]
fn sweeps_report_and_exit() {
    let o = wplab(&["sweep", "differential", "--cases", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("200/200 agree"));
    let o = wplab(&["sweep", "mreduction"]);
    assert!(stdout(&o).contains("exact match"));
    let o = wplab(&["sweep", "queryset", "--cases", "100"]);
    assert!(stdout(&o).contains("static under 100 oracle swaps"));

    let dump = std::env::temp_dir().join(format!("wplab-dump-{}.json", std::process::id()));
    let o = wplab(&["sweep", "coding", "--builtin", "mod:2", "--max", "4", "--bound", "4", "--dump", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let case: Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(case["consistent"], false);
    let _ = fs::remove_file(dump);
}

#[test]
fn json_reports_are_reproducible() {
    let args = ["--format", "json", "--seed", "11", "sweep", "differential", "--cases", "50"];
    let a = wplab(&args);
    let b = wplab(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(wplab(&seq).stdout, a.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["bounds"]["cases"], 50);
}

#[test]
fn inputs_are_digested_and_out_is_honoured() {
    let out = std::env::temp_dir().join(format!("wplab-out-{}.json", std::process::id()));
    let o = wplab(&["--format", "json", "--out", out.to_str().unwrap(), "word", "reduce", "a a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["inputs"]["word"].as_str().unwrap().len(), 64);
    assert_eq!(v["result"]["word"], "a^2");
    let _ = fs::remove_file(out);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(wplab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wplab(&["verify-code", "1", "2"]).status.code(), Some(1));
    assert_eq!(wplab(&["--help"]).status.code(), Some(0));
    assert_eq!(wplab(&["--version"]).status.code(), Some(0));
    assert_eq!(wplab(&["decide", "x"]).status.code(), Some(1));
}
