use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use assurkit::checker::{CheckConfig, Source};
use assurkit::depgraph::Edit;
use assurkit_cli::{run, watch_loop, Watcher};

const BROKEN: &str = "CLAIM Claim_A CONTENT \"A\"\n\
ASSERTED_INFERENCE Rel_A SOURCE Claim_A TARGET Claim_B\n\
TEXT \"see @{AssertedInference Rel_A}\"\n";

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn corpus() -> Vec<String> {
    ["argument.asr", "artifacts.asr", "requirements.asr", "tis.gcl"]
        .iter()
        .map(|f| root().join("corpus/tokeneer").join(f).display().to_string())
        .collect()
}

fn call(args: &[&str], files: &[String]) -> (i32, String, String) {
    let mut argv: Vec<String> = std::iter::once("assurkit").chain(args.iter().copied()).map(String::from).collect();
    argv.extend(files.iter().cloned());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = call(&["check", "--help"], &[]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage: assurkit check"));
    let (code, out, _) = call(&["--version"], &[]);
    assert_eq!(code, 0);
    assert!(out.starts_with("assurkit "));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["check", "--no-such-flag"], &corpus()).0, 2);
    assert_eq!(call(&["check"], &[]).0, 2);
    assert_eq!(call(&["frobnicate"], &[]).0, 2);
    let (code, _, err) = call(&["check"], &["/nonexistent/x.asr".into()]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read"));
}

#[test]
fn corpus_checks_clean() {
    let (code, out, _) = call(&["check"], &corpus());
    assert_eq!(code, 0, "{out}");
    assert!(out.ends_with("0 error(s), 3 warning(s)\n"), "{out}");
}

#[test]
fn warnings_fail_only_when_asked() {
    assert_eq!(call(&["check", "--fail-on-warnings"], &corpus()).0, 1);
    assert_eq!(call(&["--fail-on-warnings", "check"], &corpus()).0, 1);
}

#[test]
fn dangling_pair_exits_one_with_two_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.asr");
    fs::write(&f, BROKEN).unwrap();
    let (code, out, _) = call(&["check"], &[f.display().to_string()]);
    assert_eq!(code, 1);
    let errors: Vec<&str> = out.lines().filter(|l| l.contains(": error[")).collect();
    assert_eq!(errors.len(), 2, "{out}");
    assert!(errors[0].contains(":2:48: error[E010]"));
    assert!(errors[1].contains(":3:11: error[E011]"));
}

#[test]
fn exit_code_tracks_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("CLAIM A DECL axiomatic CONTENT \"a\"\n", 0, 0),
        ("CLAIM A CONTENT \"a\"\n", 0, 1),
        (BROKEN, 1, 1),
        ("CLAIM A CONTENT\n", 1, 1),
    ];
    for (text, plain, strict) in cases {
        let f = dir.path().join("e.asr");
        fs::write(&f, text).unwrap();
        let files = [f.display().to_string()];
        let (code, out, _) = call(&["check", "--format", "json"], &files);
        let diags: serde_json::Value = serde_json::from_str(&out).unwrap();
        let errors = diags.as_array().unwrap().iter().filter(|d| d["severity"] == "error").count();
        assert_eq!(code, plain, "{text}");
        assert_eq!(code == 0, errors == 0);
        assert_eq!(call(&["check", "--fail-on-warnings"], &files).0, strict, "{text}");
    }
}

#[test]
fn json_is_valid_and_stable() {
    let (_, a, _) = call(&["check", "--format", "json"], &corpus());
    let (_, b, _) = call(&["check", "--format", "json"], &corpus());
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["code"], "W001");
}

#[test]
fn verify_reports_each_obligation() {
    let (code, out, _) = call(&["verify"], &corpus());
    assert_eq!(code, 0);
    assert_eq!(out, "TIS_FSFR1: Pass over TIS_model\nTIS_INV: Pass over TIS_model\n");
    let (code, out, _) = call(&["verify", "--only", "TIS_INV", "--format", "json"], &corpus());
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["gid"], "TIS_INV");
    assert_eq!(v[0]["verdict"], "pass");
    assert_eq!(call(&["verify", "--only", "Nope"], &corpus()).0, 2);
}

#[test]
fn verify_prints_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.gcl");
    fs::write(&m, "model M\nvar s : {a, b}\nprog Flip = s := b\n").unwrap();
    let a = dir.path().join("a.asr");
    fs::write(&a, "OBLIGATION Bad SPEC \"M: hoare {true} Flip {s = a}\"\n").unwrap();
    let (code, out, _) = call(&["verify"], &[m.display().to_string(), a.display().to_string()]);
    assert_eq!(code, 1);
    assert_eq!(out, "Bad: Fail over M; counterexample:\n    s = a\n");
}

#[test]
fn state_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_assurkit"))
        .args(["check"])
        .args(corpus())
        .env("ASSURKIT_STATE_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("error[E032]"));
    assert_eq!(call(&["check", "--state-cap", "1000"], &corpus()).0, 1);
}

#[test]
fn graph_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let (code, _, _) = call(&["graph", "--dot", dot.to_str().unwrap()], &corpus());
    assert_eq!(code, 0);
    let text = fs::read_to_string(dot).unwrap();
    assert!(text.starts_with("digraph assurance {"));
    assert!(text.contains("\"TIS_SFR1_C1\""));
}

#[test]
fn report_writes_linked_html() {
    let dir = tempfile::tempdir().unwrap();
    let html = dir.path().join("r.html");
    let (code, _, _) = call(&["report", "--html", html.to_str().unwrap()], &corpus());
    assert_eq!(code, 0);
    let text = fs::read_to_string(&html).unwrap();
    assert!(text.contains("<tr id=\"TIS_SFR1_C1\">"));
    assert!(text.contains("class=\"Supported\">Supported"));
    assert!(text.contains("<a href=\"#TIS_SFR1_C4\">TIS_SFR1_C4</a>"));
    assert!(text.contains("<span class=\"pass\">Pass</span> over TIS_model"));
    assert!(text.contains("TIS_SFR1_PROOF_ACTIVITY_REL"));
    assert!(dir.path().join("r.dot").exists());
    assert!(text.contains("<svg") || text.contains("<a href=\"r.dot\">"));
}

#[test]
fn export_prints_the_model() {
    let (code, out, _) = call(&["export"], &corpus());
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
    assert!(out.contains("TIS_SFR1_C1"));
}

#[test]
fn watch_loop_prints_only_changes() {
    let fixed = format!("{BROKEN}CLAIM Claim_B CONTENT \"B\"\n");
    let mut batches = vec![
        vec![Edit::set("d.asr", fixed.clone())],
        vec![],
        vec![Edit::set("d.asr", BROKEN)],
    ]
    .into_iter();
    let mut out = Vec::new();
    let state = watch_loop(&[Source::new("d.asr", BROKEN)], CheckConfig::default(), || batches.next(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let rechecks: Vec<&str> = text.split("recheck: ").collect();
    assert_eq!(rechecks.len(), 3, "{text}");
    assert!(rechecks[0].contains("d.asr:2:48: error[E010]"));
    assert!(rechecks[1].contains("- d.asr:2:48: error[E010]"));
    assert!(rechecks[1].contains("- d.asr:3:11: error[E011]"));
    assert!(!rechecks[1].contains("+ d.asr:2:48"), "{text}");
    assert!(rechecks[2].contains("+ d.asr:2:48: error[E010]"), "{text}");
    assert!(!rechecks[2].contains("- d.asr:2:48"), "{text}");
    assert_eq!(state.diagnostics().iter().filter(|d| d.is_error()).count(), 2);
}

#[test]
fn watcher_coalesces_a_burst() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.asr");
    fs::write(&f, "CLAIM A CONTENT \"a\"\n").unwrap();
    let mut w = Watcher::new(vec![f.clone()]);
    assert_eq!(w.sources().len(), 1);
    assert!(w.poll().is_empty());
    fs::write(&f, "CLAIM A CONTENT \"b\"\n").unwrap();
    fs::write(&f, "CLAIM A CONTENT \"c\"\n").unwrap();
    let batch = w.next_batch();
    assert_eq!(batch.len(), 1);
    assert_eq!(batch[0].text.as_deref(), Some("CLAIM A CONTENT \"c\"\n"));
    fs::remove_file(&f).unwrap();
    assert_eq!(w.next_batch(), vec![Edit::remove(f.display().to_string())]);
}

#[test]
fn watch_command_stops_after_max_batches() {
    let (code, out, err) = call(&["watch", "--max-batches", "0"], &corpus());
    assert_eq!(code, 0);
    assert!(out.ends_with("0 error(s), 3 warning(s)\n"));
    assert!(err.contains("stopped after 0 recheck(s)"));
}
