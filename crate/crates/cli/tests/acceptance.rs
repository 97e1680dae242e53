//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use assurkit::checker::{full_check, render_json, CheckConfig, EffectiveStatus, Source};
use assurkit::depgraph::{incremental_check, CheckState, Edit};
use assurkit::sacm::{AssetVariant, EntityKind, RelKind};
use assurkit::tokeneer::{build_tis_model, corpus_sources, TIS_GCL};
use gcl::{
    eval_pred, exec, valid, wp, CompiledPred, Domain, Expr, Lit, Outcome, Pred, Prog, StateSpace, VarDecl, Validity,
    DEFAULT_STATE_CAP,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INVARIANT_LIMIT: Duration = Duration::from_secs(60);
const FSFR1_LIMIT: Duration = Duration::from_secs(120);
const STATE_LIMIT: u64 = 1_000_000;
const MIN_MUTANTS: usize = 3;
const WP_PROGRAMS: usize = 1000;
const WP_DEPTH: u32 = 4;
const EDIT_SEQUENCES: usize = 200;
const TOUCHED_LIMIT: f64 = 0.20;

/// Sub-criteria that fail for a documented reason. They must keep failing
/// in the documented way; a change in either direction fails the suite.
const KNOWN_UNATTAINABLE: &[&str] = &["3b"];

struct Line {
    id: &'static str,
    pass: bool,
    text: String,
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn corpus_args() -> Vec<String> {
    ["argument.asr", "artifacts.asr", "requirements.asr", "tis.gcl"]
        .iter()
        .map(|f| format!("corpus/tokeneer/{f}"))
        .collect()
}

fn assurkit(dir: &Path, args: &[String]) -> (Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_assurkit"))
        .current_dir(dir)
        .args(args)
        .env_remove("ASSURKIT_STATE_CAP")
        .output()
        .expect("binary runs");
    (out, start.elapsed())
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn obligation(id: &'static str, gid: &str, limit: Duration) -> Line {
    let mut args = vec!["verify".to_string()];
    args.extend(corpus_args());
    args.extend(["--only".into(), gid.into()]);
    let (out, took) = assurkit(&root(), &args);
    let text = stdout(&out);
    let states = build_tis_model().space().state_count().unwrap_or(u64::MAX);
    let pass = out.status.code() == Some(0) && text.starts_with(&format!("{gid}: Pass")) && took < limit && states <= STATE_LIMIT;
    Line {
        id,
        pass,
        text: format!(
            "verify --only {gid}: {} | runtime {:.3} s (limit {} s) | states {states} (limit {STATE_LIMIT})",
            text.lines().next().unwrap_or("no output"),
            took.as_secs_f64(),
            limit.as_secs()
        ),
    }
}

const UNLOCK_PRE: &str =
    "pred UnlockDoorOK_pre = tis.status = waitingRemoveTokenSuccess /\\ tis.userTokenPresence = absent";

/// Run `verify --only TIS_FSFR1` on the corpus with `tis.gcl` replaced.
fn verify_fsfr1_with(gcl_text: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    for s in corpus_sources() {
        let name = Path::new(&s.file).file_name().unwrap();
        let text = if s.file.ends_with(".gcl") { gcl_text.to_string() } else { s.text };
        fs::write(dir.path().join(name), text).unwrap();
    }
    let mut args = vec!["verify".to_string()];
    args.extend(["argument.asr", "artifacts.asr", "requirements.asr", "tis.gcl"].map(String::from));
    args.extend(["--only".into(), "TIS_FSFR1".into()]);
    assurkit(dir.path(), &args).0
}

fn mutation() -> Vec<Line> {
    assert!(TIS_GCL.contains(UNLOCK_PRE), "UnlockDoorOK guard moved");
    let mut lines = Vec::new();
    let mut detected = 0;
    let enablers = ["waitingFinger", "gotFinger", "gotUserToken", "waitingUpdateToken"];
    for from in enablers {
        let mutant = TIS_GCL.replace(
            UNLOCK_PRE,
            &format!(
                "pred UnlockDoorOK_pre = (tis.status = waitingRemoveTokenSuccess \\/ tis.status = {from}) /\\ tis.userTokenPresence = absent"
            ),
        );
        let out = verify_fsfr1_with(&mutant);
        let text = stdout(&out);
        let killed = out.status.code() == Some(1)
            && text.starts_with("TIS_FSFR1: Fail")
            && text.contains(&format!("tis.status = {from}"));
        detected += usize::from(killed);
        let cex: Vec<&str> = text.lines().skip(1).map(str::trim).collect();
        println!("      mutant unlock-from-{from}: {} | counterexample {{{}}}", if killed { "killed" } else { "SURVIVED" }, cex.join(", "));
    }
    lines.push(Line {
        id: "3",
        pass: detected == enablers.len() && detected >= MIN_MUTANTS,
        text: format!("guard-enabling mutants of UnlockDoorOK flip the FSFR1 obligation to Fail: {detected}/{} killed (need all, at least {MIN_MUTANTS})", enablers.len()),
    });

    // The conclusion says nothing about token presence, and the invariant
    // already yields it in waitingRemoveTokenSuccess.
    let dropped = TIS_GCL.replace(UNLOCK_PRE, "pred UnlockDoorOK_pre = tis.status = waitingRemoveTokenSuccess");
    let out = verify_fsfr1_with(&dropped);
    let m = build_tis_model();
    let entailed = Pred::implies(Pred::and(vec![m.inv.clone(), Pred::is("tis.status", "waitingRemoveTokenSuccess")]), m.fsfr1_conclusion());
    let equivalent = valid(m.space(), &entailed, DEFAULT_STATE_CAP).unwrap() == Validity::Valid;
    lines.push(Line {
        id: "3b",
        pass: out.status.code() == Some(1),
        text: format!(
            "dropping `userTokenPresence = absent` flips the FSFR1 obligation: {} | equivalent mutant, TIS_inv /\\ status = waitingRemoveTokenSuccess => conclusion is {}",
            stdout(&out).lines().next().unwrap_or("no output"),
            if equivalent { "valid" } else { "NOT valid" }
        ),
    });
    lines
}

const COLOURS: [&str; 3] = ["r", "g", "b"];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn atom(&mut self, var: &str, primes: bool) -> Pred {
        let e = if primes && self.rng.gen_bool(0.5) { Expr::primed(var) } else { Expr::var(var) };
        match (var, self.rng.gen_range(0..4)) {
            (_, 0) => [Pred::True, Pred::False][self.rng.gen_range(0..2)].clone(),
            ("c", 1) => Pred::Eq(e, Expr::label(COLOURS[self.rng.gen_range(0..3)])),
            ("c", 2) => Pred::In(e, vec![Lit::Label("r".into()), Lit::Label(COLOURS[self.rng.gen_range(0..3)].into())]),
            ("c", _) => Pred::Eq(e, Expr::var("c")),
            (_, 1) => Pred::Le(e, Expr::nat(self.rng.gen_range(0..3))),
            (_, 2) => Pred::Le(Expr::nat(self.rng.gen_range(0..3)), e),
            _ => Pred::Eq(e, Expr::succ(Expr::var("n"))),
        }
    }

    fn pred(&mut self, primes: bool, depth: u32) -> Pred {
        if depth == 0 || self.rng.gen_bool(0.4) {
            let var = ["c", "n"][self.rng.gen_range(0..2)];
            return self.atom(var, primes);
        }
        let (a, b) = (self.pred(primes, depth - 1), self.pred(primes, depth - 1));
        match self.rng.gen_range(0..4) {
            0 => Pred::not(a),
            1 => Pred::and(vec![a, b]),
            2 => Pred::or(vec![a, b]),
            _ => Pred::implies(a, b),
        }
    }

    fn prog(&mut self, depth: u32) -> Prog {
        if depth <= 1 || self.rng.gen_bool(0.25) {
            return match self.rng.gen_range(0..7) {
                0 => Prog::Skip,
                1 => Prog::Abort,
                2 => Prog::Rel(self.pred(true, 2)),
                3 => Prog::assign("c", Expr::label(COLOURS[self.rng.gen_range(0..3)])),
                4 => Prog::assign("n", Expr::succ(Expr::var("n"))),
                _ => Prog::assign("n", Expr::nat(self.rng.gen_range(0..3))),
            };
        }
        match self.rng.gen_range(0..3) {
            0 => Prog::seq(self.prog(depth - 1), self.prog(depth - 1)),
            1 => Prog::choice(self.prog(depth - 1), self.prog(depth - 1)),
            _ => Prog::guard(self.pred(false, 2), self.prog(depth - 1)),
        }
    }
}

fn wp_oracle() -> Line {
    let space = StateSpace::new(vec![
        VarDecl { path: "c".into(), domain: Domain::Enum(COLOURS.iter().map(|s| s.to_string()).collect()) },
        VarDecl { path: "n".into(), domain: Domain::Nat(2) },
    ])
    .unwrap();
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(4) };
    let (mut discrepancies, mut checks, mut max_depth) = (0, 0, 0);
    let mut first = None;
    for _ in 0..WP_PROGRAMS {
        let prog = g.prog(WP_DEPTH);
        let post = g.pred(false, 3);
        max_depth = max_depth.max(prog.depth());
        let pre = wp(&space, &prog, &post).unwrap();
        let post_c = CompiledPred::new(&space, &post).unwrap();
        for s in space.states() {
            checks += 1;
            let by_wp = eval_pred(&space, &pre, &s).unwrap();
            let by_exec = match exec(&space, &prog, &s).unwrap() {
                Outcome::Aborts => false,
                Outcome::States(next) => next.iter().all(|n| post_c.eval(n)),
            };
            if by_wp != by_exec {
                discrepancies += 1;
                first.get_or_insert_with(|| format!(" | first: {prog} / {post} at {}", s.render(&space)));
            }
        }
    }
    Line {
        id: "4",
        pass: discrepancies == 0 && max_depth <= WP_DEPTH as usize,
        text: format!(
            "wp agrees with exec: {WP_PROGRAMS} programs (max depth {max_depth}, limit {WP_DEPTH}) x {} states = {checks} checks, {discrepancies} discrepancies (limit 0){}",
            space.state_count().unwrap(),
            first.unwrap_or_default()
        ),
    }
}

const DANGLING: &str = "CLAIM Claim_A CONTENT \"A\"\n\
ASSERTED_INFERENCE Rel_A SOURCE Claim_A TARGET Claim_B\n\
TEXT \"see @{AssertedInference Rel_A}\"\n";

fn dangling() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dangling.asr");
    fs::write(&path, DANGLING).unwrap();
    let (broken, _) = assurkit(dir.path(), &["check".into(), "--format".into(), "json".into(), "dangling.asr".into()]);
    let diags: serde_json::Value = serde_json::from_slice(&broken.stdout).unwrap();
    let errors: Vec<String> = diags
        .as_array()
        .unwrap()
        .iter()
        .filter(|d| d["severity"] == "error")
        .map(|d| {
            let s = &d["span"];
            format!("{}@{}:{}-{}:{}", d["code"].as_str().unwrap(), s["start_line"], s["start_col"], s["end_line"], s["end_col"])
        })
        .collect();
    let expected = ["E010@2:48-2:55", "E011@3:11-3:37"];
    fs::write(&path, format!("{DANGLING}CLAIM Claim_B CONTENT \"B\"\n")).unwrap();
    let (fixed, _) = assurkit(dir.path(), &["check".into(), "dangling.asr".into()]);
    let pass = broken.status.code() == Some(1) && errors == expected && fixed.status.code() == Some(0);
    Line {
        id: "5",
        pass,
        text: format!(
            "dangling target: errors {errors:?} (expected {expected:?}), exit {:?}; with Claim_B exit {:?} and {}",
            broken.status.code(),
            fixed.status.code(),
            stdout(&fixed).lines().last().unwrap_or("")
        ),
    }
}

fn corpus() -> Line {
    let mut args = vec!["check".to_string()];
    args.extend(corpus_args());
    let (out, _) = assurkit(&root(), &args);
    let report = full_check(&corpus_sources(), &CheckConfig::default());
    let m = &report.elaboration.model;
    let claims = m.assets.values().filter(|a| matches!(a.variant, AssetVariant::Claim { .. }) && a.gid.as_str().starts_with("TIS_SFR1_C")).count();
    let rels = |k: RelKind| m.assets.values().filter(|a| a.as_relationship().is_some_and(|r| r.kind == k)).count();
    let artifacts = m.artifacts.values().filter(|a| a.kind.entity_kind() != EntityKind::ArtifactRelationship).count();
    let activity_rel = m.artifacts.keys().any(|g| g.as_str() == "TIS_SFR1_PROOF_ACTIVITY_REL");
    let c1 = report.status("TIS_SFR1_C1");

    let degraded: Vec<Source> = corpus_sources()
        .into_iter()
        .map(|s| {
            let text = s.text.split("\n\n").filter(|b| !b.starts_with("CLAIM TIS_SFR1_C4")).collect::<Vec<_>>().join("\n\n");
            Source::new(s.file, text)
        })
        .collect();
    let after = full_check(&degraded, &CheckConfig::default()).status("TIS_SFR1_C1");
    let pass = out.status.code() == Some(0)
        && report.errors() == 0
        && claims == 5
        && rels(RelKind::Inference) >= 1
        && rels(RelKind::Evidence) >= 1
        && artifacts >= 4
        && activity_rel
        && c1 == Some(EffectiveStatus::Supported)
        && after == Some(EffectiveStatus::NeedsSupport);
    Line {
        id: "6",
        pass,
        text: format!(
            "corpus: exit {:?}, {} errors, {claims} claims, {} inference, {} evidence, {artifacts} artifacts, activity rel {activity_rel}; C1 {c1:?}, without C4 {after:?}",
            out.status.code(),
            report.errors(),
            rels(RelKind::Inference),
            rels(RelKind::Evidence)
        ),
    }
}

const GIDS: &[&str] = &[
    "TIS_SFR1_C1", "TIS_SFR1_C2", "TIS_SFR1_C3", "TIS_SFR1_C4", "TIS_SFR1_C5", "TIS_SFR1_S1", "SFR1_PROOF",
    "SFR1_PROOF_REF", "TIS_INV", "TIS_FSFR1", "TIS_FSFR1_SPEC_THY", "SFR1", "TIS_model", "Nowhere",
];

fn random_edit(rng: &mut ChaCha8Rng, current: &[Source], originals: &[Source]) -> Edit {
    let pick = originals.choose(rng).unwrap();
    let Some(cur) = current.iter().find(|s| s.file == pick.file) else {
        return Edit::set(pick.file.clone(), pick.text.clone());
    };
    if cur.file.ends_with(".gcl") {
        return match rng.gen_range(0..3) {
            0 => Edit::remove(cur.file.clone()),
            1 => Edit::set(cur.file.clone(), cur.text.replace(UNLOCK_PRE, "pred UnlockDoorOK_pre = tis.status = gotFinger")),
            _ => Edit::set(cur.file.clone(), pick.text.clone()),
        };
    }
    let mut bs: Vec<String> = cur.text.split("\n\n").map(str::to_string).collect();
    let i = rng.gen_range(0..bs.len());
    let (g1, g2) = (*GIDS.choose(rng).unwrap(), *GIDS.choose(rng).unwrap());
    match rng.gen_range(0..8) {
        0 => drop(bs.remove(i)),
        1 => bs.push(bs[i].clone()),
        2 => bs[i] = bs[i].replacen(g1, g2, 1),
        3 => bs.push(format!("ASSERTED_INFERENCE Link_{} SOURCE {g1} TARGET {g2}", rng.gen_range(0..3))),
        4 => bs.push(format!("ASSERTED_INFERENCE Against COUNTER SOURCE TIS_SFR1_C2 TARGET {g2}")),
        5 => bs[i] = bs[i].replace("CONTENT \"", "CONTENT \"edited "),
        6 => bs[i] = format!("{} ???", bs[i]),
        _ => return Edit::set(cur.file.clone(), pick.text.clone()),
    }
    Edit::set(cur.file.clone(), bs.join("\n\n"))
}

fn incremental() -> Line {
    let originals = corpus_sources();
    let config = CheckConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut rounds, mut mismatches) = (0, 0);
    let mut codes = BTreeSet::new();
    for _ in 0..EDIT_SEQUENCES {
        let mut current = originals.clone();
        let mut state = CheckState::new(&current, config);
        for _ in 0..rng.gen_range(1..=4) {
            let edits: Vec<Edit> = (0..rng.gen_range(1..=2)).map(|_| random_edit(&mut rng, &current, &originals)).collect();
            for e in &edits {
                current.retain(|s| s.file != e.file);
                if let Some(t) = &e.text {
                    current.push(Source::new(e.file.clone(), t.clone()));
                }
            }
            let (next, diags) = incremental_check(&state, &edits);
            let full = full_check(&current, &config);
            mismatches += usize::from(render_json(&diags) != render_json(&full.diagnostics));
            codes.extend(diags.iter().map(|d| d.code.clone()));
            state = next;
            rounds += 1;
        }
    }
    let state = CheckState::new(&originals, config);
    let argument = originals.iter().find(|s| s.file.ends_with("argument.asr")).unwrap();
    let (_, recheck) = state.apply(&[Edit::set(argument.file.clone(), argument.text.replace("TIS satisfies", "The station satisfies"))]);
    let ratio = recheck.touched_entities as f64 / recheck.total_entities as f64;
    Line {
        id: "7",
        pass: mismatches == 0 && ratio < TOUCHED_LIMIT,
        text: format!(
            "incremental == full: {EDIT_SEQUENCES} sequences, {rounds} rechecks, {mismatches} byte mismatches (limit 0), codes seen {codes:?}; one-claim edit touches {}/{} = {:.1}% (limit {:.0}%)",
            recheck.touched_entities,
            recheck.total_entities,
            100.0 * ratio,
            100.0 * TOUCHED_LIMIT
        ),
    }
}

fn determinism() -> Line {
    let mut args = vec!["check".to_string(), "--format".into(), "json".into()];
    args.extend(corpus_args());
    let (a, _) = assurkit(&root(), &args);
    let (b, _) = assurkit(&root(), &args);
    let valid_json = serde_json::from_slice::<serde_json::Value>(&a.stdout).is_ok();
    Line {
        id: "8",
        pass: a.stdout == b.stdout && !a.stdout.is_empty() && valid_json,
        text: format!("check --format json twice: {} bytes, identical {}, valid JSON {valid_json}", a.stdout.len(), a.stdout == b.stdout),
    }
}

fn main() {
    println!("acceptance criteria");
    let mut lines = vec![
        obligation("1", "TIS_INV", INVARIANT_LIMIT),
        obligation("2", "TIS_FSFR1", FSFR1_LIMIT),
    ];
    lines.extend(mutation());
    lines.extend([wp_oracle(), dangling(), corpus(), incremental(), determinism()]);
    let mut unexpected = Vec::new();
    for l in &lines {
        let known = KNOWN_UNATTAINABLE.contains(&l.id);
        let tag = match (l.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, see notes)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {:<3} {}", l.id, l.text);
        if l.pass == known {
            unexpected.push(l.id);
        }
    }
    if unexpected.is_empty() {
        println!("all attainable criteria pass");
    } else {
        println!("unexpected results: {unexpected:?}");
        std::process::exit(1);
    }
}
