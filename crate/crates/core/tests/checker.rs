use std::collections::{BTreeMap, BTreeSet};

use assurkit::checker::{full_check, render_json, CheckConfig, EffectiveStatus, Source};
use assurkit::sacm::{
    ArgumentAsset, ArgumentModel, AssertionDeclaration, Entity, EntityKind, Gid, MultiLangString, RelKind, Relationship,
};
use proptest::prelude::*;

const CLAIMS: usize = 6;

#[derive(Debug, Clone)]
struct Rel {
    counter: bool,
    sources: Vec<usize>,
    target: usize,
}

fn claim_name(i: usize) -> Gid {
    Gid::new(format!("C{i}")).unwrap()
}

fn build(decls: &[AssertionDeclaration], rels: &[Rel]) -> ArgumentModel {
    let mut m = ArgumentModel::new();
    for (i, d) in decls.iter().enumerate() {
        m.add_asset(ArgumentAsset::claim(claim_name(i), *d, MultiLangString::plain("c"))).unwrap();
    }
    for (i, r) in rels.iter().enumerate() {
        let rel = Relationship::new(
            RelKind::Inference,
            AssertionDeclaration::Asserted,
            r.counter,
            None,
            r.sources.iter().map(|s| claim_name(*s)).collect(),
            vec![claim_name(r.target)],
        );
        if let Ok(rel) = rel {
            m.add_asset(ArgumentAsset::relationship(Gid::new(format!("R{i}")).unwrap(), rel, MultiLangString::plain("")))
                .unwrap();
        }
    }
    m
}

fn decl() -> impl Strategy<Value = AssertionDeclaration> {
    prop_oneof![
        4 => Just(AssertionDeclaration::Asserted),
        1 => Just(AssertionDeclaration::Axiomatic),
        1 => Just(AssertionDeclaration::Assumed),
        1 => Just(AssertionDeclaration::NeedsSupport),
    ]
}

fn rel(counters: bool) -> impl Strategy<Value = Rel> {
    (proptest::bool::weighted(if counters { 0.3 } else { 0.0 }), proptest::collection::btree_set(0..CLAIMS, 1..3), 0..CLAIMS)
        .prop_map(|(counter, s, target)| Rel { counter, sources: s.into_iter().collect(), target })
}

fn statuses(m: &ArgumentModel) -> BTreeMap<Gid, EffectiveStatus> {
    assurkit::checker::compute_statuses(m, &BTreeMap::new())
}

/// Least fixpoint of "supported by an inference whose sources all hold".
fn oracle(decls: &[AssertionDeclaration], rels: &[Rel]) -> Vec<EffectiveStatus> {
    let mut holds: Vec<bool> =
        decls.iter().map(|d| matches!(d, AssertionDeclaration::Axiomatic | AssertionDeclaration::Assumed)).collect();
    loop {
        let mut next = holds.clone();
        for r in rels.iter().filter(|r| !r.sources.contains(&r.target)) {
            if matches!(decls[r.target], AssertionDeclaration::Asserted | AssertionDeclaration::NeedsSupport)
                && r.sources.iter().all(|s| holds[*s])
            {
                next[r.target] = true;
            }
        }
        if next == holds {
            break;
        }
        holds = next;
    }
    decls
        .iter()
        .enumerate()
        .map(|(i, d)| match d {
            AssertionDeclaration::Axiomatic => EffectiveStatus::Axiomatic,
            AssertionDeclaration::Assumed => EffectiveStatus::Assumed,
            AssertionDeclaration::Defeated => EffectiveStatus::Defeated,
            _ if holds[i] => EffectiveStatus::Supported,
            _ => EffectiveStatus::NeedsSupport,
        })
        .collect()
}

proptest! {
    #[test]
    fn status_is_the_least_fixpoint_without_counters(
        decls in proptest::collection::vec(decl(), CLAIMS),
        rels in proptest::collection::vec(rel(false), 0..8),
    ) {
        let got = statuses(&build(&decls, &rels));
        let want = oracle(&decls, &rels);
        for (i, w) in want.iter().enumerate() {
            prop_assert_eq!(got[&claim_name(i)], *w, "C{}", i);
        }
    }

    #[test]
    fn support_from_a_supported_source_is_monotone(
        decls in proptest::collection::vec(decl(), CLAIMS),
        rels in proptest::collection::vec(rel(false), 0..8),
        source in 0..CLAIMS,
        target in 0..CLAIMS,
    ) {
        let before = statuses(&build(&decls, &rels));
        prop_assume!(before[&claim_name(source)].holds() && source != target);
        let mut more = rels.clone();
        more.push(Rel { counter: false, sources: vec![source], target });
        let after = statuses(&build(&decls, &more));
        for (g, s) in &before {
            if *s == EffectiveStatus::Supported {
                prop_assert_eq!(after[g], EffectiveStatus::Supported, "{}", g);
            }
        }
    }

    #[test]
    fn status_is_deterministic_and_total(
        decls in proptest::collection::vec(decl(), CLAIMS),
        rels in proptest::collection::vec(rel(true), 0..8),
    ) {
        let m = build(&decls, &rels);
        let a = statuses(&m);
        prop_assert_eq!(a.len(), CLAIMS);
        prop_assert_eq!(&a, &statuses(&m));
        for i in 0..CLAIMS {
            let one = assurkit::checker::compute_status(&m, &BTreeMap::new(), &claim_name(i)).unwrap();
            prop_assert_eq!(one, a[&claim_name(i)]);
        }
    }

    #[test]
    fn add_then_resolve_is_identity(names in proptest::collection::vec("[A-D][0-3]", 1..10)) {
        let mut m = ArgumentModel::new();
        let mut kinds: BTreeMap<Gid, EntityKind> = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            let g = Gid::new(n.clone()).unwrap();
            let added = if i % 2 == 0 {
                m.add_asset(ArgumentAsset::claim(g.clone(), AssertionDeclaration::Asserted, MultiLangString::plain(n))).map(|_| EntityKind::Claim)
            } else {
                m.add_obligation(assurkit::sacm::ObligationEntry::new(g.clone(), "hoare {true} skip {true}".into())).map(|_| EntityKind::Obligation)
            };
            match added {
                Ok(k) => { prop_assert!(kinds.insert(g, k).is_none()); }
                Err(_) => prop_assert!(kinds.contains_key(&g)),
            }
        }
        for (g, k) in &kinds {
            let e = m.resolve(*k, g).unwrap();
            prop_assert_eq!(e.kind(), *k);
            let other = if *k == EntityKind::Claim { EntityKind::Obligation } else { EntityKind::Claim };
            prop_assert!(m.resolve(other, g).is_err());
            if let Entity::Asset(a) = e {
                prop_assert_eq!(&a.gid, g);
            }
        }
    }
}

fn generated_document() -> impl Strategy<Value = String> {
    let g = prop_oneof![Just("A"), Just("B"), Just("C"), Just("R"), Just("S"), Just("X")];
    let cmd = prop_oneof![
        (g.clone(), prop_oneof![Just(""), Just(" DECL axiomatic")]).prop_map(|(g, d)| format!("CLAIM {g}{d} CONTENT \"c\"")),
        (g.clone(), g.clone(), g.clone()).prop_map(|(r, s, t)| format!("ASSERTED_INFERENCE {r} SOURCE {s} TARGET {t}")),
        (g.clone(), g.clone()).prop_map(|(t, r)| format!("TEXT \"@{{Claim {t}}} and @{{AssertedInference {r}}}\"")),
        (g.clone(), g.clone()).prop_map(|(r, a)| format!("ARTIFACT_REFERENCE {r} REFERENCES {a}")),
        (g.clone(), g).prop_map(|(e, s)| format!("ASSERTED_EVIDENCE E{e} SOURCE {s} TARGET {e}")),
    ];
    proptest::collection::vec(cmd, 0..10).prop_map(|cs| cs.join("\n"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn clean_runs_resolve_everything_and_are_acyclic(src in generated_document()) {
        let r = full_check(&[Source::new("g.asr", src.clone())], &CheckConfig::default());
        if r.errors() > 0 {
            return Ok(());
        }
        let m = &r.elaboration.model;
        let mut edges: BTreeMap<&Gid, BTreeSet<&Gid>> = BTreeMap::new();
        for a in m.assets.values() {
            if let Some(rel) = a.as_relationship() {
                for g in rel.source.iter().chain(&rel.target) {
                    prop_assert!(m.get(g).is_some(), "{} in {}", g, src);
                }
                if rel.kind.bears_on_status() {
                    for s in &rel.source {
                        edges.entry(s).or_default().extend(rel.target.iter());
                    }
                }
            }
        }
        for (_, content) in r.elaboration.texts.keys().filter_map(|n| r.elaboration.content_of(n).map(|c| (n, c))) {
            for (_, g) in content.mls.collect_refs() {
                prop_assert!(m.get(&g).is_some());
            }
        }
        // no node reaches itself
        for start in edges.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<&Gid> = edges[start].iter().copied().collect();
            while let Some(x) = stack.pop() {
                prop_assert!(x != *start, "cycle through {} in {}", start, src);
                if seen.insert(x) {
                    stack.extend(edges.get(x).into_iter().flatten().copied());
                }
            }
        }
    }

    #[test]
    fn json_output_is_stable_and_sorted(src in generated_document()) {
        let a = full_check(&[Source::new("g.asr", src.clone())], &CheckConfig::default());
        let b = full_check(&[Source::new("g.asr", src)], &CheckConfig::default());
        prop_assert_eq!(render_json(&a.diagnostics), render_json(&b.diagnostics));
        for w in a.diagnostics.windows(2) {
            prop_assert!((&w[0].span, &w[0].code) <= (&w[1].span, &w[1].code));
        }
    }
}

#[test]
fn defeat_wins_over_support() {
    let src = "CLAIM A DECL axiomatic CONTENT \"a\"\nCLAIM B CONTENT \"b\"\n\
               ASSERTED_INFERENCE For SOURCE A TARGET B\nASSERTED_INFERENCE Against COUNTER SOURCE A TARGET B\n";
    let r = full_check(&[Source::new("d.asr", src)], &CheckConfig::default());
    assert_eq!(r.status("B"), Some(EffectiveStatus::Defeated));
    let w: Vec<_> = r.diagnostics.iter().filter(|d| d.code == "W002").collect();
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].to_string(), "d.asr:2:7: warning[W002]: claim `B` is defeated");
}

#[test]
fn structure_rules() {
    let src = "CLAIM A CONTENT \"a\"\nCLAIM B CONTENT \"b\"\nCLAIM W CONTENT \"w\"\n\
               ASSERTED_EVIDENCE E SOURCE A TARGET B\n\
               ARGUMENT_REASONING Why CONTENT \"because\"\n\
               ASSERTED_INFERENCE I REASONING A SOURCE A TARGET B\n\
               ASSERTED_CONTEXT K SOURCE I TARGET B\n\
               ASSERTED_INFERENCE J REASONING Why SOURCE W TARGET A\n";
    let r = full_check(&[Source::new("s.asr", src)], &CheckConfig::default());
    let codes: Vec<(&str, &str)> = r
        .diagnostics
        .iter()
        .filter(|d| d.is_error())
        .map(|d| (d.code.as_str(), d.subject.as_ref().unwrap().as_str()))
        .collect();
    assert_eq!(codes, vec![("E021", "E"), ("E023", "I"), ("E022", "K")]);
}

#[test]
fn support_cycle_is_reported_once() {
    let src = "CLAIM A CONTENT \"a\"\nCLAIM B CONTENT \"b\"\n\
               ASSERTED_INFERENCE AB SOURCE A TARGET B\nASSERTED_INFERENCE BA SOURCE B TARGET A\n";
    let r = full_check(&[Source::new("c.asr", src)], &CheckConfig::default());
    let cycles: Vec<_> = r.diagnostics.iter().filter(|d| d.code == "E020").collect();
    assert_eq!(cycles.len(), 1);
    assert_eq!(cycles[0].message, "support cycle: A -> B -> A");
    assert_eq!(cycles[0].subject, Some(Gid::new("AB").unwrap()));
}

#[test]
fn failing_obligation_prints_its_counterexample() {
    let model = "model M\nvar s : {a, b}\n";
    let asr = "OBLIGATION Bad SPEC \"M: hoare {true} s := b {s = a}\"\n\
               OBLIGATION Broken SPEC \"M: hoare {true} s := c {true}\"\n";
    let r = full_check(&[Source::new("m.gcl", model), Source::new("o.asr", asr)], &CheckConfig::default());
    let e030 = r.diagnostics.iter().find(|d| d.code == "E030").unwrap();
    assert_eq!(e030.message, "obligation `Bad` fails over model `M`; counterexample:\n    s = a");
    let e031 = r.diagnostics.iter().find(|d| d.code == "E031").unwrap();
    assert_eq!((e031.span.start_line, e031.span.start_col), (2, 24));
    let small = CheckConfig { state_cap: 1 };
    let r = full_check(&[Source::new("m.gcl", model), Source::new("o.asr", asr)], &small);
    assert!(r.diagnostics.iter().any(|d| d.code == "E032"));
}

#[test]
fn imports_are_checked() {
    let r = full_check(
        &[
            Source::new("a.asr", "DOCUMENT a\nIMPORTS b\nCLAIM A CONTENT \"a\""),
            Source::new("b.asr", "DOCUMENT b\nIMPORTS a\nIMPORTS nowhere\nCLAIM B CONTENT \"b\""),
        ],
        &CheckConfig::default(),
    );
    let codes: BTreeSet<&str> = r.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.code.as_str()).collect();
    assert_eq!(codes, BTreeSet::from(["E002", "E003"]));
}
