use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::graph::{DiGraph, NodeIndex};

use crate::argdsl::CommandForm;
use crate::sacm::{Entity, EntityKind, Gid, NotFound, RelKind};

use super::{anchor_span, Diagnostic, Elaboration, ObligationOutcome, Origin, Severity};

/// Which part of the defining command a diagnostic points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Anchor {
    Gid,
    Source(usize),
    Target(usize),
    Reasoning,
    Referenced(usize),
    Antiquote(usize),
    Spec,
    Date,
}

/// A diagnostic owned by one node, positioned relative to its command.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeDiagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub anchor: Anchor,
    pub message: String,
    pub subject: Option<Gid>,
}

impl NodeDiagnostic {
    fn error(code: &'static str, anchor: Anchor, message: String, subject: &Gid) -> NodeDiagnostic {
        NodeDiagnostic { severity: Severity::Error, code, anchor, message, subject: Some(subject.clone()) }
    }
}

enum Expect {
    Asset(&'static str),
    ArtifactOrObligation,
    Artifact,
    Reasoning,
}

impl Expect {
    fn describe(&self) -> &'static str {
        match self {
            Expect::Asset(d) => d,
            Expect::ArtifactOrObligation => "an artifact element or Obligation",
            Expect::Artifact => "an artifact element",
            Expect::Reasoning => "ArgumentReasoning",
        }
    }

    fn admits(&self, k: EntityKind) -> bool {
        match self {
            Expect::Asset(_) => k.is_argument_asset(),
            Expect::ArtifactOrObligation => k.is_artifact_element() || k == EntityKind::Obligation,
            Expect::Artifact => k.is_artifact_element(),
            // wrong kinds are a structure error (E023), not a reference error
            Expect::Reasoning => true,
        }
    }
}

fn endpoint_expectations(kind: RelKind) -> (&'static str, &'static str) {
    match kind {
        RelKind::Inference => ("Claim", "Claim"),
        RelKind::Evidence => ("ArtifactReference", "Claim"),
        RelKind::Context => ("Claim or ArtifactReference", "Claim"),
        RelKind::ArtifactSupport => ("an argument asset", "an argument asset"),
    }
}

/// E010 diagnostics of the entity defined by `origin`.
fn reference_errors(elab: &Elaboration, owner: &Gid, origin: &Origin) -> Vec<NodeDiagnostic> {
    let Some(command) = origin.command() else { return Vec::new() };
    let mut positions: Vec<(Anchor, &Gid, Expect)> = Vec::new();
    match &command.form {
        CommandForm::Relationship { kind, reasoning, source, target, .. } => {
            let (se, te) = endpoint_expectations(*kind);
            if let Some(r) = reasoning {
                positions.push((Anchor::Reasoning, &r.value, Expect::Reasoning));
            }
            positions.extend(source.iter().enumerate().map(|(i, g)| (Anchor::Source(i), &g.value, Expect::Asset(se))));
            positions.extend(target.iter().enumerate().map(|(i, g)| (Anchor::Target(i), &g.value, Expect::Asset(te))));
        }
        CommandForm::ArtifactReference { referenced, .. } => {
            positions.extend(
                referenced.iter().enumerate().map(|(i, g)| (Anchor::Referenced(i), &g.value, Expect::ArtifactOrObligation)),
            );
        }
        CommandForm::ArtifactRel { source, target, .. } => {
            positions.extend(source.iter().enumerate().map(|(i, g)| (Anchor::Source(i), &g.value, Expect::Artifact)));
            positions.extend(target.iter().enumerate().map(|(i, g)| (Anchor::Target(i), &g.value, Expect::Artifact)));
        }
        _ => {}
    }
    positions
        .into_iter()
        .filter_map(|(anchor, g, expect)| {
            let message = match elab.model.kind_of(g) {
                None => format!("`{g}` does not exist (expected {})", expect.describe()),
                Some(k) if !expect.admits(k) => format!("`{g}` has kind {k}, expected {}", expect.describe()),
                Some(_) => return None,
            };
            Some(NodeDiagnostic::error("E010", anchor, message, owner))
        })
        .collect()
}

/// An entity is established when it exists and its own references resolve.
fn established(elab: &Elaboration, gid: &Gid) -> bool {
    match elab.origins.get(gid) {
        Some(origin) => reference_errors(elab, gid, origin).is_empty(),
        None => elab.model.get(gid).is_some(),
    }
}

fn antiquote_errors(elab: &Elaboration, node: &str, subject: Option<&Gid>) -> Vec<NodeDiagnostic> {
    let Some(content) = elab.content_of(node) else { return Vec::new() };
    content
        .mls
        .collect_refs()
        .into_iter()
        .enumerate()
        .filter_map(|(i, (kind, g))| {
            let problem = match elab.model.resolve(kind, &g) {
                Err(NotFound::Absent) => format!("`{g}` does not exist"),
                Err(NotFound::KindMismatch { found }) => format!("`{g}` has kind {found}, not {kind}"),
                Ok(_) if !established(elab, &g) => format!("`{g}` has unresolved references"),
                Ok(_) => return None,
            };
            Some(NodeDiagnostic {
                severity: Severity::Error,
                code: "E011",
                anchor: Anchor::Antiquote(i),
                message: format!("unresolved antiquotation @{{{kind} {g}}}: {problem}"),
                subject: subject.cloned(),
            })
        })
        .collect()
}

fn structure_errors(elab: &Elaboration, owner: &Gid) -> Vec<NodeDiagnostic> {
    let Some(r) = elab.model.assets.get(owner).and_then(|a| a.as_relationship()) else { return Vec::new() };
    let mut out = Vec::new();
    let asset_kind = |g: &Gid| elab.model.kind_of(g).filter(|k| k.is_argument_asset());
    for (i, s) in r.source.iter().enumerate() {
        let Some(k) = asset_kind(s) else { continue };
        match r.kind {
            RelKind::Evidence if k != EntityKind::ArtifactReference => out.push(NodeDiagnostic::error(
                "E021",
                Anchor::Source(i),
                format!("evidence source `{s}` has kind {k}, expected ArtifactReference"),
                owner,
            )),
            RelKind::Context if !matches!(k, EntityKind::ArtifactReference | EntityKind::Claim) => {
                out.push(NodeDiagnostic::error(
                    "E022",
                    Anchor::Source(i),
                    format!("context source `{s}` has kind {k}, expected Claim or ArtifactReference"),
                    owner,
                ))
            }
            _ => {}
        }
    }
    if let Some(g) = &r.reasoning {
        if let Some(k) = elab.model.kind_of(g).filter(|k| *k != EntityKind::ArgumentReasoning) {
            out.push(NodeDiagnostic::error(
                "E023",
                Anchor::Reasoning,
                format!("reasoning `{g}` has kind {k}, expected ArgumentReasoning"),
                owner,
            ));
        }
    }
    out
}

fn obligation_errors(owner: &Gid, outcome: Option<&ObligationOutcome>) -> Vec<NodeDiagnostic> {
    match outcome {
        Some(ObligationOutcome::Fail { model, counterexample }) => {
            let lines: String = counterexample.lines().map(|l| format!("\n    {l}")).collect();
            vec![NodeDiagnostic::error(
                "E030",
                Anchor::Gid,
                format!("obligation `{owner}` fails over model `{model}`; counterexample:{lines}"),
                owner,
            )]
        }
        Some(ObligationOutcome::Error { code, message }) => {
            let code = if code == "E032" { "E032" } else { "E031" };
            vec![NodeDiagnostic::error(code, Anchor::Spec, message.clone(), owner)]
        }
        _ => Vec::new(),
    }
}

/// All diagnostics owned by one entity or TEXT node.
pub fn check_node(
    elab: &Elaboration,
    verdicts: &BTreeMap<Gid, ObligationOutcome>,
    node: &str,
) -> Vec<NodeDiagnostic> {
    if node.starts_with("text:") {
        return antiquote_errors(elab, node, None);
    }
    let Ok(gid) = Gid::new(node) else { return Vec::new() };
    let Some(origin) = elab.origins.get(&gid) else { return Vec::new() };
    let mut out = reference_errors(elab, &gid, origin);
    out.extend(structure_errors(elab, &gid));
    out.extend(antiquote_errors(elab, node, Some(&gid)));
    if let Some(Entity::Obligation(_)) = elab.model.get(&gid) {
        out.extend(obligation_errors(&gid, verdicts.get(&gid)));
    }
    out
}

/// E020 for each strongly connected component of the support graph, whose
/// edges run from sources to targets of inference and evidence links.
pub fn support_cycles(elab: &Elaboration) -> Vec<Diagnostic> {
    let model = &elab.model;
    let mut graph: DiGraph<&Gid, &Gid> = DiGraph::new();
    let index: BTreeMap<&Gid, NodeIndex> = model.assets.keys().map(|g| (g, graph.add_node(g))).collect();
    for a in model.assets.values() {
        let Some(r) = a.as_relationship() else { continue };
        if !r.kind.bears_on_status() {
            continue;
        }
        for s in &r.source {
            for t in &r.target {
                if let (Some(&si), Some(&ti)) = (index.get(s), index.get(t)) {
                    graph.add_edge(si, ti, &a.gid);
                }
            }
        }
    }
    let mut out = Vec::new();
    for scc in petgraph::algo::tarjan_scc(&graph) {
        if scc.len() < 2 {
            continue;
        }
        let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
        let start = *scc.iter().min_by_key(|i| graph[**i]).expect("non-empty");
        // shortest path from start back to itself inside the component
        let mut prev: BTreeMap<NodeIndex, NodeIndex> = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        let mut last = start;
        'search: while let Some(cur) = queue.pop_front() {
            let mut succ: Vec<NodeIndex> = graph.neighbors(cur).filter(|n| members.contains(n)).collect();
            succ.sort_by_key(|n| graph[*n]);
            for n in succ {
                if n == start {
                    last = cur;
                    break 'search;
                }
                if let std::collections::btree_map::Entry::Vacant(e) = prev.entry(n) {
                    e.insert(cur);
                    queue.push_back(n);
                }
            }
        }
        let mut path = vec![graph[last].to_string()];
        let mut at = last;
        while let Some(p) = prev.get(&at) {
            path.push(graph[*p].to_string());
            at = *p;
        }
        path.reverse();
        path.push(graph[start].to_string());
        let rel = graph
            .edge_indices()
            .filter(|e| {
                let (a, b) = graph.edge_endpoints(*e).expect("edge");
                members.contains(&a) && members.contains(&b)
            })
            .map(|e| graph[e])
            .min()
            .expect("a cycle has edges");
        out.push(
            Diagnostic::error("E020", anchor_span(elab, rel.as_str(), &Anchor::Gid), format!("support cycle: {}", path.join(" -> ")))
                .about(rel),
        );
    }
    out
}
