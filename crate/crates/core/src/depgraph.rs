//! Dependency graph over entities, TEXT blocks and documents, and
//! incremental rechecking driven by per-node fingerprints.
//!
//! Edges run from user to used. A node's own diagnostics depend only on its
//! command and on the nodes it can reach, so after an edit only the reverse
//! closure of the changed nodes is rechecked. Parsing, elaboration, support
//! cycles and claim status are global and cheap; they are recomputed on
//! every check.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::{Hash, Hasher};

use crate::checker::{
    check_node, compute_statuses, discharge, doc_node, global_diagnostics, materialize, parse_source, sort_diagnostics,
    CheckConfig, CheckReport, Diagnostic, EffectiveStatus, Elaboration, NodeDiagnostic, ObligationOutcome, Origin,
    ParsedFile, Source,
};
use crate::sacm::{AssetVariant, EntityKind, Gid};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl DepGraph {
    fn edge(&mut self, from: &str, to: &str) {
        self.nodes.insert(from.to_string());
        self.nodes.insert(to.to_string());
        self.edges.insert((from.to_string(), to.to_string()));
    }

    /// Nodes with an edge into `node`.
    pub fn users_of(&self, node: &str) -> Vec<&str> {
        self.edges.iter().filter(|(_, b)| b == node).map(|(a, _)| a.as_str()).collect()
    }

    pub fn uses(&self, node: &str) -> Vec<&str> {
        self.edges.iter().filter(|(a, _)| a == node).map(|(_, b)| b.as_str()).collect()
    }

    fn reverse(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut rev: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.edges {
            rev.entry(b.as_str()).or_default().push(a.as_str());
        }
        rev
    }
}

/// Every reference the elaborated model contains. Referenced gids that are
/// not defined still become nodes.
pub fn build_graph(elab: &Elaboration) -> DepGraph {
    let mut g = DepGraph::default();
    for gid in elab.origins.keys() {
        g.nodes.insert(gid.to_string());
    }
    for a in elab.model.assets.values() {
        let me = a.gid.as_str();
        match &a.variant {
            AssetVariant::Relationship(r) => {
                for x in r.source.iter().chain(&r.target).chain(&r.reasoning) {
                    g.edge(me, x.as_str());
                }
            }
            AssetVariant::ArtifactReference { referenced } => {
                for x in referenced {
                    g.edge(me, x.as_str());
                }
            }
            _ => {}
        }
    }
    for a in elab.model.artifacts.values() {
        for x in a.source.iter().chain(&a.target) {
            g.edge(a.gid.as_str(), x.as_str());
        }
    }
    for o in elab.model.obligations.values() {
        match &o.model {
            Some(m) => g.edge(o.gid.as_str(), m),
            None => {
                for c in elab.model.constants.keys() {
                    g.edge(o.gid.as_str(), c.as_str());
                }
            }
        }
    }
    for node in elab.checkable_nodes() {
        g.nodes.insert(node.clone());
        if let Some(content) = elab.content_of(&node) {
            for (_, target) in content.mls.collect_refs() {
                g.edge(&node, target.as_str());
            }
        }
    }
    for (name, info) in &elab.documents {
        g.nodes.insert(doc_node(name));
        for i in &info.imports {
            g.edge(&doc_node(name), &doc_node(&i.value));
        }
    }
    g
}

/// `changed` together with every node that reaches one of them.
pub fn affected(graph: &DepGraph, changed: &BTreeSet<String>) -> BTreeSet<String> {
    let rev = graph.reverse();
    let mut out = changed.clone();
    let mut queue: VecDeque<&str> = changed.iter().map(String::as_str).collect();
    while let Some(n) = queue.pop_front() {
        for u in rev.get(n).into_iter().flatten() {
            if out.insert(u.to_string()) {
                queue.push_back(u);
            }
        }
    }
    out
}

fn hash_of(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

/// Content hash of every node. Commands hash by their canonical printed
/// form, so layout and comments do not matter.
fn fingerprints(elab: &Elaboration, graph: &DepGraph) -> BTreeMap<String, u64> {
    graph
        .nodes
        .iter()
        .map(|n| {
            let text = if let Some(name) = n.strip_prefix("doc:") {
                match elab.documents.get(name) {
                    Some(d) => {
                        let imports: Vec<&str> = d.imports.iter().map(|i| i.value.as_str()).collect();
                        format!("doc {name} {}", imports.join(" "))
                    }
                    None => "missing document".to_string(),
                }
            } else {
                match elab.node_origin(n) {
                    Some(Origin::Command { command, .. }) => command.pretty(),
                    Some(Origin::Model { .. }) => format!("{:?}", elab.models.get(n)),
                    None => "missing".to_string(),
                }
            };
            (n.clone(), hash_of(&text))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub file: String,
    /// New contents, or `None` to remove the file.
    pub text: Option<String>,
}

impl Edit {
    pub fn set(file: impl Into<String>, text: impl Into<String>) -> Edit {
        Edit { file: file.into(), text: Some(text.into()) }
    }

    pub fn remove(file: impl Into<String>) -> Edit {
        Edit { file: file.into(), text: None }
    }
}

/// What an incremental check did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recheck {
    pub changed: BTreeSet<String>,
    pub affected: BTreeSet<String>,
    /// Entity nodes whose diagnostics were recomputed.
    pub touched_entities: usize,
    pub total_entities: usize,
}

/// Everything kept between checks.
#[derive(Debug, Clone)]
pub struct CheckState {
    pub config: CheckConfig,
    pub sources: BTreeMap<String, String>,
    parsed: BTreeMap<String, ParsedFile>,
    pub elaboration: Elaboration,
    pub graph: DepGraph,
    pub fingerprints: BTreeMap<String, u64>,
    node_diagnostics: BTreeMap<String, Vec<NodeDiagnostic>>,
    pub verdicts: BTreeMap<Gid, ObligationOutcome>,
    pub statuses: BTreeMap<Gid, EffectiveStatus>,
    diagnostics: Vec<Diagnostic>,
}

impl CheckState {
    /// A full check.
    pub fn new(sources: &[Source], config: CheckConfig) -> CheckState {
        let srcs: BTreeMap<String, String> = sources.iter().map(|s| (s.file.clone(), s.text.clone())).collect();
        let parsed = srcs
            .iter()
            .map(|(f, t)| (f.clone(), parse_source(&Source::new(f.clone(), t.clone()))))
            .collect();
        Self::build(config, srcs, parsed, None).0
    }

    fn build(
        config: CheckConfig,
        sources: BTreeMap<String, String>,
        parsed: BTreeMap<String, ParsedFile>,
        prev: Option<&CheckState>,
    ) -> (CheckState, Recheck) {
        let files: Vec<&ParsedFile> = parsed.values().collect();
        let elaboration = crate::checker::elaborate(&files);
        let graph = build_graph(&elaboration);
        let fingerprints = fingerprints(&elaboration, &graph);

        let (affected_nodes, changed) = match prev {
            None => (graph.nodes.clone(), graph.nodes.clone()),
            Some(p) => {
                let changed: BTreeSet<String> = graph
                    .nodes
                    .iter()
                    .chain(&p.graph.nodes)
                    .filter(|n| fingerprints.get(*n) != p.fingerprints.get(*n))
                    .cloned()
                    .collect();
                let mut union = graph.clone();
                union.nodes.extend(p.graph.nodes.iter().cloned());
                union.edges.extend(p.graph.edges.iter().cloned());
                (affected(&union, &changed), changed)
            }
        };

        let mut verdicts = BTreeMap::new();
        for (gid, o) in &elaboration.model.obligations {
            let cached = prev.filter(|_| !affected_nodes.contains(gid.as_str())).and_then(|p| p.verdicts.get(gid));
            let v = match cached {
                Some(v) => v.clone(),
                None => discharge(o, &elaboration.models, config.state_cap),
            };
            verdicts.insert(gid.clone(), v);
        }
        let statuses = compute_statuses(&elaboration.model, &verdicts);

        let mut node_diagnostics = BTreeMap::new();
        let mut touched = 0;
        for node in elaboration.checkable_nodes() {
            let cached = prev.filter(|_| !affected_nodes.contains(&node)).and_then(|p| p.node_diagnostics.get(&node));
            let nds = match cached {
                Some(nds) => nds.clone(),
                None => {
                    if !node.starts_with("text:") {
                        touched += 1;
                    }
                    check_node(&elaboration, &verdicts, &node)
                }
            };
            node_diagnostics.insert(node, nds);
        }

        let mut diagnostics = global_diagnostics(&files, &elaboration, &statuses);
        for (node, nds) in &node_diagnostics {
            diagnostics.extend(nds.iter().map(|nd| materialize(&elaboration, node, nd)));
        }
        sort_diagnostics(&mut diagnostics);

        let total_entities = elaboration.origins.len();
        let recheck = Recheck {
            changed,
            affected: if prev.is_some() { affected_nodes } else { graph.nodes.clone() },
            touched_entities: touched,
            total_entities,
        };
        let state = CheckState {
            config,
            sources,
            parsed,
            elaboration,
            graph,
            fingerprints,
            node_diagnostics,
            verdicts,
            statuses,
            diagnostics,
        };
        (state, recheck)
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Apply edits and recheck only what they affect.
    pub fn apply(&self, edits: &[Edit]) -> (CheckState, Recheck) {
        let mut sources = self.sources.clone();
        let mut parsed = self.parsed.clone();
        for e in edits {
            match &e.text {
                Some(t) if sources.get(&e.file) == Some(t) => {}
                Some(t) => {
                    sources.insert(e.file.clone(), t.clone());
                    parsed.insert(e.file.clone(), parse_source(&Source::new(e.file.clone(), t.clone())));
                }
                None => {
                    sources.remove(&e.file);
                    parsed.remove(&e.file);
                }
            }
        }
        Self::build(self.config, sources, parsed, Some(self))
    }

    pub fn report(&self) -> CheckReport {
        CheckReport {
            elaboration: self.elaboration.clone(),
            diagnostics: self.diagnostics.clone(),
            statuses: self.statuses.clone(),
            verdicts: self.verdicts.clone(),
        }
    }
}

/// Recheck after `edits`; the diagnostics equal those of a full check of
/// the edited sources.
pub fn incremental_check(prev: &CheckState, edits: &[Edit]) -> (CheckState, Vec<Diagnostic>) {
    let (next, _) = prev.apply(edits);
    let diags = next.diagnostics.clone();
    (next, diags)
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn shape(kind: EntityKind) -> &'static str {
    match kind {
        EntityKind::Claim => "box",
        EntityKind::ArgumentReasoning => "note",
        EntityKind::ArtifactReference => "folder",
        EntityKind::AssertedInference => "parallelogram",
        EntityKind::AssertedContext => "ellipse",
        EntityKind::AssertedEvidence => "circle",
        EntityKind::AssertedArtifactSupport => "diamond",
        EntityKind::Artifact
        | EntityKind::Activity
        | EntityKind::Participant
        | EntityKind::Resource
        | EntityKind::Technique
        | EntityKind::ArtifactRelationship => "component",
        EntityKind::Expression => "plaintext",
        EntityKind::Obligation => "hexagon",
        EntityKind::Constant => "cylinder",
    }
}

/// DOT rendering of the entity part of the graph. TEXT and document nodes
/// are left out; edges leaving a counter relationship are dashed and red.
pub fn export_dot(graph: &DepGraph, elab: &Elaboration) -> String {
    let shown = |n: &str| !n.starts_with("text:") && !n.starts_with("doc:");
    let nodes: Vec<&String> = graph.nodes.iter().filter(|n| shown(n)).collect();
    if nodes.is_empty() {
        return "digraph assurance { }\n".to_string();
    }
    let mut out = String::from("digraph assurance {\n  rankdir=BT;\n");
    for n in &nodes {
        let kind = Gid::new(n.as_str()).ok().and_then(|g| elab.model.kind_of(&g));
        match kind {
            Some(k) => out.push_str(&format!("  {} [shape={}, label={}];\n", dot_id(n), shape(k), dot_id(&format!("{n}\\n{k}")))),
            None => out.push_str(&format!("  {} [shape=box, style=dashed, label={}];\n", dot_id(n), dot_id(&format!("{n}\\n(missing)")))),
        }
    }
    for (a, b) in graph.edges.iter().filter(|(a, b)| shown(a) && shown(b)) {
        let counter = Gid::new(a.as_str())
            .ok()
            .and_then(|g| elab.model.assets.get(&g))
            .and_then(|x| x.as_relationship())
            .is_some_and(|r| r.is_counter);
        let style = if counter { " [style=dashed, color=red]" } else { "" };
        out.push_str(&format!("  {} -> {}{};\n", dot_id(a), dot_id(b), style));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn graph(edges: &[(&str, &str)]) -> DepGraph {
        let mut g = DepGraph::default();
        for (a, b) in edges {
            g.edge(a, b);
        }
        g
    }

    #[test]
    fn affected_is_the_reverse_closure() {
        let g = graph(&[("Rel_A", "Claim_A"), ("Text_1", "Rel_A"), ("Rel_A", "Claim_B")]);
        assert_eq!(affected(&g, &set(&["Claim_A"])), set(&["Claim_A", "Rel_A", "Text_1"]));
        assert_eq!(affected(&g, &set(&["Text_1"])), set(&["Text_1"]));
        assert!(affected(&g, &BTreeSet::new()).is_empty());
        assert_eq!(affected(&g, &set(&["Gone"])), set(&["Gone"]));
    }

    fn elab_of(src: &str) -> Elaboration {
        let p = parse_source(&Source::new("f.asr", src));
        crate::checker::elaborate(&[&p])
    }

    #[test]
    fn graph_of_the_inference_pair() {
        let e = elab_of("CLAIM Claim_A CONTENT \"a\"\nASSERTED_INFERENCE Rel_A SOURCE Claim_A TARGET Claim_B");
        let g = build_graph(&e);
        assert_eq!(g.edges, [("Rel_A", "Claim_A"), ("Rel_A", "Claim_B")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect());
        assert!(g.nodes.contains("Claim_B"));
        let dot = export_dot(&g, &e);
        assert_eq!(dot.matches("shape=").count(), 3);
        assert_eq!(dot.matches(" -> ").count(), 2);
    }

    #[test]
    fn empty_dot() {
        let e = elab_of("");
        assert_eq!(build_graph(&e).nodes, set(&["doc:f"]));
        assert_eq!(export_dot(&build_graph(&e), &e), "digraph assurance { }\n");
    }

    #[test]
    fn counter_edges_are_styled() {
        let e = elab_of("CLAIM A CONTENT \"a\"\nARTIFACT_REFERENCE R REFERENCES X\nASSERTED_EVIDENCE E COUNTER SOURCE R TARGET A");
        let dot = export_dot(&build_graph(&e), &e);
        assert!(dot.contains("\"E\" -> \"A\" [style=dashed, color=red];"));
        assert!(dot.contains("\"R\" -> \"X\";"));
    }

    #[test]
    fn whitespace_edits_change_nothing() {
        let src = "CLAIM A CONTENT \"a\"\nASSERTED_INFERENCE R SOURCE A TARGET B\n";
        let s = CheckState::new(&[Source::new("f.asr", src)], CheckConfig::default());
        let (same, r) = s.apply(&[Edit::set("f.asr", src)]);
        assert!(r.affected.is_empty());
        assert_eq!(same.diagnostics(), s.diagnostics());
        let (moved, r) = s.apply(&[Edit::set("f.asr", format!("\n# moved\n{}", src.replace(' ', "   ")))]);
        assert!(r.changed.is_empty(), "{:?}", r.changed);
        assert_eq!(moved.diagnostics()[0].span.start_line, s.diagnostics()[0].span.start_line + 2);
    }
}
