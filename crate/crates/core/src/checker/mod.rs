//! Elaboration of parsed documents into an [`ArgumentModel`], reference and
//! structure checks, claim status, and discharge of formal obligations.
//!
//! | code | meaning |
//! |------|---------|
//! | E000 | syntax error |
//! | E001 | duplicate gid |
//! | E002 | import cycle |
//! | E003 | unknown import |
//! | E004 | duplicate document name |
//! | E005 | invalid entity (bad date, overlapping source and target, ...) |
//! | E010 | unresolved or mis-kinded gid in a SOURCE/TARGET/REFERENCES/REASONING position |
//! | E011 | unresolved antiquotation |
//! | E020 | support cycle |
//! | E021 | evidence source is not an ArtifactReference |
//! | E022 | context source is neither a Claim nor an ArtifactReference |
//! | E023 | reasoning link is not an ArgumentReasoning |
//! | E030 | obligation fails |
//! | E031 | obligation spec does not parse or typecheck |
//! | E032 | obligation state space above the cap |
//! | W001 | claim needs support |
//! | W002 | claim is defeated |

mod discharge;
mod elaborate;
mod rules;
mod status;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::argdsl::{Command, CommandForm, Span};
use crate::sacm::Gid;

pub use discharge::{discharge, ObligationOutcome};
pub use elaborate::{elaborate, parse_source, Elaboration, Origin, ParsedBody, ParsedFile, TextBlock};
pub use rules::{check_node, support_cycles, Anchor, NodeDiagnostic};
pub use status::{compute_status, compute_statuses, EffectiveStatus, StatusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub span: Span,
    pub message: String,
    pub subject: Option<Gid>,
}

impl Diagnostic {
    pub fn error(code: &str, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Error, code: code.into(), span, message: message.into(), subject: None }
    }

    pub fn warning(code: &str, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Warning, code: code.into(), span, message: message.into(), subject: None }
    }

    pub fn about(mut self, gid: &Gid) -> Diagnostic {
        self.subject = Some(gid.clone());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}[{}]: {}", self.span, self.severity, self.code, self.message)
    }
}

/// Orders by file, span, code, then message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.span
            .cmp(&b.span)
            .then_with(|| a.code.cmp(&b.code))
            .then_with(|| a.message.cmp(&b.message))
            .then_with(|| a.subject.cmp(&b.subject))
    });
}

/// An input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub file: String,
    pub text: String,
}

impl Source {
    pub fn new(file: impl Into<String>, text: impl Into<String>) -> Source {
        Source { file: file.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub state_cap: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { state_cap: gcl::DEFAULT_STATE_CAP }
    }
}

/// Node identifier of a TEXT command in the dependency graph.
pub fn text_node(doc: &str, index: usize) -> String {
    format!("text:{doc}:{index}")
}

/// Node identifier of a document.
pub fn doc_node(doc: &str) -> String {
    format!("doc:{doc}")
}

/// Everything a check produces.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub elaboration: Elaboration,
    pub diagnostics: Vec<Diagnostic>,
    pub statuses: BTreeMap<Gid, EffectiveStatus>,
    pub verdicts: BTreeMap<Gid, ObligationOutcome>,
}

impl CheckReport {
    pub fn errors(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    pub fn warnings(&self) -> usize {
        self.diagnostics.len() - self.errors()
    }

    pub fn status(&self, gid: &str) -> Option<EffectiveStatus> {
        self.statuses.get(&Gid::new(gid).ok()?).copied()
    }
}

/// Span of `anchor` within the command or model that defines `node`.
pub fn anchor_span(elab: &Elaboration, node: &str, anchor: &Anchor) -> Span {
    let command = match elab.node_origin(node) {
        Some(Origin::Model { header, .. }) => return header.clone(),
        Some(Origin::Command { command, .. }) => command,
        None => return Span::default(),
    };
    anchor_in_command(command, anchor).unwrap_or_else(|| command.span.clone())
}

fn anchor_in_command(command: &Command, anchor: &Anchor) -> Option<Span> {
    let nth = |v: &[crate::argdsl::Located<Gid>], i: usize| v.get(i).map(|g| g.span.clone());
    Some(match (anchor, &command.form) {
        (Anchor::Gid, _) => command.gid()?.span.clone(),
        (Anchor::Source(i), CommandForm::Relationship { source, .. } | CommandForm::ArtifactRel { source, .. }) => {
            nth(source, *i)?
        }
        (Anchor::Target(i), CommandForm::Relationship { target, .. } | CommandForm::ArtifactRel { target, .. }) => {
            nth(target, *i)?
        }
        (Anchor::Reasoning, CommandForm::Relationship { reasoning: Some(r), .. }) => r.span.clone(),
        (Anchor::Referenced(i), CommandForm::ArtifactReference { referenced, .. }) => nth(referenced, *i)?,
        (Anchor::Antiquote(i), _) => command.content()?.ref_spans.get(*i)?.clone(),
        (Anchor::Spec, CommandForm::Obligation { spec, .. }) => spec.span.clone(),
        (Anchor::Date, CommandForm::Artifact { date, .. }) => date.span.clone(),
        _ => return None,
    })
}

pub fn materialize(elab: &Elaboration, node: &str, nd: &NodeDiagnostic) -> Diagnostic {
    Diagnostic {
        severity: nd.severity,
        code: nd.code.to_string(),
        span: anchor_span(elab, node, &nd.anchor),
        message: nd.message.clone(),
        subject: nd.subject.clone(),
    }
}

/// Diagnostics that are recomputed from scratch on every check: parsing,
/// elaboration, support cycles, and claim status.
pub fn global_diagnostics(
    files: &[&ParsedFile],
    elab: &Elaboration,
    statuses: &BTreeMap<Gid, EffectiveStatus>,
) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = files.iter().flat_map(|f| f.errors.iter().cloned()).collect();
    out.extend(elab.diagnostics.iter().cloned());
    out.extend(support_cycles(elab));
    for (gid, status) in statuses {
        let span = anchor_span(elab, gid.as_str(), &Anchor::Gid);
        match status {
            EffectiveStatus::NeedsSupport => {
                out.push(Diagnostic::warning("W001", span, format!("claim `{gid}` needs support")).about(gid))
            }
            EffectiveStatus::Defeated => {
                out.push(Diagnostic::warning("W002", span, format!("claim `{gid}` is defeated")).about(gid))
            }
            _ => {}
        }
    }
    out
}

/// Check a set of files from scratch.
pub fn full_check(sources: &[Source], config: &CheckConfig) -> CheckReport {
    let mut files: Vec<ParsedFile> = sources.iter().map(parse_source).collect();
    files.sort_by(|a, b| a.file.cmp(&b.file));
    let refs: Vec<&ParsedFile> = files.iter().collect();
    let elab = elaborate(&refs);
    let verdicts: BTreeMap<Gid, ObligationOutcome> = elab
        .model
        .obligations
        .values()
        .map(|o| (o.gid.clone(), discharge(o, &elab.models, config.state_cap)))
        .collect();
    let statuses = compute_statuses(&elab.model, &verdicts);
    let mut diagnostics = global_diagnostics(&refs, &elab, &statuses);
    for node in elab.checkable_nodes() {
        for nd in check_node(&elab, &verdicts, &node) {
            diagnostics.push(materialize(&elab, &node, &nd));
        }
    }
    sort_diagnostics(&mut diagnostics);
    CheckReport { elaboration: elab, diagnostics, statuses, verdicts }
}

/// Render diagnostics one per line in text form.
pub fn render_text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

/// Render diagnostics as a JSON array.
pub fn render_json(diags: &[Diagnostic]) -> String {
    serde_json::to_string_pretty(diags).expect("diagnostics serialise")
}
