//! The `.asr` assurance DSL: lexer, recovering parser and pretty-printer.
//!
//! ```text
//! DOCUMENT tokeneer_argument
//! IMPORTS tokeneer_requirements
//!
//! CLAIM TIS_SFR1_C1 CONTENT "TIS satisfies @{Expression SFR1}"
//! ASSERTED_INFERENCE TIS_SFR1_S1 SOURCE TIS_SFR1_C2 TIS_SFR1_C4 TARGET TIS_SFR1_C1
//! ```
//!
//! Beyond the core command set the parser accepts `DECL` and `COUNTER` and
//! `REASONING <gid>` on relationships, `ARGUMENT_REASONING <gid> CONTENT s`,
//! and `ARTIFACT_REFERENCE <gid> REFERENCES <gid>+ [CONTENT s]`.

mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sacm::{ArtifactKind, AssertionDeclaration, Gid, MultiLangString, RelKind};

pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse_document, parse_document_partial, parse_multilang};

/// A source range. Lines and columns are 1-based and count characters; the
/// end position is exclusive.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    pub fn new(file: &str, start: (usize, usize), end: (usize, usize)) -> Span {
        Span { file: file.to_string(), start_line: start.0, start_col: start.1, end_line: end.0, end_col: end.1 }
    }

    /// From the start of `self` to the end of `other`.
    pub fn to(&self, other: &Span) -> Span {
        Span { end_line: other.end_line, end_col: other.end_col, ..self.clone() }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

pub type LexError = ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Located<T> {
    pub value: T,
    pub span: Span,
}

/// Parsed string content with the span of each reference fragment, in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Content {
    pub mls: MultiLangString,
    pub span: Span,
    pub ref_spans: Vec<Span>,
}

impl Content {
    pub fn empty() -> Content {
        Content { mls: MultiLangString::plain(""), span: Span::default(), ref_spans: Vec::new() }
    }

    fn is_empty(&self) -> bool {
        self.mls == MultiLangString::plain("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CommandForm {
    Claim {
        gid: Located<Gid>,
        declaration: AssertionDeclaration,
        content: Content,
    },
    Relationship {
        kind: RelKind,
        gid: Located<Gid>,
        declaration: AssertionDeclaration,
        is_counter: bool,
        reasoning: Option<Located<Gid>>,
        source: Vec<Located<Gid>>,
        target: Vec<Located<Gid>>,
        content: Content,
    },
    Reasoning {
        gid: Located<Gid>,
        content: Content,
    },
    ArtifactReference {
        gid: Located<Gid>,
        referenced: Vec<Located<Gid>>,
        content: Content,
    },
    Artifact {
        gid: Located<Gid>,
        kind: ArtifactKind,
        version: String,
        date: Located<String>,
        content: Content,
    },
    ArtifactRel {
        gid: Located<Gid>,
        source: Vec<Located<Gid>>,
        target: Vec<Located<Gid>>,
        content: Content,
    },
    Expression {
        gid: Located<Gid>,
        lang: String,
        body: String,
    },
    Obligation {
        gid: Located<Gid>,
        spec: Located<String>,
    },
    Text {
        content: Content,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Command {
    pub span: Span,
    pub form: CommandForm,
}

impl Command {
    /// The gid the command defines, if any.
    pub fn gid(&self) -> Option<&Located<Gid>> {
        match &self.form {
            CommandForm::Claim { gid, .. }
            | CommandForm::Relationship { gid, .. }
            | CommandForm::Reasoning { gid, .. }
            | CommandForm::ArtifactReference { gid, .. }
            | CommandForm::Artifact { gid, .. }
            | CommandForm::ArtifactRel { gid, .. }
            | CommandForm::Expression { gid, .. }
            | CommandForm::Obligation { gid, .. } => Some(gid),
            CommandForm::Text { .. } => None,
        }
    }

    pub fn content(&self) -> Option<&Content> {
        match &self.form {
            CommandForm::Claim { content, .. }
            | CommandForm::Relationship { content, .. }
            | CommandForm::Reasoning { content, .. }
            | CommandForm::ArtifactReference { content, .. }
            | CommandForm::Artifact { content, .. }
            | CommandForm::ArtifactRel { content, .. }
            | CommandForm::Text { content } => Some(content),
            CommandForm::Expression { .. } | CommandForm::Obligation { .. } => None,
        }
    }

    /// Canonical single-command source text.
    pub fn pretty(&self) -> String {
        let gids = |v: &[Located<Gid>]| v.iter().map(|g| g.value.as_str()).collect::<Vec<_>>().join(" ");
        let decl = |d: &AssertionDeclaration| match d {
            AssertionDeclaration::Asserted => String::new(),
            d => format!(" DECL {}", d.keyword()),
        };
        let opt_content = |c: &Content| {
            if c.is_empty() {
                String::new()
            } else {
                format!(" CONTENT {}", quote(&c.mls.to_string()))
            }
        };
        match &self.form {
            CommandForm::Claim { gid, declaration, content } => {
                format!("CLAIM {}{} CONTENT {}", gid.value, decl(declaration), quote(&content.mls.to_string()))
            }
            CommandForm::Relationship { kind, gid, declaration, is_counter, reasoning, source, target, content } => {
                format!(
                    "{} {}{}{}{} SOURCE {} TARGET {}{}",
                    kind.keyword(),
                    gid.value,
                    decl(declaration),
                    if *is_counter { " COUNTER" } else { "" },
                    reasoning.as_ref().map(|r| format!(" REASONING {}", r.value)).unwrap_or_default(),
                    gids(source),
                    gids(target),
                    opt_content(content)
                )
            }
            CommandForm::Reasoning { gid, content } => {
                format!("ARGUMENT_REASONING {} CONTENT {}", gid.value, quote(&content.mls.to_string()))
            }
            CommandForm::ArtifactReference { gid, referenced, content } => {
                format!("ARTIFACT_REFERENCE {} REFERENCES {}{}", gid.value, gids(referenced), opt_content(content))
            }
            CommandForm::Artifact { gid, kind, version, date, content } => format!(
                "ARTIFACT {} KIND {} VERSION {} DATE {} CONTENT {}",
                gid.value,
                kind.keyword().unwrap_or("artifact"),
                quote(version),
                quote(&date.value),
                quote(&content.mls.to_string())
            ),
            CommandForm::ArtifactRel { gid, source, target, content } => format!(
                "ARTIFACT_REL {} SOURCE {} TARGET {} CONTENT {}",
                gid.value,
                gids(source),
                gids(target),
                quote(&content.mls.to_string())
            ),
            CommandForm::Expression { gid, lang, body } => {
                format!("EXPRESSION {} LANG {} BODY {}", gid.value, quote(lang), quote(body))
            }
            CommandForm::Obligation { gid, spec } => format!("OBLIGATION {} SPEC {}", gid.value, quote(&spec.value)),
            CommandForm::Text { content } => format!("TEXT {}", quote(&content.mls.to_string())),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub name: String,
    pub imports: Vec<Located<String>>,
    pub commands: Vec<Command>,
}

impl Document {
    pub fn pretty(&self) -> String {
        let mut out = format!("DOCUMENT {}\n", self.name);
        for i in &self.imports {
            out.push_str(&format!("IMPORTS {}\n", i.value));
        }
        for c in &self.commands {
            out.push('\n');
            out.push_str(&c.pretty());
            out.push('\n');
        }
        out
    }

    /// The same document with every span cleared, for structural comparison.
    pub fn without_spans(&self) -> Document {
        fn gid(g: &Located<Gid>) -> Located<Gid> {
            Located { value: g.value.clone(), span: Span::default() }
        }
        fn gids(v: &[Located<Gid>]) -> Vec<Located<Gid>> {
            v.iter().map(gid).collect()
        }
        fn content(c: &Content) -> Content {
            Content {
                mls: c.mls.clone(),
                span: Span::default(),
                ref_spans: vec![Span::default(); c.ref_spans.len()],
            }
        }
        let commands = self
            .commands
            .iter()
            .map(|c| {
                let form = match &c.form {
                    CommandForm::Claim { gid: g, declaration, content: ct } => {
                        CommandForm::Claim { gid: gid(g), declaration: *declaration, content: content(ct) }
                    }
                    CommandForm::Relationship { kind, gid: g, declaration, is_counter, reasoning, source, target, content: ct } => {
                        CommandForm::Relationship {
                            kind: *kind,
                            gid: gid(g),
                            declaration: *declaration,
                            is_counter: *is_counter,
                            reasoning: reasoning.as_ref().map(gid),
                            source: gids(source),
                            target: gids(target),
                            content: content(ct),
                        }
                    }
                    CommandForm::Reasoning { gid: g, content: ct } => {
                        CommandForm::Reasoning { gid: gid(g), content: content(ct) }
                    }
                    CommandForm::ArtifactReference { gid: g, referenced, content: ct } => {
                        CommandForm::ArtifactReference { gid: gid(g), referenced: gids(referenced), content: content(ct) }
                    }
                    CommandForm::Artifact { gid: g, kind, version, date, content: ct } => CommandForm::Artifact {
                        gid: gid(g),
                        kind: *kind,
                        version: version.clone(),
                        date: Located { value: date.value.clone(), span: Span::default() },
                        content: content(ct),
                    },
                    CommandForm::ArtifactRel { gid: g, source, target, content: ct } => CommandForm::ArtifactRel {
                        gid: gid(g),
                        source: gids(source),
                        target: gids(target),
                        content: content(ct),
                    },
                    CommandForm::Expression { gid: g, lang, body } => {
                        CommandForm::Expression { gid: gid(g), lang: lang.clone(), body: body.clone() }
                    }
                    CommandForm::Obligation { gid: g, spec } => CommandForm::Obligation {
                        gid: gid(g),
                        spec: Located { value: spec.value.clone(), span: Span::default() },
                    },
                    CommandForm::Text { content: ct } => CommandForm::Text { content: content(ct) },
                };
                Command { span: Span::default(), form }
            })
            .collect();
        Document {
            name: self.name.clone(),
            imports: self.imports.iter().map(|i| Located { value: i.value.clone(), span: Span::default() }).collect(),
            commands,
        }
    }
}

/// A document name derived from a file path: the stem, with characters that
/// cannot appear in an identifier replaced by `_`.
pub fn document_name_for(file: &str) -> String {
    let stem = std::path::Path::new(file)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("document");
    let mut name: String = stem.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if !name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        name.insert(0, '_');
    }
    name
}
