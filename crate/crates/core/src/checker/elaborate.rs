use std::collections::{BTreeMap, BTreeSet, VecDeque};

use gcl::GclError;

use crate::argdsl::{self, Command, CommandForm, Content, Document, Located, Span};
use crate::sacm::{
    ArgumentAsset, ArgumentModel, ArtifactElement, Constant, Expression, Gid, ObligationEntry, Relationship, SacmError,
};

use super::{text_node, Diagnostic, Source};

#[derive(Debug, Clone)]
pub enum ParsedBody {
    Document(Document),
    /// A formal model file; `None` when it failed to parse.
    Model { model: Option<Box<gcl::Model>>, header: Span },
}

#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub file: String,
    pub body: ParsedBody,
    /// Syntax errors, as E000 diagnostics.
    pub errors: Vec<Diagnostic>,
}

/// `.gcl` files are formal models; everything else is read as `.asr`.
pub fn parse_source(src: &Source) -> ParsedFile {
    if src.file.ends_with(".gcl") {
        let header = model_header(&src.file, &src.text);
        match gcl::parse_model(&src.text) {
            Ok(m) => ParsedFile {
                file: src.file.clone(),
                body: ParsedBody::Model { model: Some(Box::new(m)), header },
                errors: Vec::new(),
            },
            Err(e) => {
                let (span, message) = match e {
                    GclError::Parse { line, col, message } => {
                        (Span::new(&src.file, (line, col), (line, col + 1)), message)
                    }
                    other => (Span::new(&src.file, (1, 1), (1, 1)), other.to_string()),
                };
                ParsedFile {
                    file: src.file.clone(),
                    body: ParsedBody::Model { model: None, header },
                    errors: vec![Diagnostic::error("E000", span, message)],
                }
            }
        }
    } else {
        let (doc, errs) = argdsl::parse_document_partial(&src.text, &src.file);
        ParsedFile {
            file: src.file.clone(),
            body: ParsedBody::Document(doc),
            errors: errs.into_iter().map(|e| Diagnostic::error("E000", e.span, e.message)).collect(),
        }
    }
}

/// Span of the `model <name>` line, or the file start.
fn model_header(file: &str, text: &str) -> Span {
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("model") && trimmed[5..].starts_with(char::is_whitespace) {
            let col = line.chars().count() - trimmed.chars().count() + 1;
            let len = trimmed.split('#').next().unwrap_or("").trim_end().chars().count();
            return Span::new(file, (i + 1, col), (i + 1, col + len));
        }
    }
    Span::new(file, (1, 1), (1, 1))
}

/// Where an entity or TEXT block was defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Command { file: String, doc: String, command: Command },
    Model { file: String, header: Span },
}

impl Origin {
    pub fn file(&self) -> &str {
        match self {
            Origin::Command { file, .. } | Origin::Model { file, .. } => file,
        }
    }

    pub fn command(&self) -> Option<&Command> {
        match self {
            Origin::Command { command, .. } => Some(command),
            Origin::Model { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextBlock {
    pub id: String,
    pub doc: String,
    pub content: Content,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocInfo {
    pub file: String,
    pub imports: Vec<Located<String>>,
}

/// The elaborated model together with provenance.
#[derive(Debug, Clone)]
pub struct Elaboration {
    pub model: ArgumentModel,
    pub models: BTreeMap<String, gcl::Model>,
    pub origins: BTreeMap<Gid, Origin>,
    /// TEXT commands keyed by node id.
    pub texts: BTreeMap<String, Origin>,
    pub documents: BTreeMap<String, DocInfo>,
    /// E001 to E005.
    pub diagnostics: Vec<Diagnostic>,
}

impl Elaboration {
    pub fn node_origin(&self, node: &str) -> Option<&Origin> {
        if node.starts_with("text:") {
            self.texts.get(node)
        } else {
            self.origins.get(&Gid::new(node).ok()?)
        }
    }

    pub fn content_of(&self, node: &str) -> Option<&Content> {
        self.node_origin(node)?.command()?.content()
    }

    /// Every entity gid and TEXT node.
    pub fn checkable_nodes(&self) -> Vec<String> {
        self.origins.keys().map(|g| g.to_string()).chain(self.texts.keys().cloned()).collect()
    }
}

/// Documents in import order, ties and cycles broken by name.
fn import_order(docs: &BTreeMap<String, (&ParsedFile, &Document)>) -> Vec<String> {
    let mut indegree: BTreeMap<&str, usize> = docs.keys().map(|k| (k.as_str(), 0)).collect();
    for (name, (_, d)) in docs {
        for i in &d.imports {
            if docs.contains_key(&i.value) {
                *indegree.get_mut(name.as_str()).expect("known") += 1;
            }
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, n)| **n == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::new();
    while let Some(next) = ready.pop_first() {
        order.push(next.to_string());
        for (name, (_, d)) in docs {
            for i in &d.imports {
                if i.value == next {
                    let n = indegree.get_mut(name.as_str()).expect("known");
                    *n -= 1;
                    if *n == 0 {
                        ready.insert(name);
                    }
                }
            }
        }
    }
    for name in docs.keys() {
        if !order.contains(name) {
            order.push(name.clone());
        }
    }
    order
}

/// Shortest import path from `from` to `to`, both included.
fn import_path(docs: &BTreeMap<String, (&ParsedFile, &Document)>, from: &str, to: &str) -> Option<Vec<String>> {
    let mut prev: BTreeMap<String, String> = BTreeMap::new();
    let mut queue = VecDeque::from([from.to_string()]);
    let mut seen = BTreeSet::from([from.to_string()]);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut path = vec![cur.clone()];
            let mut at = cur;
            while let Some(p) = prev.get(&at) {
                path.push(p.clone());
                at = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        if let Some((_, d)) = docs.get(&cur) {
            for i in &d.imports {
                if docs.contains_key(&i.value) && seen.insert(i.value.clone()) {
                    prev.insert(i.value.clone(), cur.clone());
                    queue.push_back(i.value.clone());
                }
            }
        }
    }
    None
}

struct Builder {
    model: ArgumentModel,
    origins: BTreeMap<Gid, Origin>,
    diagnostics: Vec<Diagnostic>,
}

impl Builder {
    fn register(&mut self, gid: &Gid, span: &Span, origin: Origin, add: impl FnOnce(&mut ArgumentModel) -> Result<(), SacmError>) {
        match add(&mut self.model) {
            Ok(()) => {
                self.origins.insert(gid.clone(), origin);
            }
            Err(SacmError::DuplicateGid(_)) => {
                let first = self
                    .origins
                    .get(gid)
                    .map(|o| match o {
                        Origin::Command { command, .. } => {
                            command.gid().map_or_else(|| command.span.to_string(), |g| g.span.to_string())
                        }
                        Origin::Model { header, .. } => header.to_string(),
                    })
                    .unwrap_or_default();
                self.diagnostics.push(
                    Diagnostic::error("E001", span.clone(), format!("duplicate gid `{gid}`; first defined at {first}"))
                        .about(gid),
                );
            }
            Err(e) => self.diagnostics.push(Diagnostic::error("E005", span.clone(), e.to_string()).about(gid)),
        }
    }

    fn command(&mut self, file: &str, doc: &str, command: &Command) {
        let Some(gid) = command.gid() else { return };
        let origin = Origin::Command { file: file.to_string(), doc: doc.to_string(), command: command.clone() };
        let g = gid.value.clone();
        let values = |v: &[Located<Gid>]| v.iter().map(|l| l.value.clone()).collect::<Vec<_>>();
        let invalid = |span: &Span, e: SacmError| Diagnostic::error("E005", span.clone(), e.to_string()).about(&gid.value);
        match &command.form {
            CommandForm::Claim { declaration, content, .. } => {
                let a = ArgumentAsset::claim(g, *declaration, content.mls.clone());
                self.register(&gid.value, &gid.span, origin, |m| m.add_asset(a));
            }
            CommandForm::Relationship { kind, declaration, is_counter, reasoning, source, target, content, .. } => {
                match Relationship::new(
                    *kind,
                    *declaration,
                    *is_counter,
                    reasoning.as_ref().map(|r| r.value.clone()),
                    values(source),
                    values(target),
                ) {
                    Ok(r) => {
                        let a = ArgumentAsset::relationship(g, r, content.mls.clone());
                        self.register(&gid.value, &gid.span, origin, |m| m.add_asset(a));
                    }
                    Err(e) => self.diagnostics.push(invalid(&gid.span, e)),
                }
            }
            CommandForm::Reasoning { content, .. } => {
                let a = ArgumentAsset::reasoning(g, content.mls.clone());
                self.register(&gid.value, &gid.span, origin, |m| m.add_asset(a));
            }
            CommandForm::ArtifactReference { referenced, content, .. } => {
                match ArgumentAsset::artifact_reference(g, values(referenced), content.mls.clone()) {
                    Ok(a) => self.register(&gid.value, &gid.span, origin, |m| m.add_asset(a)),
                    Err(e) => self.diagnostics.push(invalid(&gid.span, e)),
                }
            }
            CommandForm::Artifact { kind, version, date, content, .. } => {
                match ArtifactElement::new(g, *kind, version.clone(), date.value.clone(), content.mls.clone()) {
                    Ok(a) => self.register(&gid.value, &gid.span, origin, |m| m.add_artifact(a)),
                    Err(e) => self.diagnostics.push(invalid(&date.span, e)),
                }
            }
            CommandForm::ArtifactRel { source, target, content, .. } => {
                match ArtifactElement::relationship(g, values(source), values(target), content.mls.clone()) {
                    Ok(a) => self.register(&gid.value, &gid.span, origin, |m| m.add_artifact(a)),
                    Err(e) => self.diagnostics.push(invalid(&gid.span, e)),
                }
            }
            CommandForm::Expression { lang, body, .. } => match Expression::new(g, lang.clone(), body.clone()) {
                Ok(e) => self.register(&gid.value, &gid.span, origin, |m| m.add_expression(e)),
                Err(e) => self.diagnostics.push(invalid(&gid.span, e)),
            },
            CommandForm::Obligation { spec, .. } => {
                let o = ObligationEntry::new(g, spec.value.clone());
                self.register(&gid.value, &gid.span, origin, |m| m.add_obligation(o));
            }
            CommandForm::Text { .. } => {}
        }
    }
}

/// Converts parsed files into one model. Models are registered first, then
/// documents in import order; within a document, commands in source order.
/// The first definition of a gid wins.
pub fn elaborate(files: &[&ParsedFile]) -> Elaboration {
    let mut b = Builder { model: ArgumentModel::new(), origins: BTreeMap::new(), diagnostics: Vec::new() };
    let mut models = BTreeMap::new();
    let mut sorted: Vec<&ParsedFile> = files.to_vec();
    sorted.sort_by(|a, b| a.file.cmp(&b.file));

    for f in &sorted {
        let ParsedBody::Model { model: Some(m), header } = &f.body else { continue };
        match Gid::new(m.name.clone()) {
            Ok(gid) => {
                let c = Constant { gid: gid.clone(), description: format!("formal model `{}`", m.name) };
                let before = b.model.constants.len();
                b.register(&gid, header, Origin::Model { file: f.file.clone(), header: header.clone() }, |am| {
                    am.add_constant(c)
                });
                if b.model.constants.len() > before {
                    models.insert(m.name.clone(), (**m).clone());
                }
            }
            Err(e) => b.diagnostics.push(Diagnostic::error("E005", header.clone(), e.to_string())),
        }
    }

    let mut docs: BTreeMap<String, (&ParsedFile, &Document)> = BTreeMap::new();
    for f in &sorted {
        let ParsedBody::Document(d) = &f.body else { continue };
        if let Some((first, _)) = docs.get(&d.name) {
            b.diagnostics.push(Diagnostic::error(
                "E004",
                Span::new(&f.file, (1, 1), (1, 1)),
                format!("document `{}` is already defined in {}", d.name, first.file),
            ));
        } else {
            docs.insert(d.name.clone(), (f, d));
        }
    }

    for (name, (_, d)) in &docs {
        for i in &d.imports {
            if !docs.contains_key(&i.value) {
                b.diagnostics.push(Diagnostic::error("E003", i.span.clone(), format!("unknown document `{}`", i.value)));
            } else if let Some(path) = import_path(&docs, &i.value, name) {
                let mut cycle = vec![name.clone()];
                cycle.extend(path);
                b.diagnostics.push(Diagnostic::error(
                    "E002",
                    i.span.clone(),
                    format!("import cycle: {}", cycle.join(" -> ")),
                ));
            }
        }
    }

    let mut texts = BTreeMap::new();
    for name in import_order(&docs) {
        let (f, d) = docs[&name];
        let mut n = 0;
        for c in &d.commands {
            if let CommandForm::Text { .. } = c.form {
                n += 1;
                texts.insert(
                    text_node(&name, n),
                    Origin::Command { file: f.file.clone(), doc: name.clone(), command: c.clone() },
                );
            } else {
                b.command(&f.file, &name, c);
            }
        }
    }

    let documents = docs
        .iter()
        .map(|(name, (f, d))| (name.clone(), DocInfo { file: f.file.clone(), imports: d.imports.clone() }))
        .collect();
    Elaboration { model: b.model, models, origins: b.origins, texts, documents, diagnostics: b.diagnostics }
}
