//! Argumentation and artifact meta-model.
//!
//! All entities share one flat namespace of global identifiers. Constructors
//! enforce the per-entity invariants; [`ArgumentModel`] enforces uniqueness.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SacmError {
    #[error("`{0}` is not a valid identifier")]
    InvalidGid(String),
    #[error("`{0}` is already defined")]
    DuplicateGid(Gid),
    #[error("{0}")]
    Invalid(String),
}

/// A global identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Gid(String);

impl Gid {
    pub fn new(s: impl Into<String>) -> Result<Gid, SacmError> {
        let s = s.into();
        if is_ident(&s) {
            Ok(Gid(s))
        } else {
            Err(SacmError::InvalidGid(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Gid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AssertionDeclaration {
    Asserted,
    Axiomatic,
    Defeated,
    Assumed,
    NeedsSupport,
}

impl AssertionDeclaration {
    pub const ALL: [AssertionDeclaration; 5] = [
        AssertionDeclaration::Asserted,
        AssertionDeclaration::Axiomatic,
        AssertionDeclaration::Defeated,
        AssertionDeclaration::Assumed,
        AssertionDeclaration::NeedsSupport,
    ];

    /// The DSL spelling.
    pub fn keyword(self) -> &'static str {
        match self {
            AssertionDeclaration::Asserted => "asserted",
            AssertionDeclaration::Axiomatic => "axiomatic",
            AssertionDeclaration::Defeated => "defeated",
            AssertionDeclaration::Assumed => "assumed",
            AssertionDeclaration::NeedsSupport => "needs_support",
        }
    }

    pub fn from_keyword(s: &str) -> Option<AssertionDeclaration> {
        Self::ALL.into_iter().find(|d| d.keyword() == s)
    }
}

/// Every kind of entity a reference can name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EntityKind {
    Claim,
    ArgumentReasoning,
    ArtifactReference,
    AssertedInference,
    AssertedContext,
    AssertedEvidence,
    AssertedArtifactSupport,
    Artifact,
    Activity,
    Participant,
    Resource,
    Technique,
    ArtifactRelationship,
    Expression,
    Obligation,
    /// A loaded formal model, named by its `model` header.
    Constant,
}

impl EntityKind {
    pub const ALL: [EntityKind; 16] = [
        EntityKind::Claim,
        EntityKind::ArgumentReasoning,
        EntityKind::ArtifactReference,
        EntityKind::AssertedInference,
        EntityKind::AssertedContext,
        EntityKind::AssertedEvidence,
        EntityKind::AssertedArtifactSupport,
        EntityKind::Artifact,
        EntityKind::Activity,
        EntityKind::Participant,
        EntityKind::Resource,
        EntityKind::Technique,
        EntityKind::ArtifactRelationship,
        EntityKind::Expression,
        EntityKind::Obligation,
        EntityKind::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Claim => "Claim",
            EntityKind::ArgumentReasoning => "ArgumentReasoning",
            EntityKind::ArtifactReference => "ArtifactReference",
            EntityKind::AssertedInference => "AssertedInference",
            EntityKind::AssertedContext => "AssertedContext",
            EntityKind::AssertedEvidence => "AssertedEvidence",
            EntityKind::AssertedArtifactSupport => "AssertedArtifactSupport",
            EntityKind::Artifact => "Artifact",
            EntityKind::Activity => "Activity",
            EntityKind::Participant => "Participant",
            EntityKind::Resource => "Resource",
            EntityKind::Technique => "Technique",
            EntityKind::ArtifactRelationship => "ArtifactRelationship",
            EntityKind::Expression => "Expression",
            EntityKind::Obligation => "Obligation",
            EntityKind::Constant => "Constant",
        }
    }

    pub fn from_name(s: &str) -> Option<EntityKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_argument_asset(self) -> bool {
        matches!(
            self,
            EntityKind::Claim
                | EntityKind::ArgumentReasoning
                | EntityKind::ArtifactReference
                | EntityKind::AssertedInference
                | EntityKind::AssertedContext
                | EntityKind::AssertedEvidence
                | EntityKind::AssertedArtifactSupport
        )
    }

    pub fn is_artifact_element(self) -> bool {
        ArtifactKind::ALL.iter().any(|a| a.entity_kind() == self)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum Fragment {
    Text { body: String, lang: String },
    Ref { kind: EntityKind, target: Gid },
    Formal { lang: String, body: String },
}

impl Fragment {
    pub fn text(body: impl Into<String>) -> Fragment {
        Fragment::Text { body: body.into(), lang: "en".into() }
    }
}

/// Content of an asset: text interleaved with typed references and formal
/// snippets. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct MultiLangString(Vec<Fragment>);

impl MultiLangString {
    pub fn new(fragments: Vec<Fragment>) -> Result<MultiLangString, SacmError> {
        if fragments.is_empty() {
            return Err(SacmError::Invalid("content has no fragments".into()));
        }
        Ok(MultiLangString(fragments))
    }

    pub fn plain(text: impl Into<String>) -> MultiLangString {
        MultiLangString(vec![Fragment::text(text)])
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.0
    }

    /// References in document order.
    pub fn collect_refs(&self) -> Vec<(EntityKind, Gid)> {
        self.0
            .iter()
            .filter_map(|f| match f {
                Fragment::Ref { kind, target } => Some((*kind, target.clone())),
                _ => None,
            })
            .collect()
    }

    /// The plain reading: text as is, references by gid, formal snippets
    /// verbatim.
    pub fn plain_text(&self) -> String {
        self.0
            .iter()
            .map(|f| match f {
                Fragment::Text { body, .. } | Fragment::Formal { body, .. } => body.as_str(),
                Fragment::Ref { target, .. } => target.as_str(),
            })
            .collect()
    }
}

impl fmt::Display for MultiLangString {
    /// Source form, with antiquotations, before string escaping.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for frag in &self.0 {
            match frag {
                Fragment::Text { body, .. } => f.write_str(body)?,
                Fragment::Ref { kind, target } => write!(f, "@{{{kind} {target}}}")?,
                Fragment::Formal { lang, body } => write!(f, "@{{formal {lang}: {body}}}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RelKind {
    Inference,
    Context,
    Evidence,
    ArtifactSupport,
}

impl RelKind {
    pub const ALL: [RelKind; 4] = [RelKind::Inference, RelKind::Context, RelKind::Evidence, RelKind::ArtifactSupport];

    pub fn entity_kind(self) -> EntityKind {
        match self {
            RelKind::Inference => EntityKind::AssertedInference,
            RelKind::Context => EntityKind::AssertedContext,
            RelKind::Evidence => EntityKind::AssertedEvidence,
            RelKind::ArtifactSupport => EntityKind::AssertedArtifactSupport,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            RelKind::Inference => "ASSERTED_INFERENCE",
            RelKind::Context => "ASSERTED_CONTEXT",
            RelKind::Evidence => "ASSERTED_EVIDENCE",
            RelKind::ArtifactSupport => "ASSERTED_ARTIFACT_SUPPORT",
        }
    }

    /// Whether a relationship of this kind can establish or defeat its
    /// target.
    pub fn bears_on_status(self) -> bool {
        matches!(self, RelKind::Inference | RelKind::Evidence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relationship {
    pub declaration: AssertionDeclaration,
    pub kind: RelKind,
    pub is_counter: bool,
    pub reasoning: Option<Gid>,
    pub source: Vec<Gid>,
    pub target: Vec<Gid>,
}

impl Relationship {
    pub fn new(
        kind: RelKind,
        declaration: AssertionDeclaration,
        is_counter: bool,
        reasoning: Option<Gid>,
        source: Vec<Gid>,
        target: Vec<Gid>,
    ) -> Result<Relationship, SacmError> {
        if source.is_empty() || target.is_empty() {
            return Err(SacmError::Invalid("a relationship needs a source and a target".into()));
        }
        if let Some(g) = source.iter().find(|g| target.contains(g)) {
            return Err(SacmError::Invalid(format!("`{g}` is both a source and a target")));
        }
        Ok(Relationship { declaration, kind, is_counter, reasoning, source, target })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AssetVariant {
    Claim { declaration: AssertionDeclaration },
    ArgumentReasoning,
    ArtifactReference { referenced: Vec<Gid> },
    Relationship(Relationship),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArgumentAsset {
    pub gid: Gid,
    pub content: MultiLangString,
    pub variant: AssetVariant,
}

impl ArgumentAsset {
    pub fn claim(gid: Gid, declaration: AssertionDeclaration, content: MultiLangString) -> ArgumentAsset {
        ArgumentAsset { gid, content, variant: AssetVariant::Claim { declaration } }
    }

    pub fn reasoning(gid: Gid, content: MultiLangString) -> ArgumentAsset {
        ArgumentAsset { gid, content, variant: AssetVariant::ArgumentReasoning }
    }

    pub fn artifact_reference(
        gid: Gid,
        referenced: Vec<Gid>,
        content: MultiLangString,
    ) -> Result<ArgumentAsset, SacmError> {
        if referenced.is_empty() {
            return Err(SacmError::Invalid("an artifact reference must reference something".into()));
        }
        Ok(ArgumentAsset { gid, content, variant: AssetVariant::ArtifactReference { referenced } })
    }

    pub fn relationship(gid: Gid, rel: Relationship, content: MultiLangString) -> ArgumentAsset {
        ArgumentAsset { gid, content, variant: AssetVariant::Relationship(rel) }
    }

    pub fn kind(&self) -> EntityKind {
        match &self.variant {
            AssetVariant::Claim { .. } => EntityKind::Claim,
            AssetVariant::ArgumentReasoning => EntityKind::ArgumentReasoning,
            AssetVariant::ArtifactReference { .. } => EntityKind::ArtifactReference,
            AssetVariant::Relationship(r) => r.kind.entity_kind(),
        }
    }

    pub fn as_relationship(&self) -> Option<&Relationship> {
        match &self.variant {
            AssetVariant::Relationship(r) => Some(r),
            _ => None,
        }
    }

    pub fn declaration(&self) -> Option<AssertionDeclaration> {
        match &self.variant {
            AssetVariant::Claim { declaration } => Some(*declaration),
            AssetVariant::Relationship(r) => Some(r.declaration),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ArtifactKind {
    Artifact,
    Activity,
    Participant,
    Resource,
    Technique,
    ArtifactRelationship,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 6] = [
        ArtifactKind::Artifact,
        ArtifactKind::Activity,
        ArtifactKind::Participant,
        ArtifactKind::Resource,
        ArtifactKind::Technique,
        ArtifactKind::ArtifactRelationship,
    ];

    pub fn entity_kind(self) -> EntityKind {
        match self {
            ArtifactKind::Artifact => EntityKind::Artifact,
            ArtifactKind::Activity => EntityKind::Activity,
            ArtifactKind::Participant => EntityKind::Participant,
            ArtifactKind::Resource => EntityKind::Resource,
            ArtifactKind::Technique => EntityKind::Technique,
            ArtifactKind::ArtifactRelationship => EntityKind::ArtifactRelationship,
        }
    }

    /// The DSL spelling after `KIND`. Relationships have their own command.
    pub fn keyword(self) -> Option<&'static str> {
        match self {
            ArtifactKind::Artifact => Some("artifact"),
            ArtifactKind::Activity => Some("activity"),
            ArtifactKind::Participant => Some("participant"),
            ArtifactKind::Resource => Some("resource"),
            ArtifactKind::Technique => Some("technique"),
            ArtifactKind::ArtifactRelationship => None,
        }
    }

    pub fn from_keyword(s: &str) -> Option<ArtifactKind> {
        Self::ALL.into_iter().find(|k| k.keyword() == Some(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArtifactElement {
    pub gid: Gid,
    pub kind: ArtifactKind,
    pub version: String,
    pub date: String,
    pub content: MultiLangString,
    pub source: Vec<Gid>,
    pub target: Vec<Gid>,
}

impl ArtifactElement {
    pub fn new(
        gid: Gid,
        kind: ArtifactKind,
        version: String,
        date: String,
        content: MultiLangString,
    ) -> Result<ArtifactElement, SacmError> {
        if kind == ArtifactKind::ArtifactRelationship {
            return Err(SacmError::Invalid("use `ArtifactElement::relationship` for relationships".into()));
        }
        if !valid_date(&date) {
            return Err(SacmError::Invalid(format!("`{date}` is not an ISO-8601 date")));
        }
        Ok(ArtifactElement { gid, kind, version, date, content, source: Vec::new(), target: Vec::new() })
    }

    pub fn relationship(
        gid: Gid,
        source: Vec<Gid>,
        target: Vec<Gid>,
        content: MultiLangString,
    ) -> Result<ArtifactElement, SacmError> {
        if source.is_empty() || target.is_empty() {
            return Err(SacmError::Invalid("an artifact relationship needs a source and a target".into()));
        }
        Ok(ArtifactElement {
            gid,
            kind: ArtifactKind::ArtifactRelationship,
            version: String::new(),
            date: String::new(),
            content,
            source,
            target,
        })
    }
}

/// Calendar dates, and date-times with an offset.
pub fn valid_date(s: &str) -> bool {
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok() || chrono::DateTime::parse_from_rfc3339(s).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expression {
    pub gid: Gid,
    pub lang: String,
    pub body: String,
}

impl Expression {
    pub fn new(gid: Gid, lang: String, body: String) -> Result<Expression, SacmError> {
        if body.is_empty() {
            return Err(SacmError::Invalid("an expression body must not be empty".into()));
        }
        Ok(Expression { gid, lang, body })
    }
}

/// A formal verification task, kept as source text until it is discharged
/// against the loaded models.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObligationEntry {
    pub gid: Gid,
    pub spec: String,
    /// The `Model:` prefix of the spec, if present.
    pub model: Option<String>,
}

impl ObligationEntry {
    pub fn new(gid: Gid, spec: String) -> ObligationEntry {
        let model = spec
            .split_once(':')
            .map(|(head, _)| head.trim())
            .filter(|h| is_ident(h))
            .map(str::to_string);
        ObligationEntry { gid, spec, model }
    }
}

/// A loaded formal model, referable by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constant {
    pub gid: Gid,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity<'a> {
    Asset(&'a ArgumentAsset),
    Artifact(&'a ArtifactElement),
    Expression(&'a Expression),
    Obligation(&'a ObligationEntry),
    Constant(&'a Constant),
}

impl Entity<'_> {
    pub fn kind(&self) -> EntityKind {
        match self {
            Entity::Asset(a) => a.kind(),
            Entity::Artifact(a) => a.kind.entity_kind(),
            Entity::Expression(_) => EntityKind::Expression,
            Entity::Obligation(_) => EntityKind::Obligation,
            Entity::Constant(_) => EntityKind::Constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotFound {
    Absent,
    KindMismatch { found: EntityKind },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArgumentModel {
    pub assets: BTreeMap<Gid, ArgumentAsset>,
    pub artifacts: BTreeMap<Gid, ArtifactElement>,
    pub expressions: BTreeMap<Gid, Expression>,
    pub obligations: BTreeMap<Gid, ObligationEntry>,
    pub constants: BTreeMap<Gid, Constant>,
}

impl ArgumentModel {
    pub fn new() -> ArgumentModel {
        ArgumentModel::default()
    }

    fn claim_gid(&self, gid: &Gid) -> Result<(), SacmError> {
        if self.get(gid).is_some() {
            Err(SacmError::DuplicateGid(gid.clone()))
        } else {
            Ok(())
        }
    }

    pub fn add_asset(&mut self, asset: ArgumentAsset) -> Result<(), SacmError> {
        self.claim_gid(&asset.gid)?;
        self.assets.insert(asset.gid.clone(), asset);
        Ok(())
    }

    pub fn add_artifact(&mut self, artifact: ArtifactElement) -> Result<(), SacmError> {
        self.claim_gid(&artifact.gid)?;
        self.artifacts.insert(artifact.gid.clone(), artifact);
        Ok(())
    }

    pub fn add_expression(&mut self, expr: Expression) -> Result<(), SacmError> {
        self.claim_gid(&expr.gid)?;
        self.expressions.insert(expr.gid.clone(), expr);
        Ok(())
    }

    pub fn add_obligation(&mut self, ob: ObligationEntry) -> Result<(), SacmError> {
        self.claim_gid(&ob.gid)?;
        self.obligations.insert(ob.gid.clone(), ob);
        Ok(())
    }

    pub fn add_constant(&mut self, c: Constant) -> Result<(), SacmError> {
        self.claim_gid(&c.gid)?;
        self.constants.insert(c.gid.clone(), c);
        Ok(())
    }

    pub fn get(&self, gid: &Gid) -> Option<Entity<'_>> {
        if let Some(a) = self.assets.get(gid) {
            Some(Entity::Asset(a))
        } else if let Some(a) = self.artifacts.get(gid) {
            Some(Entity::Artifact(a))
        } else if let Some(e) = self.expressions.get(gid) {
            Some(Entity::Expression(e))
        } else if let Some(o) = self.obligations.get(gid) {
            Some(Entity::Obligation(o))
        } else {
            self.constants.get(gid).map(Entity::Constant)
        }
    }

    pub fn kind_of(&self, gid: &Gid) -> Option<EntityKind> {
        self.get(gid).map(|e| e.kind())
    }

    pub fn resolve(&self, kind: EntityKind, gid: &Gid) -> Result<Entity<'_>, NotFound> {
        match self.get(gid) {
            None => Err(NotFound::Absent),
            Some(e) if e.kind() == kind => Ok(e),
            Some(e) => Err(NotFound::KindMismatch { found: e.kind() }),
        }
    }

    pub fn len(&self) -> usize {
        self.assets.len() + self.artifacts.len() + self.expressions.len() + self.obligations.len() + self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every gid with its kind, in gid order.
    pub fn entities(&self) -> Vec<(Gid, EntityKind)> {
        let mut all: Vec<(Gid, EntityKind)> = self
            .assets
            .values()
            .map(|a| (a.gid.clone(), a.kind()))
            .chain(self.artifacts.values().map(|a| (a.gid.clone(), a.kind.entity_kind())))
            .chain(self.expressions.keys().map(|g| (g.clone(), EntityKind::Expression)))
            .chain(self.obligations.keys().map(|g| (g.clone(), EntityKind::Obligation)))
            .chain(self.constants.keys().map(|g| (g.clone(), EntityKind::Constant)))
            .collect();
        all.sort();
        all
    }

    pub fn to_json(&self) -> Value {
        let assets: Vec<Value> = self.assets.values().map(asset_json).collect();
        let artifacts: Vec<Value> = self
            .artifacts
            .values()
            .map(|a| {
                json!({
                    "gid": a.gid,
                    "kind": a.kind.entity_kind(),
                    "version": a.version,
                    "date": a.date,
                    "content": a.content,
                    "source": a.source,
                    "target": a.target,
                })
            })
            .collect();
        let expressions: Vec<Value> = self
            .expressions
            .values()
            .map(|e| json!({"gid": e.gid, "kind": "Expression", "lang": e.lang, "body": e.body}))
            .collect();
        let obligations: Vec<Value> = self
            .obligations
            .values()
            .map(|o| json!({"gid": o.gid, "kind": "Obligation", "model": o.model, "spec": o.spec}))
            .collect();
        let constants: Vec<Value> = self
            .constants
            .values()
            .map(|c| json!({"gid": c.gid, "kind": "Constant", "description": c.description}))
            .collect();
        json!({
            "assets": assets,
            "artifacts": artifacts,
            "expressions": expressions,
            "obligations": obligations,
            "constants": constants,
        })
    }
}

fn asset_json(a: &ArgumentAsset) -> Value {
    let mut v = json!({"gid": a.gid, "kind": a.kind(), "content": a.content});
    let obj = v.as_object_mut().expect("object literal");
    match &a.variant {
        AssetVariant::Claim { declaration } => {
            obj.insert("declaration".into(), json!(declaration));
        }
        AssetVariant::ArgumentReasoning => {}
        AssetVariant::ArtifactReference { referenced } => {
            obj.insert("referenced".into(), json!(referenced));
        }
        AssetVariant::Relationship(r) => {
            obj.insert("declaration".into(), json!(r.declaration));
            obj.insert("isCounter".into(), json!(r.is_counter));
            obj.insert("reasoning".into(), json!(r.reasoning));
            obj.insert("source".into(), json!(r.source));
            obj.insert("target".into(), json!(r.target));
        }
    }
    v
}
