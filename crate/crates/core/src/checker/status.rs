use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sacm::{ArgumentAsset, ArgumentModel, AssertionDeclaration, AssetVariant, Entity, Gid};

use super::ObligationOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EffectiveStatus {
    Supported,
    Axiomatic,
    Assumed,
    NeedsSupport,
    Defeated,
}

impl EffectiveStatus {
    /// Whether a claim with this status can support others.
    pub fn holds(self) -> bool {
        matches!(self, EffectiveStatus::Supported | EffectiveStatus::Axiomatic | EffectiveStatus::Assumed)
    }
}

impl fmt::Display for EffectiveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatusError {
    #[error("`{0}` is not a claim in the model")]
    Unresolved(Gid),
}

struct Engine<'a> {
    model: &'a ArgumentModel,
    passed: BTreeSet<&'a Gid>,
    incoming: BTreeMap<&'a Gid, Vec<&'a ArgumentAsset>>,
    memo: BTreeMap<&'a Gid, EffectiveStatus>,
    stack: BTreeSet<&'a Gid>,
}

impl<'a> Engine<'a> {
    fn new(model: &'a ArgumentModel, verdicts: &'a BTreeMap<Gid, ObligationOutcome>) -> Engine<'a> {
        let mut incoming: BTreeMap<&Gid, Vec<&ArgumentAsset>> = BTreeMap::new();
        for a in model.assets.values() {
            if let Some(r) = a.as_relationship() {
                if r.kind.bears_on_status() && r.declaration != AssertionDeclaration::Defeated {
                    for t in &r.target {
                        incoming.entry(t).or_default().push(a);
                    }
                }
            }
        }
        let passed = verdicts.iter().filter(|(_, v)| v.passed()).map(|(g, _)| g).collect();
        Engine { model, passed, incoming, memo: BTreeMap::new(), stack: BTreeSet::new() }
    }

    /// Whether `gid` holds as a source, and whether the answer is free of
    /// cycle cut-offs.
    fn holds(&mut self, gid: &'a Gid) -> (bool, bool) {
        if self.stack.contains(gid) {
            return (false, false);
        }
        match self.model.get(gid) {
            Some(Entity::Asset(a)) => match &a.variant {
                AssetVariant::Claim { .. } => {
                    let (s, clean) = self.status(a);
                    (s.holds(), clean)
                }
                AssetVariant::ArtifactReference { referenced } => {
                    let ok = referenced.iter().all(|r| match self.model.get(r) {
                        Some(Entity::Obligation(_)) => self.passed.contains(r),
                        Some(e) => e.kind().is_artifact_element(),
                        None => false,
                    });
                    (ok, true)
                }
                AssetVariant::Relationship(r) => {
                    self.stack.insert(gid);
                    let res = self.all_hold(&r.source);
                    self.stack.remove(gid);
                    res
                }
                AssetVariant::ArgumentReasoning => (false, true),
            },
            _ => (false, true),
        }
    }

    fn all_hold(&mut self, gids: &'a [Gid]) -> (bool, bool) {
        let mut clean = true;
        for g in gids {
            let (h, c) = self.holds(g);
            clean &= c;
            if !h {
                return (false, clean);
            }
        }
        (true, clean)
    }

    fn status(&mut self, claim: &'a ArgumentAsset) -> (EffectiveStatus, bool) {
        let gid = &claim.gid;
        if let Some(s) = self.memo.get(gid) {
            return (*s, true);
        }
        match claim.declaration() {
            Some(AssertionDeclaration::Defeated) => return (EffectiveStatus::Defeated, true),
            Some(AssertionDeclaration::Axiomatic) => return (EffectiveStatus::Axiomatic, true),
            Some(AssertionDeclaration::Assumed) => return (EffectiveStatus::Assumed, true),
            _ => {}
        }
        self.stack.insert(gid);
        let rels = self.incoming.get(gid).cloned().unwrap_or_default();
        let mut clean = true;
        let mut defeated = false;
        let mut supported = false;
        for rel in rels {
            let r = rel.as_relationship().expect("indexed relationships");
            if (r.is_counter && defeated) || (!r.is_counter && supported) {
                continue;
            }
            self.stack.insert(&rel.gid);
            let (h, c) = self.all_hold(&r.source);
            self.stack.remove(&rel.gid);
            clean &= c;
            if h {
                if r.is_counter {
                    defeated = true;
                } else {
                    supported = true;
                }
            }
        }
        self.stack.remove(gid);
        let s = if defeated {
            EffectiveStatus::Defeated
        } else if supported {
            EffectiveStatus::Supported
        } else {
            EffectiveStatus::NeedsSupport
        };
        if clean {
            self.memo.insert(gid, s);
        }
        (s, clean)
    }
}

/// Status of one claim. Obligations count as discharged when their outcome
/// in `verdicts` is a pass.
pub fn compute_status(
    model: &ArgumentModel,
    verdicts: &BTreeMap<Gid, ObligationOutcome>,
    claim: &Gid,
) -> Result<EffectiveStatus, StatusError> {
    match model.assets.get(claim) {
        Some(a @ ArgumentAsset { variant: AssetVariant::Claim { .. }, .. }) => Ok(Engine::new(model, verdicts).status(a).0),
        _ => Err(StatusError::Unresolved(claim.clone())),
    }
}

/// Status of every claim, in gid order.
pub fn compute_statuses(
    model: &ArgumentModel,
    verdicts: &BTreeMap<Gid, ObligationOutcome>,
) -> BTreeMap<Gid, EffectiveStatus> {
    let mut e = Engine::new(model, verdicts);
    model
        .assets
        .values()
        .filter(|a| matches!(a.variant, AssetVariant::Claim { .. }))
        .map(|a| {
            e.stack.clear();
            (a.gid.clone(), e.status(a).0)
        })
        .collect()
}
