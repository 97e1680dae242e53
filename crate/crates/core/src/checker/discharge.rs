use std::collections::BTreeMap;

use gcl::{GclError, Verdict};
use serde::Serialize;

use crate::sacm::ObligationEntry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ObligationOutcome {
    Pass { model: String },
    /// `counterexample` holds `path = value` lines sorted by path.
    Fail { model: String, counterexample: String },
    Error { code: String, message: String },
}

impl ObligationOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ObligationOutcome::Pass { .. })
    }
}

/// Parse an obligation against the loaded models and check it.
pub fn discharge(entry: &ObligationEntry, models: &BTreeMap<String, gcl::Model>, cap: u64) -> ObligationOutcome {
    let (model, ob) = match gcl::parse_obligation(models, entry.gid.as_str(), &entry.spec) {
        Ok(x) => x,
        Err(e) => {
            return ObligationOutcome::Error {
                code: "E031".into(),
                message: format!("obligation `{}` does not parse: {e}", entry.gid),
            }
        }
    };
    match ob.check(cap) {
        Ok(Verdict::Pass) => ObligationOutcome::Pass { model },
        Ok(Verdict::Fail(state)) => ObligationOutcome::Fail { counterexample: state.render(&ob.space), model },
        Err(e @ (GclError::SpaceTooLarge { .. } | GclError::Expansion(_))) => ObligationOutcome::Error {
            code: "E032".into(),
            message: format!("obligation `{}` cannot be checked: {e}", entry.gid),
        },
        Err(e) => ObligationOutcome::Error {
            code: "E031".into(),
            message: format!("obligation `{}` is ill-formed: {e}", entry.gid),
        },
    }
}
