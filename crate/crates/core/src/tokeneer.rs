//! The Tokeneer ID Station case study: the user entry model, its two
//! obligations and the SFR1 argument.
//!
//! The model and argument ship as ordinary input files under
//! `corpus/tokeneer`; this module embeds them and rebuilds the model's
//! obligations from their parts so that individual operations can be
//! replaced by mutants.

use std::collections::BTreeMap;

use gcl::{Expr, Model, Obligation, ObligationForm, Pred, Prog};

use crate::argdsl::{parse_document, Document, ParseError};
use crate::checker::Source;

pub const TIS_GCL: &str = include_str!("../../../corpus/tokeneer/tis.gcl");
pub const REQUIREMENTS_ASR: &str = include_str!("../../../corpus/tokeneer/requirements.asr");
pub const ARTIFACTS_ASR: &str = include_str!("../../../corpus/tokeneer/artifacts.asr");
pub const ARGUMENT_ASR: &str = include_str!("../../../corpus/tokeneer/argument.asr");

/// The transitions of the TIS main state machine.
pub const TRANSITIONS: [&str; 9] = [
    "ReadUserToken",
    "BioCheckRequired",
    "BioCheckNotRequired",
    "ReadFingerOK",
    "ValidateFingerOK",
    "WriteUserTokenOK",
    "EntryOK",
    "UnlockDoorOK",
    "CompleteFailedAccess",
];

/// Enabled exactly when no transition is.
pub const IDLE_OP: &str = "UserEntryIdle";

/// The corpus as check inputs, named by their path from the workspace root.
pub fn corpus_sources() -> Vec<Source> {
    vec![
        Source::new("corpus/tokeneer/argument.asr", ARGUMENT_ASR),
        Source::new("corpus/tokeneer/artifacts.asr", ARTIFACTS_ASR),
        Source::new("corpus/tokeneer/requirements.asr", REQUIREMENTS_ASR),
        Source::new("corpus/tokeneer/tis.gcl", TIS_GCL),
    ]
}

pub fn corpus_documents() -> Result<Vec<Document>, Vec<ParseError>> {
    corpus_sources()
        .iter()
        .filter(|s| s.file.ends_with(".asr"))
        .map(|s| parse_document(&s.text, &s.file))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TisModel {
    pub model: Model,
    /// Unpromoted operations, each a guard over its effect.
    pub ops: BTreeMap<String, Prog>,
    pub inv: Pred,
}

fn guard_of(op: &Prog) -> Pred {
    match op {
        Prog::Guard(g, _) => g.clone(),
        _ => Pred::True,
    }
}

/// Promote an operation on the station state to the whole system.
pub fn uec(op: Prog) -> Prog {
    let rw = Pred::and(vec![
        Pred::Le(Expr::var("rw.mon.now"), Expr::primed("rw.mon.now")),
        Pred::eq(Expr::primed("rw.ctrl.latch"), Expr::var("rw.ctrl.latch")),
        Pred::eq(Expr::primed("rw.ctrl.display"), Expr::var("rw.ctrl.display")),
    ]);
    Prog::seq(Prog::frame("tis", op), Prog::frame("rw", Prog::Rel(rw)))
}

/// Physical update of the controlled variables after an operation.
pub fn tis_update() -> Prog {
    Prog::seq_all(vec![
        Prog::frame("rw", Prog::Rel(Pred::Le(Expr::var("rw.mon.now"), Expr::primed("rw.mon.now")))),
        Prog::assign("rw.ctrl.latch", Expr::var("tis.currentLatch")),
        Prog::assign("rw.ctrl.display", Expr::var("tis.currentDisplay")),
    ])
}

pub fn build_tis_model() -> TisModel {
    let model = gcl::parse_model(TIS_GCL).expect("shipped model parses");
    let ops = TRANSITIONS
        .iter()
        .chain([&IDLE_OP])
        .map(|n| (n.to_string(), model.prog(n).expect("shipped operation").clone()))
        .collect();
    let inv = model.pred("TIS_inv").expect("shipped invariant").clone();
    TisModel { model, ops, inv }
}

impl TisModel {
    /// Replace one transition. The idle operation's guard is rebuilt from
    /// the transitions so it stays their complement.
    pub fn with_op(&self, name: &str, op: Prog) -> TisModel {
        let mut next = self.clone();
        next.ops.insert(name.to_string(), op);
        let idle_guard = Pred::not(Pred::or(TRANSITIONS.iter().map(|n| guard_of(&next.ops[*n])).collect()));
        let idle_body = match &self.ops[IDLE_OP] {
            Prog::Guard(_, body) => (**body).clone(),
            other => other.clone(),
        };
        next.ops.insert(IDLE_OP.to_string(), Prog::guard(idle_guard, idle_body));
        next
    }

    pub fn with_inv(&self, inv: Pred) -> TisModel {
        TisModel { inv, ..self.clone() }
    }

    pub fn space(&self) -> &gcl::StateSpace {
        &self.model.space
    }

    pub fn guard(&self, name: &str) -> Option<Pred> {
        self.ops.get(name).map(guard_of)
    }

    /// Demonic choice over every promoted operation.
    pub fn user_entry_op(&self) -> Prog {
        Prog::choice_all(TRANSITIONS.iter().chain([&IDLE_OP]).map(|n| uec(self.ops[*n].clone())).collect())
    }

    pub fn invariant_obligation(&self) -> Obligation {
        Obligation {
            name: "TIS_INV".into(),
            space: self.model.space.clone(),
            form: ObligationForm::Hoare { pre: self.inv.clone(), prog: self.user_entry_op(), post: self.inv.clone() },
        }
    }

    pub fn fsfr1_obligation(&self) -> Obligation {
        self.fsfr1_obligation_with(self.fsfr1_conclusion())
    }

    pub fn fsfr1_conclusion(&self) -> Pred {
        Pred::or(vec![
            Pred::and(vec![Pred::holds("tis.userTokenOK"), Pred::holds("tis.fingerOK")]),
            Pred::holds("tis.userTokenWithOKAuthCert"),
        ])
    }

    /// The FSFR1 obligation with another conclusion.
    pub fn fsfr1_obligation_with(&self, conclusion: Pred) -> Obligation {
        Obligation {
            name: "TIS_FSFR1".into(),
            space: self.model.space.clone(),
            form: ObligationForm::WpImplies {
                context: Pred::and(vec![self.inv.clone(), Pred::is("tis.currentLatch", "locked")]),
                prog: Prog::seq(self.user_entry_op(), tis_update()),
                post: Pred::is("rw.ctrl.latch", "unlocked"),
                conclusion,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gcl::{Lit, Verdict, DEFAULT_STATE_CAP};

    #[test]
    fn space_is_desk_scale() {
        let m = build_tis_model();
        assert_eq!(m.space().state_count(), Some(204_800));
        assert_eq!(m.space().len(), 12);
    }

    #[test]
    fn operations_follow_the_definitions() {
        let m = build_tis_model();
        let unlock = m.ops["UnlockDoorOK"].to_string();
        assert!(unlock.contains("tis.userTokenPresence = absent"), "{unlock}");
        let bio = m.ops["BioCheckRequired"].to_string();
        assert!(bio.contains("tis.status := waitingFinger") && bio.contains("tis.currentDisplay := insertFinger"));
        let read = m.ops["ReadFingerOK"].to_string();
        assert!(read.contains("tis.status := gotFinger") && read.contains("tis.currentDisplay := wait"));
        for op in m.ops.values() {
            assert!(matches!(op, Prog::Guard(..)), "{op}");
        }
    }

    #[test]
    fn obligations_hold() {
        let m = build_tis_model();
        assert_eq!(m.invariant_obligation().check(DEFAULT_STATE_CAP).unwrap(), Verdict::Pass);
        assert_eq!(m.fsfr1_obligation().check(DEFAULT_STATE_CAP).unwrap(), Verdict::Pass);
    }

    #[test]
    fn false_conclusion_fails_on_the_way_out() {
        let m = build_tis_model();
        let Verdict::Fail(s) = m.fsfr1_obligation_with(Pred::False).check(DEFAULT_STATE_CAP).unwrap() else { panic!() };
        assert_eq!(s.value(m.space(), "tis.status"), Some(Lit::Label("waitingRemoveTokenSuccess".into())));
    }

    #[test]
    fn derived_idle_guard_matches_the_shipped_one() {
        let m = build_tis_model();
        let shipped = m.guard(IDLE_OP).unwrap();
        let derived = m.with_op("EntryOK", m.ops["EntryOK"].clone()).guard(IDLE_OP).unwrap();
        let iff = Pred::and(vec![Pred::implies(shipped.clone(), derived.clone()), Pred::implies(derived, shipped)]);
        assert_eq!(gcl::valid(m.space(), &iff, DEFAULT_STATE_CAP).unwrap(), gcl::Validity::Valid);
    }

    #[test]
    fn corpus_parses() {
        let docs = corpus_documents().unwrap();
        assert_eq!(docs.len(), 3);
        let claims: usize = docs
            .iter()
            .flat_map(|d| &d.commands)
            .filter(|c| matches!(&c.form, crate::argdsl::CommandForm::Claim { gid, .. } if gid.value.as_str().starts_with("TIS_SFR1_C")))
            .count();
        assert_eq!(claims, 5);
    }
}
