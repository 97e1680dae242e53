//! Guarded command language over finite, hierarchically named state spaces.
//!
//! Programs are built from `skip`, `abort`, sequence, guards, demonic choice,
//! assignment, namespace frames and relational specifications. The crate
//! provides
//!
//! - a weakest-precondition transformer ([`wp`]) under partial correctness
//!   with blocking guards,
//! - a relational interpreter ([`exec`]) used as an independent semantics,
//! - validity checking by exhaustive enumeration ([`valid`]) with a
//!   deterministic first counterexample,
//! - Hoare-triple and wp-implication obligations ([`Obligation`]),
//! - a textual syntax for models and obligations ([`syntax`]).

pub mod ast;
mod compile;
pub mod exec;
pub mod obligation;
pub mod simplify;
pub mod space;
pub mod subst;
pub mod syntax;
pub mod valid;
pub mod wp;

pub use ast::{Expr, Lit, Pred, Prog};
pub use compile::{typecheck_pred, typecheck_prog, typecheck_relation};
pub use exec::{eval_pred, exec, CompiledPred, CompiledProg, Outcome};
pub use obligation::{Obligation, ObligationForm, Verdict};
pub use simplify::simplify;
pub use space::{Domain, State, StateSpace, VarDecl};
pub use subst::subst;
pub use syntax::{parse_model, parse_obligation, parse_pred, parse_prog, Model};
pub use valid::{valid, Validity, DEFAULT_STATE_CAP};
pub use wp::wp;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GclError {
    #[error("invalid state space: {0}")]
    Space(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("state space has {} states, above the cap of {cap}", count.map_or_else(|| "too many".to_string(), |c| c.to_string()))]
    SpaceTooLarge { count: Option<u64>, cap: u64 },
    #[error("relational specification expands to {0} cases")]
    Expansion(u64),
}
