//! Named verification obligations.

use crate::ast::{Pred, Prog};
use crate::compile::Compiler;
use crate::space::{State, StateSpace};
use crate::valid::{valid, Validity};
use crate::wp::wp;
use crate::GclError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObligationForm {
    /// `{pre} prog {post}`, checked as validity of `pre => wp(prog, post)`.
    Hoare { pre: Pred, prog: Prog, post: Pred },
    /// Validity of `(context /\ wp(prog, post)) => conclusion`.
    WpImplies { context: Pred, prog: Prog, post: Pred, conclusion: Pred },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub name: String,
    pub space: StateSpace,
    pub form: ObligationForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(State),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl Obligation {
    pub fn typecheck(&self) -> Result<(), GclError> {
        let c = Compiler::new(&self.space);
        match &self.form {
            ObligationForm::Hoare { pre, prog, post } => {
                c.pred(pre)?;
                c.pred(post)?;
                Compiler::new(&self.space).prog(prog)?;
            }
            ObligationForm::WpImplies { context, prog, post, conclusion } => {
                c.pred(context)?;
                c.pred(post)?;
                c.pred(conclusion)?;
                Compiler::new(&self.space).prog(prog)?;
            }
        }
        Ok(())
    }

    /// The predicate whose validity discharges the obligation.
    pub fn goal(&self) -> Result<Pred, GclError> {
        self.typecheck()?;
        Ok(match &self.form {
            ObligationForm::Hoare { pre, prog, post } => {
                Pred::implies(pre.clone(), wp(&self.space, prog, post)?)
            }
            ObligationForm::WpImplies { context, prog, post, conclusion } => Pred::implies(
                Pred::and(vec![context.clone(), wp(&self.space, prog, post)?]),
                conclusion.clone(),
            ),
        })
    }

    pub fn check(&self, cap: u64) -> Result<Verdict, GclError> {
        let goal = self.goal()?;
        Ok(match valid(&self.space, &goal, cap)? {
            Validity::Valid => Verdict::Pass,
            Validity::Counterexample(s) => Verdict::Fail(s),
        })
    }
}
