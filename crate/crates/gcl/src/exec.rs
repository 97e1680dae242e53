//! Relational execution and predicate evaluation.
//!
//! `exec` maps a state to the set of its successors, or to `Aborts`. Guards
//! block (a disabled guard has no successors), choice is the union of both
//! branches and `abort` absorbs everything it is combined with.

use std::collections::BTreeSet;

use crate::ast::{Pred, Prog};
use crate::compile::{CPred, CProg, Compiler};
use crate::space::{State, StateSpace};
use crate::GclError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Aborts,
    States(BTreeSet<State>),
}

impl Outcome {
    pub fn states(&self) -> Option<&BTreeSet<State>> {
        match self {
            Outcome::Aborts => None,
            Outcome::States(s) => Some(s),
        }
    }
}

/// A type-checked predicate ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPred {
    pred: CPred,
}

impl CompiledPred {
    pub fn new(space: &StateSpace, pred: &Pred) -> Result<Self, GclError> {
        Ok(CompiledPred { pred: Compiler::new(space).pred(pred)? })
    }

    pub fn eval(&self, state: &State) -> bool {
        self.pred.eval(&state.0, &state.0)
    }
}

/// A type-checked program ready for repeated execution.
#[derive(Debug, Clone)]
pub struct CompiledProg {
    prog: CProg,
    radices: Vec<u32>,
}

impl CompiledProg {
    pub fn new(space: &StateSpace, prog: &Prog) -> Result<Self, GclError> {
        let radices = space.vars().iter().map(|v| v.domain.size() as u32).collect();
        Ok(CompiledProg { prog: Compiler::new(space).prog(prog)?, radices })
    }

    pub fn exec(&self, state: &State) -> Outcome {
        let mut out = BTreeSet::new();
        if self.run(&self.prog, state, &mut out) {
            Outcome::States(out)
        } else {
            Outcome::Aborts
        }
    }

    /// Adds the successors of `s` to `out`; false when `s` may abort.
    fn run(&self, p: &CProg, s: &State, out: &mut BTreeSet<State>) -> bool {
        match p {
            CProg::Skip => {
                out.insert(s.clone());
                true
            }
            CProg::Abort => false,
            CProg::Seq(a, b) => {
                let mut mid = BTreeSet::new();
                if !self.run(a, s, &mut mid) {
                    return false;
                }
                mid.iter().all(|m| self.run(b, m, out))
            }
            CProg::Guard(g, body) => !g.eval(&s.0, &s.0) || self.run(body, s, out),
            CProg::Choice(a, b) => self.run(a, s, out) && self.run(b, s, out),
            CProg::Assign(idx, e) => {
                let mut next = s.clone();
                next.0[*idx] = e.eval(&s.0, &s.0);
                out.insert(next);
                true
            }
            CProg::Rel(r, scope) => {
                let mut next = s.clone();
                for &i in scope {
                    next.0[i] = 0;
                }
                loop {
                    if r.eval(&s.0, &next.0) {
                        out.insert(next.clone());
                    }
                    let mut k = scope.len();
                    loop {
                        if k == 0 {
                            return true;
                        }
                        k -= 1;
                        let i = scope[k];
                        next.0[i] += 1;
                        if next.0[i] < self.radices[i] {
                            break;
                        }
                        next.0[i] = 0;
                    }
                }
            }
        }
    }
}

pub fn exec(space: &StateSpace, prog: &Prog, state: &State) -> Result<Outcome, GclError> {
    Ok(CompiledProg::new(space, prog)?.exec(state))
}

pub fn eval_pred(space: &StateSpace, pred: &Pred, state: &State) -> Result<bool, GclError> {
    Ok(CompiledPred::new(space, pred)?.eval(state))
}
