//! Validity by exhaustive enumeration.
//!
//! Only the variables a predicate mentions are enumerated; the others are
//! held at code 0. The first falsifying state in this order is therefore the
//! least falsifying state of the whole space in enumeration order.

use crate::ast::Pred;
use crate::compile::Compiler;
use crate::space::{State, StateSpace};
use crate::GclError;

pub const DEFAULT_STATE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Counterexample(State),
}

pub fn valid(space: &StateSpace, pred: &Pred, cap: u64) -> Result<Validity, GclError> {
    let count = space.state_count();
    if count.is_none_or(|c| c > cap) {
        return Err(GclError::SpaceTooLarge { count, cap });
    }
    let compiled = Compiler::new(space).pred(pred)?;
    let free: Vec<usize> = pred
        .vars()
        .into_iter()
        .filter_map(|(path, _)| space.index_of(&path))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let radices: Vec<u32> = free.iter().map(|&i| space.domain(i).size() as u32).collect();
    let mut state = space.first_state();
    loop {
        if !compiled.eval(&state.0, &state.0) {
            return Ok(Validity::Counterexample(state));
        }
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(Validity::Valid);
            }
            k -= 1;
            let i = free[k];
            state.0[i] += 1;
            if state.0[i] < radices[k] {
                break;
            }
            state.0[i] = 0;
        }
    }
}
