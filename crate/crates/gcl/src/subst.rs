//! Substitution of expressions for variables.
//!
//! Predicates have no binders, so substitution is structural. The one
//! subtlety is `succ`: it saturates at the bound of its operand, which is
//! only known from the operand's type. When substitution turns the operand
//! of a `succ` into a literal, the successor is folded right away using the
//! bound of the original operand.

use std::collections::BTreeMap;

use crate::ast::{Expr, Lit, Pred};
use crate::compile::Compiler;
use crate::space::{Domain, StateSpace};
use crate::GclError;

/// Replacement table keyed by `(path, primed)`.
pub(crate) type Subst = BTreeMap<(String, bool), Expr>;

/// `pred[expr/path]`, replacing unprimed occurrences of `path`.
pub fn subst(space: &StateSpace, pred: &Pred, path: &str, expr: &Expr) -> Result<Pred, GclError> {
    let idx = space
        .index_of(path)
        .ok_or_else(|| GclError::Type(format!("unknown variable `{path}`")))?;
    let probe = Pred::Eq(Expr::var(path), expr.clone());
    Compiler::new(space).relational().pred(&probe)?;
    if let (Domain::Nat(target), Expr::Succ(_) | Expr::Var { .. }) = (space.domain(idx), expr) {
        if nat_bound(space, expr) != Some(*target) {
            return Err(GclError::Type(format!("`{expr}` does not have the bound of `{path}`")));
        }
    }
    let mut table = Subst::new();
    table.insert((path.to_string(), false), expr.clone());
    Ok(subst_pred(space, pred, &table))
}

/// Bound of a natural-valued expression.
pub(crate) fn nat_bound(space: &StateSpace, e: &Expr) -> Option<u32> {
    match e {
        Expr::Var { path, .. } => match space.var(path)?.domain {
            Domain::Nat(max) => Some(max),
            _ => None,
        },
        Expr::Lit(Lit::Nat(n)) => Some(*n),
        Expr::Succ(inner) => nat_bound(space, inner),
        _ => None,
    }
}

pub(crate) fn subst_expr(space: &StateSpace, e: &Expr, table: &Subst) -> Expr {
    match e {
        Expr::Var { path, primed } => table
            .get(&(path.clone(), *primed))
            .cloned()
            .unwrap_or_else(|| e.clone()),
        Expr::Lit(_) => e.clone(),
        Expr::App(m, k) => Expr::app(subst_expr(space, m, table), subst_expr(space, k, table)),
        Expr::Succ(inner) => {
            let bound = nat_bound(space, inner);
            match (subst_expr(space, inner, table), bound) {
                (Expr::Lit(Lit::Nat(n)), Some(max)) => Expr::nat((n + 1).min(max)),
                (other, _) => Expr::succ(other),
            }
        }
    }
}

pub(crate) fn subst_pred(space: &StateSpace, p: &Pred, table: &Subst) -> Pred {
    let se = |e: &Expr| subst_expr(space, e, table);
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Holds(e) => Pred::Holds(se(e)),
        Pred::Eq(a, b) => Pred::Eq(se(a), se(b)),
        Pred::Le(a, b) => Pred::Le(se(a), se(b)),
        Pred::In(e, set) => Pred::In(se(e), set.clone()),
        Pred::Not(q) => Pred::not(subst_pred(space, q, table)),
        Pred::And(ps) => Pred::And(ps.iter().map(|q| subst_pred(space, q, table)).collect()),
        Pred::Or(ps) => Pred::Or(ps.iter().map(|q| subst_pred(space, q, table)).collect()),
        Pred::Implies(a, b) => {
            Pred::implies(subst_pred(space, a, table), subst_pred(space, b, table))
        }
    }
}
