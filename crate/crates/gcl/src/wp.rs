//! Weakest preconditions under partial correctness with blocking guards.
//!
//! ```text
//! wp(skip, Q)        = Q
//! wp(abort, Q)       = false
//! wp(S ; T, Q)       = wp(S, wp(T, Q))
//! wp(g -> S, Q)      = g => wp(S, Q)
//! wp(S |~| T, Q)     = wp(S, Q) /\ wp(T, Q)
//! wp(x := e, Q)      = Q[e/x]
//! wp(frame a in S, Q) = wp(S, Q), with S confined to `a`
//! wp(rel[R], Q)      = forall v'. R => Q[v'/v]
//! ```
//!
//! The quantifier of a relational specification ranges over the primed
//! variables of the current frame. It is expanded over their finite domains,
//! after eliminating every primed variable fixed by an equation `v' = e`
//! (one-point rule). Only the variables that `Q` mentions are expanded
//! universally; the remaining primed variables of `R` are expanded
//! existentially on the left of the implication.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Expr, Pred, Prog};
use crate::compile::Compiler;
use crate::simplify::simplify_in;
use crate::space::{in_namespace, Domain, StateSpace};
use crate::subst::{subst_pred, Subst};
use crate::GclError;

/// Largest number of cases a single relational specification may expand to.
pub const EXPANSION_CAP: u64 = 1 << 16;

/// Weakest precondition of `prog` for the unprimed postcondition `post`,
/// simplified.
pub fn wp(space: &StateSpace, prog: &Prog, post: &Pred) -> Result<Pred, GclError> {
    Compiler::new(space).pred(post)?;
    Compiler::new(space).prog(prog)?;
    let scope: Vec<bool> = vec![true; space.len()];
    Wp { space }.prog(prog, post.clone(), &scope)
}

struct Wp<'a> {
    space: &'a StateSpace,
}

impl Wp<'_> {
    fn prog(&self, p: &Prog, q: Pred, scope: &[bool]) -> Result<Pred, GclError> {
        Ok(match p {
            Prog::Skip => q,
            Prog::Abort => Pred::False,
            Prog::Seq(a, b) => {
                let mid = self.prog(b, q, scope)?;
                self.prog(a, mid, scope)?
            }
            Prog::Guard(g, body) => {
                let inner = self.prog(body, q, scope)?;
                simplify_in(self.space, &Pred::implies(g.clone(), inner))
            }
            Prog::Choice(a, b) => {
                let left = self.prog(a, q.clone(), scope)?;
                let right = self.prog(b, q, scope)?;
                simplify_in(self.space, &Pred::and(vec![left, right]))
            }
            Prog::Assign(x, e) => {
                let mut table = Subst::new();
                table.insert((x.clone(), false), e.clone());
                simplify_in(self.space, &subst_pred(self.space, &q, &table))
            }
            Prog::Frame(ns, body) => {
                let inner: Vec<bool> = self
                    .space
                    .vars()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| scope[i] && in_namespace(&v.path, ns))
                    .collect();
                self.prog(body, q, &inner)?
            }
            Prog::Rel(r) => self.rel(r, &q, scope)?,
        })
    }

    fn rel(&self, r: &Pred, q: &Pred, scope: &[bool]) -> Result<Pred, GclError> {
        let space = self.space;
        let in_scope = |path: &str| space.index_of(path).is_some_and(|i| scope[i]);

        // one-point rule on top-level equations `v' = e`
        let mut conjuncts = flatten_and(r);
        let mut fixed: BTreeMap<String, Expr> = BTreeMap::new();
        loop {
            let found = conjuncts.iter().enumerate().find_map(|(i, c)| {
                let Pred::Eq(a, b) = c else { return None };
                [(a, b), (b, a)].into_iter().find_map(|(lhs, rhs)| match lhs {
                    Expr::Var { path, primed: true }
                        if in_scope(path)
                            && !fixed.contains_key(path)
                            && !mentions_primed(rhs, path)
                            && same_domain(space, path, rhs) =>
                    {
                        Some((i, path.clone(), rhs.clone()))
                    }
                    _ => None,
                })
            });
            let Some((i, path, value)) = found else { break };
            conjuncts.remove(i);
            let mut table = Subst::new();
            table.insert((path.clone(), true), value.clone());
            conjuncts = conjuncts.iter().map(|c| subst_pred(space, c, &table)).collect();
            for v in fixed.values_mut() {
                *v = crate::subst::subst_expr(space, v, &table);
            }
            fixed.insert(path, value);
        }

        // the postcondition speaks about the after-state
        let post_table: Subst = q
            .vars()
            .into_iter()
            .filter(|(path, _)| in_scope(path))
            .map(|(path, _)| {
                let after = fixed.get(&path).cloned().unwrap_or_else(|| Expr::primed(path.clone()));
                ((path, false), after)
            })
            .collect();
        let q_after = subst_pred(space, q, &post_table);

        let rest = Pred::And(conjuncts);
        let free_after = |p: &Pred| -> BTreeSet<String> {
            p.vars().into_iter().filter(|(_, primed)| *primed).map(|(p, _)| p).collect()
        };
        let universal: Vec<String> = free_after(&q_after).into_iter().collect();
        let existential: Vec<String> = free_after(&rest)
            .into_iter()
            .filter(|p| !universal.contains(p))
            .collect();

        let cases = |vars: &[String]| -> Result<u64, GclError> {
            vars.iter().try_fold(1u64, |acc, p| {
                let n = space.var(p).map_or(1, |v| v.domain.size());
                acc.checked_mul(n).ok_or(GclError::Expansion(u64::MAX))
            })
        };
        let total = cases(&universal)?
            .checked_mul(cases(&existential)?)
            .ok_or(GclError::Expansion(u64::MAX))?;
        if total > EXPANSION_CAP {
            return Err(GclError::Expansion(total));
        }

        let mut outer = Vec::new();
        for a in assignments(space, &universal) {
            let q_a = simplify_in(space, &subst_pred(space, &q_after, &a));
            if q_a == Pred::True {
                continue;
            }
            let r_a = subst_pred(space, &rest, &a);
            let mut inner = Vec::new();
            for b in assignments(space, &existential) {
                let r_ab = simplify_in(space, &subst_pred(space, &r_a, &b));
                if r_ab == Pred::True {
                    inner = vec![Pred::True];
                    break;
                }
                inner.push(r_ab);
            }
            outer.push(Pred::implies(Pred::Or(inner), q_a));
        }
        Ok(simplify_in(space, &Pred::And(outer)))
    }
}

fn flatten_and(p: &Pred) -> Vec<Pred> {
    match p {
        Pred::And(ps) => ps.iter().flat_map(flatten_and).collect(),
        Pred::True => Vec::new(),
        _ => vec![p.clone()],
    }
}

fn mentions_primed(e: &Expr, path: &str) -> bool {
    let mut vars = BTreeSet::new();
    e.collect_vars(&mut vars);
    vars.iter().any(|(p, primed)| *primed && p == path)
}

/// `e` always denotes a value of the variable's domain.
fn same_domain(space: &StateSpace, path: &str, e: &Expr) -> bool {
    let Some(decl) = space.var(path) else { return false };
    match e {
        Expr::Var { path: other, .. } => space.var(other).is_some_and(|o| o.domain == decl.domain),
        Expr::Lit(l) => decl.domain.code_of(l).is_some(),
        _ => false,
    }
}

/// Every assignment of literal values to the primed copies of `vars`, in
/// enumeration order.
fn assignments(space: &StateSpace, vars: &[String]) -> Vec<Subst> {
    let domains: Vec<&Domain> = vars.iter().map(|p| &space.var(p).expect("declared").domain).collect();
    let mut out = Vec::new();
    let mut codes = vec![0u32; vars.len()];
    loop {
        out.push(
            vars.iter()
                .zip(&codes)
                .zip(&domains)
                .map(|((p, c), d)| ((p.clone(), true), Expr::Lit(d.literal(*c))))
                .collect(),
        );
        let mut i = vars.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            codes[i] += 1;
            if u64::from(codes[i]) < domains[i].size() {
                break;
            }
            codes[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::VarDecl;

    fn space() -> StateSpace {
        StateSpace::new(vec![
            VarDecl { path: "a.x".into(), domain: Domain::Enum(vec!["locked".into(), "unlocked".into()]) },
            VarDecl { path: "a.b".into(), domain: Domain::Bool },
            VarDecl { path: "r.n".into(), domain: Domain::Nat(3) },
        ])
        .unwrap()
    }

    #[test]
    fn textbook_cases() {
        let s = space();
        let q = Pred::is("a.x", "unlocked");
        assert_eq!(wp(&s, &Prog::Skip, &q).unwrap(), q);
        assert_eq!(wp(&s, &Prog::Abort, &q).unwrap(), Pred::False);
        assert_eq!(wp(&s, &Prog::assign("a.x", Expr::label("locked")), &q).unwrap(), Pred::False);
        let g = Prog::guard(Pred::holds("a.b"), Prog::assign("a.x", Expr::label("locked")));
        assert_eq!(wp(&s, &g, &Pred::True).unwrap(), Pred::True);
        assert_eq!(wp(&s, &g, &q).unwrap(), Pred::not(Pred::holds("a.b")));
    }

    #[test]
    fn relations_quantify_over_the_frame() {
        let s = space();
        let mono = Prog::frame("r", Prog::Rel(Pred::Le(Expr::var("r.n"), Expr::primed("r.n"))));
        // every successor keeps a.x, so a postcondition on a.x is unaffected
        assert_eq!(wp(&s, &mono, &Pred::is("a.x", "locked")).unwrap(), Pred::is("a.x", "locked"));
        // n' ranges over n..=3, so n' >= 1 is guaranteed only from n >= 1
        let q = Pred::Le(Expr::nat(1), Expr::var("r.n"));
        let w = wp(&s, &mono, &q).unwrap();
        let cap = crate::valid::DEFAULT_STATE_CAP;
        let expected = Pred::Le(Expr::nat(1), Expr::var("r.n"));
        let iff = Pred::and(vec![Pred::implies(w.clone(), expected.clone()), Pred::implies(expected, w)]);
        assert_eq!(crate::valid(&s, &iff, cap).unwrap(), crate::Validity::Valid);
    }

    #[test]
    fn one_point_rule_removes_equations() {
        let s = space();
        let keep = Prog::Rel(Pred::and(vec![
            Pred::Eq(Expr::primed("a.x"), Expr::var("a.x")),
            Pred::Eq(Expr::primed("a.b"), Expr::bool(true)),
        ]));
        let w = wp(&s, &keep, &Pred::and(vec![Pred::is("a.x", "locked"), Pred::holds("a.b")])).unwrap();
        assert_eq!(w, Pred::is("a.x", "locked"));
    }

    #[test]
    fn rejects_ill_typed_input() {
        let s = space();
        assert!(wp(&s, &Prog::Skip, &Pred::is("a.x", "open")).is_err());
        assert!(wp(&s, &Prog::Skip, &Pred::Eq(Expr::primed("a.b"), Expr::bool(true))).is_err());
    }
}
