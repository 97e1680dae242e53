//! Predicate simplification: constant folding and unit laws.
//!
//! Every rewrite is an equivalence, so the result evaluates like the input
//! in every state (property-tested below against the unsimplified form).

use crate::ast::{Expr, Lit, Pred};
use crate::space::StateSpace;
use crate::subst::nat_bound;

pub fn simplify(p: &Pred) -> Pred {
    Simplifier { space: None }.pred(p)
}

/// As [`simplify`], additionally using the bounds of natural variables.
pub fn simplify_in(space: &StateSpace, p: &Pred) -> Pred {
    Simplifier { space: Some(space) }.pred(p)
}

struct Simplifier<'a> {
    space: Option<&'a StateSpace>,
}

fn lit_const(e: &Expr) -> Option<&Lit> {
    match e {
        Expr::Lit(l) => Some(l),
        _ => None,
    }
}

fn lits_equal(a: &Lit, b: &Lit) -> bool {
    match (a, b) {
        (Lit::Map(x), Lit::Map(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.iter().any(|(k2, v2)| k == k2 && lits_equal(v, v2)))
        }
        _ => a == b,
    }
}

fn expr(e: &Expr) -> Expr {
    match e {
        Expr::App(m, k) => {
            let m = expr(m);
            let k = expr(k);
            if let (Expr::Lit(Lit::Map(entries)), Expr::Lit(key)) = (&m, &k) {
                if let Some((_, v)) = entries.iter().find(|(ek, _)| ek == key) {
                    return Expr::Lit(v.clone());
                }
            }
            Expr::app(m, k)
        }
        Expr::Succ(inner) => Expr::succ(expr(inner)),
        _ => e.clone(),
    }
}

impl Simplifier<'_> {
    fn pred(&self, p: &Pred) -> Pred {
        match p {
            Pred::True | Pred::False => p.clone(),
            Pred::Holds(e) => match expr(e) {
                Expr::Lit(Lit::Bool(b)) => bool_pred(b),
                e => Pred::Holds(e),
            },
            Pred::Eq(a, b) => {
                let a = expr(a);
                let b = expr(b);
                if a == b {
                    return Pred::True;
                }
                match (lit_const(&a), lit_const(&b)) {
                    (Some(x), Some(y)) => bool_pred(lits_equal(x, y)),
                    (_, Some(Lit::Bool(true))) => Pred::Holds(a),
                    (_, Some(Lit::Bool(false))) => Pred::not(Pred::Holds(a)),
                    (Some(Lit::Bool(true)), _) => Pred::Holds(b),
                    (Some(Lit::Bool(false)), _) => Pred::not(Pred::Holds(b)),
                    _ => Pred::Eq(a, b),
                }
            }
            Pred::Le(a, b) => {
                let a = expr(a);
                let b = expr(b);
                if a == b {
                    return Pred::True;
                }
                match (&a, &b) {
                    (Expr::Lit(Lit::Nat(x)), Expr::Lit(Lit::Nat(y))) => bool_pred(x <= y),
                    (Expr::Lit(Lit::Nat(0)), _) => Pred::True,
                    (_, Expr::Lit(Lit::Nat(y)))
                        if self.space.and_then(|s| nat_bound(s, &a)).is_some_and(|m| m <= *y) =>
                    {
                        Pred::True
                    }
                    _ => Pred::Le(a, b),
                }
            }
            Pred::In(e, set) => {
                let e = expr(e);
                if set.is_empty() {
                    return Pred::False;
                }
                match &e {
                    Expr::Lit(l) => bool_pred(set.iter().any(|x| lits_equal(x, l))),
                    _ if set.len() == 1 => Pred::Eq(e, Expr::Lit(set[0].clone())),
                    _ => Pred::In(e, set.clone()),
                }
            }
            Pred::Not(q) => match self.pred(q) {
                Pred::True => Pred::False,
                Pred::False => Pred::True,
                Pred::Not(inner) => *inner,
                q => Pred::not(q),
            },
            Pred::And(ps) => {
                let mut out: Vec<Pred> = Vec::new();
                for q in ps {
                    match self.pred(q) {
                        Pred::True => {}
                        Pred::False => return Pred::False,
                        Pred::And(inner) => {
                            for i in inner {
                                push_unique(&mut out, i);
                            }
                        }
                        q => push_unique(&mut out, q),
                    }
                }
                collapse(out, Pred::True, Pred::And)
            }
            Pred::Or(ps) => {
                let mut out: Vec<Pred> = Vec::new();
                for q in ps {
                    match self.pred(q) {
                        Pred::False => {}
                        Pred::True => return Pred::True,
                        Pred::Or(inner) => {
                            for i in inner {
                                push_unique(&mut out, i);
                            }
                        }
                        q => push_unique(&mut out, q),
                    }
                }
                collapse(out, Pred::False, Pred::Or)
            }
            Pred::Implies(a, b) => {
                let a = self.pred(a);
                match a {
                    Pred::False => return Pred::True,
                    Pred::True => return self.pred(b),
                    _ => {}
                }
                let b = self.pred(b);
                if a == b {
                    return Pred::True;
                }
                match b {
                    Pred::True => Pred::True,
                    Pred::False => self.pred(&Pred::not(a)),
                    b => Pred::implies(a, b),
                }
            }
        }
    }
}

fn bool_pred(b: bool) -> Pred {
    if b {
        Pred::True
    } else {
        Pred::False
    }
}

fn push_unique(out: &mut Vec<Pred>, p: Pred) {
    if !out.contains(&p) {
        out.push(p);
    }
}

fn collapse(mut out: Vec<Pred>, unit: Pred, build: fn(Vec<Pred>) -> Pred) -> Pred {
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ => build(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::eval_pred;
    use crate::space::{Domain, VarDecl};
    use proptest::prelude::*;

    #[test]
    fn folds_constants_and_units() {
        let p = Pred::and(vec![
            Pred::True,
            Pred::Eq(Expr::label("locked"), Expr::label("unlocked")),
            Pred::holds("b"),
        ]);
        assert_eq!(simplify(&p), Pred::False);
        let q = Pred::implies(Pred::True, Pred::or(vec![Pred::False, Pred::holds("b")]));
        assert_eq!(simplify(&q), Pred::holds("b"));
        assert_eq!(simplify(&Pred::not(Pred::not(Pred::holds("b")))), Pred::holds("b"));
        assert_eq!(simplify(&Pred::implies(Pred::holds("b"), Pred::False)), Pred::not(Pred::holds("b")));
    }

    #[test]
    fn uses_bounds_when_given_a_space() {
        let s = StateSpace::new(vec![VarDecl { path: "n".into(), domain: Domain::Nat(3) }]).unwrap();
        let p = Pred::Le(Expr::var("n"), Expr::nat(3));
        assert_eq!(simplify(&p), p);
        assert_eq!(simplify_in(&s, &p), Pred::True);
    }

    #[test]
    fn looks_up_literal_maps() {
        let m = Expr::Lit(Lit::Map(vec![
            (Lit::Label("a".into()), Lit::Bool(true)),
            (Lit::Label("b".into()), Lit::Bool(false)),
        ]));
        assert_eq!(simplify(&Pred::Holds(Expr::app(m.clone(), Expr::label("a")))), Pred::True);
        assert_eq!(simplify(&Pred::Holds(Expr::app(m, Expr::label("b")))), Pred::False);
    }

    fn space() -> StateSpace {
        StateSpace::new(vec![
            VarDecl { path: "c".into(), domain: Domain::Enum(vec!["r".into(), "g".into(), "b".into()]) },
            VarDecl { path: "f".into(), domain: Domain::Bool },
            VarDecl { path: "n".into(), domain: Domain::Nat(2) },
        ])
        .unwrap()
    }

    fn atom() -> impl Strategy<Value = Pred> {
        prop_oneof![
            Just(Pred::True),
            Just(Pred::False),
            Just(Pred::holds("f")),
            prop::sample::select(vec!["r", "g", "b"]).prop_map(|l| Pred::is("c", l)),
            prop::sample::select(vec!["r", "g"]).prop_map(|l| Pred::Eq(Expr::label(l), Expr::label("g"))),
            (0u32..3).prop_map(|k| Pred::Le(Expr::var("n"), Expr::nat(k))),
            (0u32..3).prop_map(|k| Pred::Le(Expr::nat(k), Expr::nat(1))),
            Just(Pred::Eq(Expr::var("f"), Expr::bool(false))),
            Just(Pred::In(Expr::var("c"), vec![])),
            Just(Pred::In(Expr::var("c"), vec![Lit::Label("r".into())])),
        ]
    }

    fn pred() -> impl Strategy<Value = Pred> {
        atom().prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Pred::not),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Pred::And),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Pred::Or),
                (inner.clone(), inner).prop_map(|(a, b)| Pred::implies(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn simplification_preserves_meaning(p in pred()) {
            let s = space();
            let simple = simplify_in(&s, &p);
            for st in s.states() {
                prop_assert_eq!(eval_pred(&s, &p, &st).unwrap(), eval_pred(&s, &simple, &st).unwrap());
            }
        }
    }
}
