//! Type checking and lowering to an index-resolved form for evaluation.
//!
//! Compilation is the type checker: an expression, predicate or program is
//! well-typed against a space exactly when it compiles. Label and map
//! literals are typed from context (the other side of `=`, the target of an
//! assignment, the key domain of a map).

use crate::ast::{Expr, Lit, Pred, Prog};
use crate::space::{Domain, StateSpace};
use crate::GclError;

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Var(usize),
    Primed(usize),
    Const(u32),
    /// digit `key` of `map` in base `radix`
    App { map: Box<CExpr>, key: Box<CExpr>, radix: u32 },
    Succ(Box<CExpr>, u32),
}

impl CExpr {
    #[inline]
    pub(crate) fn eval(&self, pre: &[u32], post: &[u32]) -> u32 {
        match self {
            CExpr::Var(i) => pre[*i],
            CExpr::Primed(i) => post[*i],
            CExpr::Const(c) => *c,
            CExpr::App { map, key, radix } => {
                let m = map.eval(pre, post);
                let k = key.eval(pre, post);
                (m / radix.pow(k)) % radix
            }
            CExpr::Succ(e, max) => (e.eval(pre, post) + 1).min(*max),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CPred {
    Const(bool),
    Holds(CExpr),
    Eq(CExpr, CExpr),
    Le(CExpr, CExpr),
    In(CExpr, Vec<u32>),
    Not(Box<CPred>),
    And(Vec<CPred>),
    Or(Vec<CPred>),
    Implies(Box<CPred>, Box<CPred>),
}

impl CPred {
    pub(crate) fn eval(&self, pre: &[u32], post: &[u32]) -> bool {
        match self {
            CPred::Const(b) => *b,
            CPred::Holds(e) => e.eval(pre, post) != 0,
            CPred::Eq(a, b) => a.eval(pre, post) == b.eval(pre, post),
            CPred::Le(a, b) => a.eval(pre, post) <= b.eval(pre, post),
            CPred::In(e, set) => set.contains(&e.eval(pre, post)),
            CPred::Not(p) => !p.eval(pre, post),
            CPred::And(ps) => ps.iter().all(|p| p.eval(pre, post)),
            CPred::Or(ps) => ps.iter().any(|p| p.eval(pre, post)),
            CPred::Implies(a, b) => !a.eval(pre, post) || b.eval(pre, post),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CProg {
    Skip,
    Abort,
    Seq(Box<CProg>, Box<CProg>),
    Guard(CPred, Box<CProg>),
    Choice(Box<CProg>, Box<CProg>),
    Assign(usize, CExpr),
    /// relation and the variables it may change (the enclosing frame scope)
    Rel(CPred, Vec<usize>),
}

pub(crate) struct Compiler<'a> {
    space: &'a StateSpace,
    allow_primes: bool,
    /// variables visible in the current frame
    scope: Vec<bool>,
    frame: Option<String>,
}

impl<'a> Compiler<'a> {
    pub(crate) fn new(space: &'a StateSpace) -> Self {
        Compiler { space, allow_primes: false, scope: vec![true; space.len()], frame: None }
    }

    pub(crate) fn relational(mut self) -> Self {
        self.allow_primes = true;
        self
    }

    fn lookup(&self, path: &str, primed: bool) -> Result<(usize, &'a Domain), GclError> {
        let idx = self.space.index_of(path).ok_or_else(|| {
            GclError::Type(format!("unknown variable `{path}`"))
        })?;
        if primed && !self.allow_primes {
            return Err(GclError::Type(format!(
                "primed variable `{path}'` outside a relational specification"
            )));
        }
        if !self.scope[idx] {
            return Err(GclError::Type(format!(
                "`{path}` is outside frame `{}`",
                self.frame.as_deref().unwrap_or("")
            )));
        }
        Ok((idx, self.space.domain(idx)))
    }

    /// Domain of an expression that can be typed without context.
    fn infer(&self, e: &Expr) -> Result<Option<Domain>, GclError> {
        Ok(match e {
            Expr::Var { path, primed } => Some(self.lookup(path, *primed)?.1.clone()),
            Expr::Lit(Lit::Bool(_)) => Some(Domain::Bool),
            Expr::Lit(Lit::Nat(n)) => Some(Domain::Nat(*n)),
            Expr::Lit(_) => None,
            Expr::App(m, k) => match self.infer(m)? {
                Some(Domain::Map(_, v)) => Some(*v),
                Some(d) => {
                    return Err(GclError::Type(format!("`{m}` has type {d}, not a map")))
                }
                None => {
                    // literal map: typed by the context
                    self.infer(k)?;
                    None
                }
            },
            Expr::Succ(inner) => match self.infer(inner)? {
                Some(Domain::Nat(max)) => Some(Domain::Nat(max)),
                Some(d) => {
                    return Err(GclError::Type(format!("succ applied to {d} in `{e}`")))
                }
                None => return Err(GclError::Type(format!("cannot type `{e}`"))),
            },
        })
    }

    fn expr(&self, e: &Expr, expected: Option<&Domain>) -> Result<(CExpr, Domain), GclError> {
        match e {
            Expr::Var { path, primed } => {
                let (idx, dom) = self.lookup(path, *primed)?;
                if let Some(exp) = expected {
                    check_compatible(dom, exp, e)?;
                }
                let c = if *primed { CExpr::Primed(idx) } else { CExpr::Var(idx) };
                Ok((c, dom.clone()))
            }
            Expr::Lit(lit) => {
                let dom = match (lit, expected) {
                    (_, Some(d)) => d.clone(),
                    (Lit::Bool(_), None) => Domain::Bool,
                    (Lit::Nat(n), None) => Domain::Nat(*n),
                    _ => return Err(GclError::Type(format!("cannot type literal `{lit}`"))),
                };
                let code = match (&dom, lit) {
                    // naturals compare by value whatever the bound
                    (Domain::Nat(_), Lit::Nat(n)) => *n,
                    _ => dom.code_of(lit).ok_or_else(|| {
                        GclError::Type(format!("`{lit}` is not a value of type {dom}"))
                    })?,
                };
                Ok((CExpr::Const(code), dom))
            }
            Expr::App(m, k) => {
                let (cm, key_dom, val_dom) = match self.infer(m)? {
                    Some(Domain::Map(kd, vd)) => {
                        let (cm, _) = self.expr(m, None)?;
                        (cm, *kd, *vd)
                    }
                    Some(d) => {
                        return Err(GclError::Type(format!("`{m}` has type {d}, not a map")))
                    }
                    None => {
                        let kd = self.infer(k)?.ok_or_else(|| {
                            GclError::Type(format!("cannot type map key `{k}`"))
                        })?;
                        let vd = expected.cloned().ok_or_else(|| {
                            GclError::Type(format!("cannot type map literal `{m}`"))
                        })?;
                        let md = Domain::Map(Box::new(kd.clone()), Box::new(vd.clone()));
                        let (cm, _) = self.expr(m, Some(&md))?;
                        (cm, kd, vd)
                    }
                };
                if let Some(exp) = expected {
                    check_compatible(&val_dom, exp, e)?;
                }
                let (ck, _) = self.expr(k, Some(&key_dom))?;
                let radix = val_dom.size() as u32;
                Ok((CExpr::App { map: Box::new(cm), key: Box::new(ck), radix }, val_dom))
            }
            Expr::Succ(inner) => {
                if matches!(inner.as_ref(), Expr::Lit(_)) {
                    return Err(GclError::Type(format!("succ of a literal in `{e}`")));
                }
                let dom = self
                    .infer(inner)?
                    .ok_or_else(|| GclError::Type(format!("cannot type `{e}`")))?;
                let Domain::Nat(max) = dom else {
                    return Err(GclError::Type(format!("succ applied to {dom} in `{e}`")));
                };
                let (ci, _) = self.expr(inner, Some(&dom))?;
                if let Some(exp) = expected {
                    check_compatible(&dom, exp, e)?;
                }
                Ok((CExpr::Succ(Box::new(ci), max), dom))
            }
        }
    }

    /// Compile both sides of a comparison, typing literals from the other side.
    fn pair(&self, a: &Expr, b: &Expr) -> Result<Option<(CExpr, CExpr, Domain)>, GclError> {
        let da = self.infer(a)?;
        let db = self.infer(b)?;
        let dom = match (da, db) {
            (Some(x), Some(y)) => {
                check_compatible(&x, &y, a)?;
                x
            }
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => return Ok(None),
        };
        let (ca, _) = self.expr(a, Some(&dom))?;
        let (cb, _) = self.expr(b, Some(&dom))?;
        Ok(Some((ca, cb, dom)))
    }

    pub(crate) fn pred(&self, p: &Pred) -> Result<CPred, GclError> {
        Ok(match p {
            Pred::True => CPred::Const(true),
            Pred::False => CPred::Const(false),
            Pred::Holds(e) => {
                let (c, _) = self.expr(e, Some(&Domain::Bool))?;
                CPred::Holds(c)
            }
            Pred::Eq(a, b) => match self.pair(a, b)? {
                Some((ca, cb, _)) => CPred::Eq(ca, cb),
                None => match (a, b) {
                    (Expr::Lit(x), Expr::Lit(y)) => CPred::Const(lit_eq(x, y)),
                    _ => return Err(GclError::Type(format!("cannot type `{p}`"))),
                },
            },
            Pred::Le(a, b) => match self.pair(a, b)? {
                Some((ca, cb, Domain::Nat(_))) => CPred::Le(ca, cb),
                Some((_, _, d)) => {
                    return Err(GclError::Type(format!("`<=` on {d} in `{p}`")))
                }
                None => return Err(GclError::Type(format!("cannot type `{p}`"))),
            },
            Pred::In(e, set) => {
                let dom = self
                    .infer(e)?
                    .ok_or_else(|| GclError::Type(format!("cannot type `{e}` in `{p}`")))?;
                let (ce, _) = self.expr(e, Some(&dom))?;
                let mut codes = Vec::with_capacity(set.len());
                for l in set {
                    let code = match (&dom, l) {
                        (Domain::Nat(_), Lit::Nat(n)) => Some(*n),
                        _ => dom.code_of(l),
                    };
                    codes.push(code.ok_or_else(|| {
                        GclError::Type(format!("`{l}` is not a value of type {dom}"))
                    })?);
                }
                CPred::In(ce, codes)
            }
            Pred::Not(q) => CPred::Not(Box::new(self.pred(q)?)),
            Pred::And(ps) => CPred::And(ps.iter().map(|q| self.pred(q)).collect::<Result<_, _>>()?),
            Pred::Or(ps) => CPred::Or(ps.iter().map(|q| self.pred(q)).collect::<Result<_, _>>()?),
            Pred::Implies(a, b) => CPred::Implies(Box::new(self.pred(a)?), Box::new(self.pred(b)?)),
        })
    }

    pub(crate) fn prog(&mut self, p: &Prog) -> Result<CProg, GclError> {
        Ok(match p {
            Prog::Skip => CProg::Skip,
            Prog::Abort => CProg::Abort,
            Prog::Seq(a, b) => CProg::Seq(Box::new(self.prog(a)?), Box::new(self.prog(b)?)),
            Prog::Choice(a, b) => CProg::Choice(Box::new(self.prog(a)?), Box::new(self.prog(b)?)),
            Prog::Guard(g, body) => {
                let cg = self.pred(g)?;
                CProg::Guard(cg, Box::new(self.prog(body)?))
            }
            Prog::Assign(x, e) => {
                let (idx, dom) = self.lookup(x, false)?;
                // naturals move only between equal bounds, so substitution
                // never changes the saturation point of a `succ`
                if let (Domain::Nat(target), Some(Domain::Nat(value))) = (dom, self.infer(e)?) {
                    if value != *target && !matches!(e, Expr::Lit(_)) {
                        return Err(GclError::Type(format!(
                            "cannot assign nat({value}) to `{x}` of type nat({target})"
                        )));
                    }
                }
                if let (Domain::Nat(target), Expr::Lit(Lit::Nat(n))) = (dom, e) {
                    if n > target {
                        return Err(GclError::Type(format!("`{n}` is out of range for `{x}`")));
                    }
                }
                let (ce, _) = self.expr(e, Some(dom))?;
                CProg::Assign(idx, ce)
            }
            Prog::Frame(ns, body) => {
                if !self.space.is_namespace(ns) {
                    return Err(GclError::Type(format!("`{ns}` names no variables")));
                }
                let saved_scope = self.scope.clone();
                let saved_frame = self.frame.replace(ns.clone());
                for (i, v) in self.space.vars().iter().enumerate() {
                    if !crate::space::in_namespace(&v.path, ns) {
                        self.scope[i] = false;
                    }
                }
                let out = self.prog(body);
                self.scope = saved_scope;
                self.frame = saved_frame;
                out?
            }
            Prog::Rel(r) => {
                let saved = self.allow_primes;
                self.allow_primes = true;
                let cr = self.pred(r);
                self.allow_primes = saved;
                let scope = (0..self.space.len()).filter(|i| self.scope[*i]).collect();
                CProg::Rel(cr?, scope)
            }
        })
    }
}

fn check_compatible(a: &Domain, b: &Domain, at: &Expr) -> Result<(), GclError> {
    let ok = match (a, b) {
        (Domain::Nat(_), Domain::Nat(_)) => true,
        _ => a == b,
    };
    if ok {
        Ok(())
    } else {
        Err(GclError::Type(format!("`{at}` has type {a}, expected {b}")))
    }
}

fn lit_eq(a: &Lit, b: &Lit) -> bool {
    match (a, b) {
        (Lit::Map(x), Lit::Map(y)) => {
            let mut x = x.clone();
            let mut y = y.clone();
            x.sort_by_key(|e| e.0.to_string());
            y.sort_by_key(|e| e.0.to_string());
            x == y
        }
        _ => a == b,
    }
}

/// Check that a unprimed predicate is well-typed against the space.
pub fn typecheck_pred(space: &StateSpace, p: &Pred) -> Result<(), GclError> {
    Compiler::new(space).pred(p).map(|_| ())
}

/// Check that a relational predicate (primes allowed) is well-typed.
pub fn typecheck_relation(space: &StateSpace, p: &Pred) -> Result<(), GclError> {
    Compiler::new(space).relational().pred(p).map(|_| ())
}

/// Check a program: well-typed assignments and guards, and every frame body
/// referencing only variables under its namespace.
pub fn typecheck_prog(space: &StateSpace, p: &Prog) -> Result<(), GclError> {
    Compiler::new(space).prog(p).map(|_| ())
}
