//! Expression, predicate and program syntax trees.
//!
//! Variables are referenced by path. Predicates have no binders (relational
//! quantifiers are expanded over finite domains by `wp`), so substitution is
//! plain structural replacement and cannot capture.
//!
//! `Display` prints the concrete syntax accepted by [`crate::syntax`].

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lit {
    Bool(bool),
    Nat(u32),
    Label(String),
    /// Finite map literal, `{k |-> v, ...}`.
    Map(Vec<(Lit, Lit)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var { path: String, primed: bool },
    Lit(Lit),
    /// Application of a finite map to a key.
    App(Box<Expr>, Box<Expr>),
    /// Successor on a bounded natural, saturating at the bound.
    Succ(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pred {
    True,
    False,
    /// A boolean-valued expression used as a formula.
    Holds(Expr),
    Eq(Expr, Expr),
    Le(Expr, Expr),
    In(Expr, Vec<Lit>),
    Not(Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Implies(Box<Pred>, Box<Pred>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prog {
    Skip,
    Abort,
    Seq(Box<Prog>, Box<Prog>),
    Guard(Pred, Box<Prog>),
    /// Demonic nondeterministic choice.
    Choice(Box<Prog>, Box<Prog>),
    Assign(String, Expr),
    /// Restrict the body to the variables under a namespace; all others are
    /// left unchanged.
    Frame(String, Box<Prog>),
    /// Relational specification over unprimed (before) and primed (after)
    /// variables. Primed variables the relation does not constrain range
    /// over their whole domain.
    Rel(Pred),
}

impl Expr {
    pub fn var(path: impl Into<String>) -> Expr {
        Expr::Var { path: path.into(), primed: false }
    }

    pub fn primed(path: impl Into<String>) -> Expr {
        Expr::Var { path: path.into(), primed: true }
    }

    pub fn label(l: impl Into<String>) -> Expr {
        Expr::Lit(Lit::Label(l.into()))
    }

    pub fn nat(n: u32) -> Expr {
        Expr::Lit(Lit::Nat(n))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Lit(Lit::Bool(b))
    }

    pub fn app(map: Expr, key: Expr) -> Expr {
        Expr::App(Box::new(map), Box::new(key))
    }

    pub fn succ(e: Expr) -> Expr {
        Expr::Succ(Box::new(e))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Expr::Var { path, primed } => {
                out.insert((path.clone(), *primed));
            }
            Expr::Lit(_) => {}
            Expr::App(m, k) => {
                m.collect_vars(out);
                k.collect_vars(out);
            }
            Expr::Succ(e) => e.collect_vars(out),
        }
    }

    /// Replace variable occurrences for which `f` returns a replacement.
    pub fn map_vars(&self, f: &impl Fn(&str, bool) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var { path, primed } => f(path, *primed).unwrap_or_else(|| self.clone()),
            Expr::Lit(_) => self.clone(),
            Expr::App(m, k) => Expr::app(m.map_vars(f), k.map_vars(f)),
            Expr::Succ(e) => Expr::succ(e.map_vars(f)),
        }
    }
}

impl Pred {
    pub fn eq(a: Expr, b: Expr) -> Pred {
        Pred::Eq(a, b)
    }

    /// `path = label`
    pub fn is(path: &str, label: &str) -> Pred {
        Pred::Eq(Expr::var(path), Expr::label(label))
    }

    /// `path in {labels}`
    pub fn is_one_of(path: &str, labels: &[&str]) -> Pred {
        Pred::In(
            Expr::var(path),
            labels.iter().map(|l| Lit::Label((*l).to_string())).collect(),
        )
    }

    pub fn holds(path: &str) -> Pred {
        Pred::Holds(Expr::var(path))
    }

    pub fn not(p: Pred) -> Pred {
        Pred::Not(Box::new(p))
    }

    pub fn and(ps: Vec<Pred>) -> Pred {
        Pred::And(ps)
    }

    pub fn or(ps: Vec<Pred>) -> Pred {
        Pred::Or(ps)
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Implies(Box::new(a), Box::new(b))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Holds(e) | Pred::In(e, _) => e.collect_vars(out),
            Pred::Eq(a, b) | Pred::Le(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pred::Not(p) => p.collect_vars(out),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            Pred::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Every `(path, primed)` occurring in the predicate.
    pub fn vars(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn has_primes(&self) -> bool {
        self.vars().iter().any(|(_, p)| *p)
    }

    pub fn map_vars(&self, f: &impl Fn(&str, bool) -> Option<Expr>) -> Pred {
        match self {
            Pred::True | Pred::False => self.clone(),
            Pred::Holds(e) => Pred::Holds(e.map_vars(f)),
            Pred::Eq(a, b) => Pred::Eq(a.map_vars(f), b.map_vars(f)),
            Pred::Le(a, b) => Pred::Le(a.map_vars(f), b.map_vars(f)),
            Pred::In(e, set) => Pred::In(e.map_vars(f), set.clone()),
            Pred::Not(p) => Pred::not(p.map_vars(f)),
            Pred::And(ps) => Pred::And(ps.iter().map(|p| p.map_vars(f)).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(|p| p.map_vars(f)).collect()),
            Pred::Implies(a, b) => Pred::implies(a.map_vars(f), b.map_vars(f)),
        }
    }

    /// Node count, used to report formula sizes.
    pub fn size(&self) -> usize {
        match self {
            Pred::Not(p) => 1 + p.size(),
            Pred::And(ps) | Pred::Or(ps) => 1 + ps.iter().map(Pred::size).sum::<usize>(),
            Pred::Implies(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }
}

impl Prog {
    pub fn seq(a: Prog, b: Prog) -> Prog {
        Prog::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence of the given programs; `skip` when empty.
    pub fn seq_all(progs: Vec<Prog>) -> Prog {
        let mut it = progs.into_iter().rev();
        match it.next() {
            None => Prog::Skip,
            Some(last) => it.fold(last, |acc, p| Prog::seq(p, acc)),
        }
    }

    pub fn guard(g: Pred, body: Prog) -> Prog {
        Prog::Guard(g, Box::new(body))
    }

    pub fn choice(a: Prog, b: Prog) -> Prog {
        Prog::Choice(Box::new(a), Box::new(b))
    }

    /// Left-nested choice over the given programs.
    ///
    /// Panics on an empty list: a choice over nothing has no syntax.
    pub fn choice_all(progs: Vec<Prog>) -> Prog {
        let mut it = progs.into_iter();
        let first = it.next().expect("choice over no alternatives");
        it.fold(first, Prog::choice)
    }

    pub fn assign(path: impl Into<String>, e: Expr) -> Prog {
        Prog::Assign(path.into(), e)
    }

    pub fn frame(ns: impl Into<String>, body: Prog) -> Prog {
        Prog::Frame(ns.into(), Box::new(body))
    }

    /// Tree depth; atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Prog::Skip | Prog::Abort | Prog::Assign(..) | Prog::Rel(_) => 1,
            Prog::Guard(_, b) | Prog::Frame(_, b) => 1 + b.depth(),
            Prog::Seq(a, b) | Prog::Choice(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Nat(n) => write!(f, "{n}"),
            Lit::Label(l) => write!(f, "{l}"),
            Lit::Map(entries) => {
                write!(f, "{{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} |-> {v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var { path, primed } => write!(f, "{path}{}", if *primed { "'" } else { "" }),
            Expr::Lit(l) => write!(f, "{l}"),
            Expr::App(m, k) => write!(f, "{m}({k})"),
            Expr::Succ(e) => write!(f, "succ({e})"),
        }
    }
}

// precedence levels: => 0, \/ 1, /\ 2, ~ 3, atoms 4
fn pred_level(p: &Pred) -> u8 {
    match p {
        Pred::Implies(..) => 0,
        Pred::Or(ps) if ps.len() > 1 => 1,
        Pred::And(ps) if ps.len() > 1 => 2,
        Pred::Or(ps) | Pred::And(ps) => ps.first().map_or(4, pred_level),
        Pred::Not(_) => 3,
        _ => 4,
    }
}

fn write_pred_at(f: &mut fmt::Formatter<'_>, p: &Pred, min: u8) -> fmt::Result {
    if pred_level(p) < min {
        write!(f, "(")?;
        write_pred(f, p)?;
        write!(f, ")")
    } else {
        write_pred(f, p)
    }
}

fn write_pred(f: &mut fmt::Formatter<'_>, p: &Pred) -> fmt::Result {
    match p {
        Pred::True => write!(f, "true"),
        Pred::False => write!(f, "false"),
        Pred::Holds(e) => write!(f, "{e}"),
        Pred::Eq(a, b) => write!(f, "{a} = {b}"),
        Pred::Le(a, b) => write!(f, "{a} <= {b}"),
        Pred::In(e, set) => {
            write!(f, "{e} in {{")?;
            for (i, l) in set.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l}")?;
            }
            write!(f, "}}")
        }
        Pred::Not(q) => {
            write!(f, "~")?;
            write_pred_at(f, q, 3)
        }
        Pred::And(ps) | Pred::Or(ps) if ps.is_empty() => {
            write!(f, "{}", if matches!(p, Pred::And(_)) { "true" } else { "false" })
        }
        Pred::And(ps) | Pred::Or(ps) if ps.len() == 1 => write_pred(f, &ps[0]),
        Pred::And(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " /\\ ")?;
                }
                // nested conjunctions keep their own parentheses
                write_pred_at(f, q, 3)?;
            }
            Ok(())
        }
        Pred::Or(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " \\/ ")?;
                }
                write_pred_at(f, q, 2)?;
            }
            Ok(())
        }
        Pred::Implies(a, b) => {
            write_pred_at(f, a, 1)?;
            write!(f, " => ")?;
            write_pred_at(f, b, 0)
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pred(f, self)
    }
}

// precedence levels: |~| 0, ; 1, units 2
fn prog_level(p: &Prog) -> u8 {
    match p {
        Prog::Choice(..) => 0,
        Prog::Seq(..) => 1,
        _ => 2,
    }
}

fn write_prog_at(f: &mut fmt::Formatter<'_>, p: &Prog, min: u8) -> fmt::Result {
    if prog_level(p) < min {
        write!(f, "(")?;
        write_prog(f, p)?;
        write!(f, ")")
    } else {
        write_prog(f, p)
    }
}

fn write_prog(f: &mut fmt::Formatter<'_>, p: &Prog) -> fmt::Result {
    match p {
        Prog::Skip => write!(f, "skip"),
        Prog::Abort => write!(f, "abort"),
        Prog::Seq(a, b) => {
            write_prog_at(f, a, 1)?;
            write!(f, " ; ")?;
            write_prog_at(f, b, 2)
        }
        Prog::Choice(a, b) => {
            write_prog_at(f, a, 0)?;
            write!(f, " |~| ")?;
            write_prog_at(f, b, 1)
        }
        Prog::Guard(g, body) => {
            write!(f, "({g}) -> ")?;
            write_prog_at(f, body, 2)
        }
        Prog::Assign(x, e) => write!(f, "{x} := {e}"),
        Prog::Frame(ns, body) => {
            write!(f, "frame {ns} in ")?;
            write_prog_at(f, body, 2)
        }
        Prog::Rel(r) => write!(f, "rel[{r}]"),
    }
}

impl fmt::Display for Prog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prog(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_with_minimal_grouping() {
        let p = Pred::implies(
            Pred::and(vec![Pred::is("x", "a"), Pred::or(vec![Pred::holds("y"), Pred::True])]),
            Pred::not(Pred::is_one_of("x", &["a", "b"])),
        );
        assert_eq!(p.to_string(), "x = a /\\ (y \\/ true) => ~x in {a, b}");
        let s = Prog::choice(
            Prog::seq(Prog::Skip, Prog::guard(Pred::holds("y"), Prog::assign("x", Expr::label("b")))),
            Prog::frame("n", Prog::Rel(Pred::Le(Expr::var("n"), Expr::primed("n")))),
        );
        assert_eq!(s.to_string(), "skip ; (y) -> x := b |~| frame n in rel[n <= n']");
    }

    #[test]
    fn substitution_only_touches_unprimed_occurrences() {
        let p = Pred::Eq(Expr::var("x"), Expr::primed("x"));
        let q = p.map_vars(&|path, primed| (path == "x" && !primed).then(|| Expr::nat(1)));
        assert_eq!(q, Pred::Eq(Expr::nat(1), Expr::primed("x")));
    }

    #[test]
    fn seq_all_and_choice_all_nest() {
        assert_eq!(Prog::seq_all(vec![]), Prog::Skip);
        let s = Prog::seq_all(vec![Prog::Skip, Prog::Abort, Prog::Skip]);
        assert_eq!(s, Prog::seq(Prog::Skip, Prog::seq(Prog::Abort, Prog::Skip)));
        let c = Prog::choice_all(vec![Prog::Skip, Prog::Abort, Prog::Skip]);
        assert_eq!(c, Prog::choice(Prog::choice(Prog::Skip, Prog::Abort), Prog::Skip));
        assert_eq!(c.depth(), 3);
    }
}
