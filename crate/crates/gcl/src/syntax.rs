//! Concrete syntax for models, predicates, programs and obligations.
//!
//! ```text
//! model    = "model" ident { decl }
//! decl     = "var" path ":" domain
//!          | "pred" ident "=" pred
//!          | "prog" ident ["(" ident {"," ident} ")"] "=" prog
//! domain   = "bool" | "nat" "(" num ")" | "{" ident {"," ident} "}" | "map" domain "->" domain
//!
//! pred     = or ["=>" pred]
//! or       = and {"\/" and}
//! and      = unary {"/\" unary}
//! unary    = "~" unary | "(" pred ")" | "true" | "false" | predname
//!          | expr ["=" expr | "<=" expr | "in" "{" lit {"," lit} "}"]
//! expr     = primary {"(" expr ")"}
//! primary  = path ["'"] | label | num | "true" | "false" | "succ" "(" expr ")"
//!          | "{" lit "|->" lit {"," lit "|->" lit} "}"
//!
//! prog     = seq {"|~|" seq}
//! seq      = unit {";" unit}
//! unit     = "skip" | "abort" | "(" prog ")" | "frame" path "in" unit | "rel" "[" pred "]"
//!          | path ":=" expr | pred "->" unit | progname ["(" prog {"," prog} ")"]
//!
//! obligation = [ident ":"] ( "hoare" "{" pred "}" prog "{" pred "}"
//!                          | "wp_implies" "{" pred "}" prog "{" pred "}" "{" pred "}" )
//! ```
//!
//! An identifier that is not a declared variable is a label. Predicate and
//! program names are expanded in place. A parametric program is a macro: its
//! body is re-parsed with each parameter replaced by the argument program.
//! An equation between two namespaces (`rw.ctrl' = rw.ctrl`) stands for the
//! conjunction of the equations between their corresponding variables.
//! Definitions need no terminator; `#` starts a comment.

use std::collections::BTreeMap;

use crate::ast::{Expr, Lit, Pred, Prog};
use crate::compile::Compiler;
use crate::obligation::{Obligation, ObligationForm};
use crate::space::{Domain, StateSpace, VarDecl};
use crate::GclError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "|~|", "|->", "/\\", "\\/", "=>", "<=", "->", ":=", "=", "~", ";", "(", ")", "{", "}", "[", "]",
    ",", ":", "'",
];

const KEYWORDS: &[&str] = &[
    "model", "var", "pred", "prog", "skip", "abort", "frame", "in", "rel", "succ", "true", "false",
    "hoare", "wp_implies", "map", "bool", "nat",
];

fn lex(src: &str) -> Result<Vec<Token>, GclError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            loop {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                let continues = i + 1 < chars.len()
                    && chars[i] == '.'
                    && (chars[i + 1].is_ascii_alphabetic() || chars[i + 1] == '_');
                if !continues {
                    break;
                }
                s.push('.');
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n: u32 = 0;
            while i < chars.len() && chars[i].is_ascii_digit() {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(chars[i].to_digit(10).unwrap()))
                    .ok_or(GclError::Parse { line, col: start_col, message: "number too large".into() })?;
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Num(n), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                let n = sym.chars().count();
                i += n;
                col += n;
                out.push(Token { tok: Tok::Sym(sym), line: start_line, col: start_col });
            }
            None => {
                return Err(GclError::Parse { line, col, message: format!("unexpected character `{c}`") })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Debug, Clone)]
struct Macro {
    params: Vec<String>,
    body: Vec<Token>,
}

/// A parsed model: a state space with named predicates and programs.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub space: StateSpace,
    pub preds: BTreeMap<String, Pred>,
    pub progs: BTreeMap<String, Prog>,
    /// Program names in declaration order, parametric ones excluded.
    pub prog_order: Vec<String>,
    macros: BTreeMap<String, Macro>,
}

impl Model {
    /// A model with no definitions, for parsing against a bare space.
    pub fn from_space(name: impl Into<String>, space: StateSpace) -> Model {
        Model {
            name: name.into(),
            space,
            preds: BTreeMap::new(),
            progs: BTreeMap::new(),
            prog_order: Vec::new(),
            macros: BTreeMap::new(),
        }
    }

    pub fn pred(&self, name: &str) -> Option<&Pred> {
        self.preds.get(name)
    }

    pub fn prog(&self, name: &str) -> Option<&Prog> {
        self.progs.get(name)
    }
}

struct Parser<'m> {
    toks: Vec<Token>,
    pos: usize,
    model: &'m Model,
}

type PResult<T> = Result<T, GclError>;

impl<'m> Parser<'m> {
    fn new(toks: Vec<Token>, model: &'m Model) -> Self {
        Parser { toks, pos: 0, model }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(GclError::Parse { line: t.line, col: t.col, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    // -- predicates ---------------------------------------------------------

    fn pred(&mut self) -> PResult<Pred> {
        let lhs = self.or()?;
        if self.eat_sym("=>") {
            Ok(Pred::implies(lhs, self.pred()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.and()?];
        while self.eat_sym("\\/") {
            ps.push(self.and()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::Or(ps) })
    }

    fn and(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.unary()?];
        while self.eat_sym("/\\") {
            ps.push(self.unary()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::And(ps) })
    }

    fn unary(&mut self) -> PResult<Pred> {
        if self.eat_sym("~") {
            return Ok(Pred::not(self.unary()?));
        }
        if self.eat_sym("(") {
            let p = self.pred()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let compares = matches!(self.peek_at(1), Tok::Sym("=") | Tok::Sym("<="));
        if self.is_kw("true") && !compares {
            self.bump();
            return Ok(Pred::True);
        }
        if self.is_kw("false") && !compares {
            self.bump();
            return Ok(Pred::False);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if self.model.space.index_of(&name).is_none() {
                if let Some(p) = self.model.preds.get(&name) {
                    self.bump();
                    return Ok(p.clone());
                }
                if self.model.space.is_namespace(&name) {
                    return self.namespace_eq();
                }
            }
        }
        let lhs = self.expr()?;
        if self.eat_sym("=") {
            Ok(Pred::Eq(lhs, self.expr()?))
        } else if self.eat_sym("<=") {
            Ok(Pred::Le(lhs, self.expr()?))
        } else if self.is_kw("in") {
            self.bump();
            self.expect_sym("{")?;
            let mut set = Vec::new();
            if !self.is_sym("}") {
                loop {
                    set.push(self.lit()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            Ok(Pred::In(lhs, set))
        } else {
            Ok(Pred::Holds(lhs))
        }
    }

    fn namespace_side(&mut self) -> PResult<(String, bool)> {
        let start = self.pos;
        let ns = self.ident("a namespace")?;
        if !self.model.space.is_namespace(&ns) || self.model.space.index_of(&ns).is_some() {
            self.pos = start;
            return self.err(format!("`{ns}` is not a namespace"));
        }
        Ok((ns, self.eat_sym("'")))
    }

    fn namespace_eq(&mut self) -> PResult<Pred> {
        let (left, lp) = self.namespace_side()?;
        self.expect_sym("=")?;
        let (right, rp) = self.namespace_side()?;
        let space = &self.model.space;
        let mut eqs = Vec::new();
        for idx in space.namespace(&left) {
            let v = &space.vars()[idx];
            let partner = format!("{right}{}", &v.path[left.len()..]);
            match space.var(&partner) {
                Some(p) if p.domain == v.domain => eqs.push(Pred::Eq(
                    Expr::Var { path: v.path.clone(), primed: lp },
                    Expr::Var { path: partner, primed: rp },
                )),
                _ => return self.err(format!("namespaces `{left}` and `{right}` do not match")),
            }
        }
        if space.namespace(&right).len() != eqs.len() {
            return self.err(format!("namespaces `{left}` and `{right}` do not match"));
        }
        Ok(Pred::And(eqs))
    }

    fn lit(&mut self) -> PResult<Lit> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Lit::Nat(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Lit::Bool(s == "true"))
            }
            Tok::Ident(s) if !s.contains('.') && !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Lit::Label(s))
            }
            _ => self.err(format!("expected a literal, found {}", self.describe())),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.is_sym("(") {
            self.bump();
            let key = self.expr()?;
            self.expect_sym(")")?;
            e = Expr::app(e, key);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::nat(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::bool(s == "true"))
            }
            Tok::Ident(s) if s == "succ" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::succ(e))
            }
            Tok::Sym("{") => {
                self.bump();
                let mut entries = Vec::new();
                loop {
                    let k = self.lit()?;
                    self.expect_sym("|->")?;
                    let v = self.lit()?;
                    entries.push((k, v));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(Expr::Lit(Lit::Map(entries)))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if self.model.space.index_of(&s).is_some() {
                    self.bump();
                    let primed = self.eat_sym("'");
                    Ok(Expr::Var { path: s, primed })
                } else if s.contains('.') {
                    self.err(format!("unknown variable `{s}`"))
                } else {
                    self.bump();
                    Ok(Expr::label(s))
                }
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }

    // -- programs -----------------------------------------------------------

    fn prog(&mut self) -> PResult<Prog> {
        let mut p = self.seq()?;
        while self.eat_sym("|~|") {
            p = Prog::choice(p, self.seq()?);
        }
        Ok(p)
    }

    fn seq(&mut self) -> PResult<Prog> {
        let mut p = self.unit()?;
        while self.eat_sym(";") {
            p = Prog::seq(p, self.unit()?);
        }
        Ok(p)
    }

    fn unit(&mut self) -> PResult<Prog> {
        if self.is_kw("skip") {
            self.bump();
            return Ok(Prog::Skip);
        }
        if self.is_kw("abort") {
            self.bump();
            return Ok(Prog::Abort);
        }
        if self.is_kw("frame") {
            self.bump();
            let ns = self.ident("a namespace")?;
            self.expect_kw("in")?;
            return Ok(Prog::frame(ns, self.unit()?));
        }
        if self.is_kw("rel") {
            self.bump();
            self.expect_sym("[")?;
            let r = self.pred()?;
            self.expect_sym("]")?;
            return Ok(Prog::Rel(r));
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::Sym(":=") {
                let path = self.ident("a variable")?;
                self.bump();
                return Ok(Prog::assign(path, self.expr()?));
            }
            if self.model.space.index_of(&name).is_none() && !self.model.preds.contains_key(&name) {
                if let Some(p) = self.model.progs.get(&name) {
                    self.bump();
                    return Ok(p.clone());
                }
                if let Some(m) = self.model.macros.get(&name) {
                    let m = m.clone();
                    self.bump();
                    return self.expand(&name, &m);
                }
            }
        }
        // a guard, or failing that a parenthesised program
        let start = self.pos;
        let guard_err = match self.pred() {
            Ok(g) if self.eat_sym("->") => return Ok(Prog::guard(g, self.unit()?)),
            Ok(_) => self.err::<()>(format!("expected `->`, found {}", self.describe())).unwrap_err(),
            Err(e) => e,
        };
        let guard_reach = self.pos;
        self.pos = start;
        if self.eat_sym("(") {
            match self.prog().and_then(|p| self.expect_sym(")").map(|_| p)) {
                Ok(p) => return Ok(p),
                Err(e) if self.pos > guard_reach => return Err(e),
                Err(_) => {}
            }
        }
        self.pos = start;
        if matches!(self.peek(), Tok::Eof | Tok::Sym(_)) && !self.is_sym("(") && !self.is_sym("~") {
            return self.err(format!("expected a program, found {}", self.describe()));
        }
        Err(guard_err)
    }

    fn expand(&mut self, name: &str, m: &Macro) -> PResult<Prog> {
        self.expect_sym("(")?;
        let mut args: Vec<Vec<Token>> = Vec::new();
        let mut current = Vec::new();
        let mut depth = 0usize;
        loop {
            let t = self.bump();
            match &t.tok {
                Tok::Eof => return self.err("unclosed argument list"),
                Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("{") => depth += 1,
                Tok::Sym(")") if depth == 0 => {
                    args.push(std::mem::take(&mut current));
                    break;
                }
                Tok::Sym(",") if depth == 0 => {
                    args.push(std::mem::take(&mut current));
                    continue;
                }
                Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") => depth = depth.saturating_sub(1),
                _ => {}
            }
            current.push(t);
        }
        if args.len() != m.params.len() {
            return self.err(format!("`{name}` takes {} argument(s), got {}", m.params.len(), args.len()));
        }
        let mut toks = Vec::new();
        for t in &m.body {
            match &t.tok {
                Tok::Ident(id) if m.params.contains(id) => {
                    let arg = &args[m.params.iter().position(|p| p == id).unwrap()];
                    toks.push(Token { tok: Tok::Sym("("), ..t.clone() });
                    toks.extend(arg.iter().cloned());
                    toks.push(Token { tok: Tok::Sym(")"), ..t.clone() });
                }
                _ => toks.push(t.clone()),
            }
        }
        let last = m.body.last().cloned().unwrap_or_else(|| self.toks[self.pos].clone());
        toks.push(Token { tok: Tok::Eof, ..last });
        let mut sub = Parser::new(toks, self.model);
        let p = sub.prog()?;
        sub.expect_eof()?;
        Ok(p)
    }

    // -- model files --------------------------------------------------------

    fn domain(&mut self) -> PResult<Domain> {
        if self.is_kw("bool") {
            self.bump();
            return Ok(Domain::Bool);
        }
        if self.is_kw("nat") {
            self.bump();
            self.expect_sym("(")?;
            let Tok::Num(n) = self.peek().clone() else {
                return self.err(format!("expected a bound, found {}", self.describe()));
            };
            self.bump();
            self.expect_sym(")")?;
            return Ok(Domain::Nat(n));
        }
        if self.is_kw("map") {
            self.bump();
            let k = self.domain()?;
            self.expect_sym("->")?;
            let v = self.domain()?;
            return Ok(Domain::Map(Box::new(k), Box::new(v)));
        }
        if self.eat_sym("{") {
            let mut labels = Vec::new();
            loop {
                let l = self.ident("a label")?;
                if l.contains('.') {
                    return self.err(format!("label `{l}` contains a dot"));
                }
                labels.push(l);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            return Ok(Domain::Enum(labels));
        }
        self.err(format!("expected a type, found {}", self.describe()))
    }

    /// Tokens of a definition body: everything up to the next declaration.
    fn body_tokens(&mut self) -> Vec<Token> {
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::Eof)
            && !self.is_kw("var")
            && !self.is_kw("pred")
            && !self.is_kw("prog")
        {
            out.push(self.bump());
        }
        out
    }
}

fn positioned(line: usize, col: usize, e: GclError) -> GclError {
    match e {
        GclError::Parse { .. } => e,
        other => GclError::Parse { line, col, message: other.to_string() },
    }
}

/// Parse a `.gcl` model file.
pub fn parse_model(src: &str) -> Result<Model, GclError> {
    let toks = lex(src)?;
    let empty = Model::from_space("", StateSpace::new(Vec::new())?);
    let mut head = Parser::new(toks, &empty);
    head.expect_kw("model")?;
    let name = head.ident("a model name")?;

    let mut vars = Vec::new();
    while head.is_kw("var") {
        head.bump();
        let (line, col) = (head.toks[head.pos].line, head.toks[head.pos].col);
        let path = head.ident("a variable path")?;
        head.expect_sym(":")?;
        let domain = head.domain()?;
        vars.push((line, col, VarDecl { path, domain }));
    }
    let decl_pos = vars.first().map_or((1, 1), |(l, c, _)| (*l, *c));
    let space = StateSpace::new(vars.into_iter().map(|(_, _, v)| v).collect())
        .map_err(|e| positioned(decl_pos.0, decl_pos.1, e))?;
    let mut model = Model::from_space(name, space);
    let mut pos = head.pos;
    let toks = head.toks;

    loop {
        let mut p = Parser::new(toks.clone(), &model);
        p.pos = pos;
        if *p.peek() == Tok::Eof {
            break;
        }
        let at = p.toks[p.pos].clone();
        if p.is_kw("var") {
            return p.err("variables must be declared before predicates and programs");
        }
        let is_pred = p.is_kw("pred");
        if !is_pred && !p.is_kw("prog") {
            return p.err(format!("expected `pred` or `prog`, found {}", p.describe()));
        }
        p.bump();
        let name_tok = p.toks[p.pos].clone();
        let name = p.ident("a name")?;
        if model.space.is_namespace(&name)
            || model.preds.contains_key(&name)
            || model.progs.contains_key(&name)
            || model.macros.contains_key(&name)
        {
            return Err(GclError::Parse {
                line: name_tok.line,
                col: name_tok.col,
                message: format!("`{name}` is already defined"),
            });
        }
        let mut params = Vec::new();
        if !is_pred && p.eat_sym("(") {
            loop {
                params.push(p.ident("a parameter")?);
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym(")")?;
        }
        p.expect_sym("=")?;
        if !params.is_empty() {
            let body = p.body_tokens();
            pos = p.pos;
            model.macros.insert(name, Macro { params, body });
            continue;
        }
        if is_pred {
            let body = p.pred()?;
            Compiler::new(&model.space)
                .relational()
                .pred(&body)
                .map_err(|e| positioned(at.line, at.col, e))?;
            pos = p.pos;
            model.preds.insert(name, body);
        } else {
            let body = p.prog()?;
            Compiler::new(&model.space).prog(&body).map_err(|e| positioned(at.line, at.col, e))?;
            pos = p.pos;
            model.prog_order.push(name.clone());
            model.progs.insert(name, body);
        }
        let p = Parser::new(toks.clone(), &model);
        let mut check = p;
        check.pos = pos;
        if !matches!(check.peek(), Tok::Eof) && !check.is_kw("var") && !check.is_kw("pred") && !check.is_kw("prog") {
            return check.err(format!("unexpected {}", check.describe()));
        }
    }
    Ok(model)
}

/// Parse a predicate against a model's space and definitions.
pub fn parse_pred(model: &Model, src: &str) -> Result<Pred, GclError> {
    let mut p = Parser::new(lex(src)?, model);
    let pred = p.pred()?;
    p.expect_eof()?;
    Ok(pred)
}

/// Parse a program against a model's space and definitions.
pub fn parse_prog(model: &Model, src: &str) -> Result<Prog, GclError> {
    let mut p = Parser::new(lex(src)?, model);
    let prog = p.prog()?;
    p.expect_eof()?;
    Ok(prog)
}

/// Parse an obligation. The model prefix may be omitted when exactly one
/// model is available. Returns the name of the model used.
pub fn parse_obligation(
    models: &BTreeMap<String, Model>,
    name: &str,
    src: &str,
) -> Result<(String, Obligation), GclError> {
    let toks = lex(src)?;
    let prefixed = matches!((&toks[0].tok, toks.get(1).map(|t| &t.tok)), (Tok::Ident(_), Some(Tok::Sym(":"))));
    let (model, skip) = if prefixed {
        let Tok::Ident(m) = &toks[0].tok else { unreachable!() };
        let model = models.get(m).ok_or_else(|| GclError::Parse {
            line: toks[0].line,
            col: toks[0].col,
            message: format!("unknown model `{m}`"),
        })?;
        (model, 2)
    } else {
        let mut it = models.values();
        match (it.next(), it.next()) {
            (Some(m), None) => (m, 0),
            (None, _) => {
                return Err(GclError::Parse { line: 1, col: 1, message: "no model is loaded".into() })
            }
            _ => {
                return Err(GclError::Parse {
                    line: 1,
                    col: 1,
                    message: "several models are loaded; prefix the obligation with `Model:`".into(),
                })
            }
        }
    };
    let mut p = Parser::new(toks, model);
    p.pos = skip;
    let braced = |p: &mut Parser| -> PResult<Pred> {
        p.expect_sym("{")?;
        let q = p.pred()?;
        p.expect_sym("}")?;
        Ok(q)
    };
    let at = p.toks[p.pos].clone();
    let form = if p.is_kw("hoare") {
        p.bump();
        let pre = braced(&mut p)?;
        let prog = p.prog()?;
        let post = braced(&mut p)?;
        ObligationForm::Hoare { pre, prog, post }
    } else if p.is_kw("wp_implies") {
        p.bump();
        let context = braced(&mut p)?;
        let prog = p.prog()?;
        let post = braced(&mut p)?;
        let conclusion = braced(&mut p)?;
        ObligationForm::WpImplies { context, prog, post, conclusion }
    } else {
        return p.err(format!("expected `hoare` or `wp_implies`, found {}", p.describe()));
    };
    p.expect_eof()?;
    let ob = Obligation { name: name.to_string(), space: model.space.clone(), form };
    ob.typecheck().map_err(|e| positioned(at.line, at.col, e))?;
    Ok((model.name.clone(), ob))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r"
model Door
# a tiny door controller
var d.latch : {locked, unlocked}
var d.open : bool
var e.latch : {locked, unlocked}
var e.open : bool
var e.keys : map {alice, bob} -> bool
var t.now : nat(3)

pred Closed = d.latch = locked /\ ~d.open
prog Unlock = d.latch = locked -> d.latch := unlocked
prog tick(op) = frame d in op ; frame t in rel[t.now <= t.now']
prog Step = tick(Unlock) |~| tick(skip)
";

    #[test]
    fn parses_a_model() {
        let m = parse_model(SRC).unwrap();
        assert_eq!(m.name, "Door");
        assert_eq!(m.space.len(), 6);
        assert_eq!(
            m.pred("Closed").unwrap(),
            &Pred::and(vec![Pred::is("d.latch", "locked"), Pred::not(Pred::holds("d.open"))])
        );
        assert_eq!(m.prog_order, vec!["Unlock".to_string(), "Step".to_string()]);
        let step = m.prog("Step").unwrap().to_string();
        assert_eq!(
            step,
            "frame d in (d.latch = locked) -> d.latch := unlocked ; frame t in rel[t.now <= t.now'] \
             |~| frame d in skip ; frame t in rel[t.now <= t.now']"
        );
    }

    #[test]
    fn printed_programs_parse_back() {
        let m = parse_model(SRC).unwrap();
        for name in &m.prog_order {
            let p = m.prog(name).unwrap();
            assert_eq!(&parse_prog(&m, &p.to_string()).unwrap(), p, "{name}");
        }
        let q = parse_pred(&m, "e.keys(bob) => (d.open \\/ t.now <= 2) /\\ d.latch in {locked}").unwrap();
        assert_eq!(parse_pred(&m, &q.to_string()).unwrap(), q);
    }

    #[test]
    fn namespace_equations_expand() {
        let m = parse_model(SRC).unwrap();
        let p = parse_pred(&m, "d' = d").unwrap();
        assert_eq!(
            p,
            Pred::and(vec![
                Pred::Eq(Expr::primed("d.latch"), Expr::var("d.latch")),
                Pred::Eq(Expr::primed("d.open"), Expr::var("d.open")),
            ])
        );
        assert!(parse_pred(&m, "d = t").is_err());
        assert!(parse_pred(&m, "d = e").is_err());
    }

    #[test]
    fn parses_obligations() {
        let m = parse_model(SRC).unwrap();
        let models: BTreeMap<String, Model> = [(m.name.clone(), m)].into();
        let (model, ob) = parse_obligation(&models, "o1", "Door: hoare {Closed} Unlock {~d.open}").unwrap();
        assert_eq!(model, "Door");
        assert!(matches!(ob.form, ObligationForm::Hoare { .. }));
        let (_, ob) = parse_obligation(&models, "o2", "wp_implies {true} Step {d.latch = unlocked} {true}").unwrap();
        assert!(matches!(ob.form, ObligationForm::WpImplies { .. }));
        assert!(parse_obligation(&models, "o3", "Other: hoare {true} skip {true}").is_err());
        assert!(parse_obligation(&models, "o4", "hoare {d.latch = ajar} skip {true}").is_err());
    }

    #[test]
    fn reports_positions() {
        let err = parse_model("model M\nvar x : bool\nprog P = x := ").unwrap_err();
        assert!(matches!(err, GclError::Parse { line: 3, .. }), "{err:?}");
        let err = parse_model("model M\nvar x : bool\npred P = x = $").unwrap_err();
        assert_eq!(err, GclError::Parse { line: 3, col: 14, message: "unexpected character `$`".into() });
        let err = parse_model("model M\nvar x : bool\nprog P = x := red").unwrap_err();
        assert!(matches!(err, GclError::Parse { line: 3, col: 1, .. }), "{err:?}");
    }
}
