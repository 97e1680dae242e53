//! Finite, hierarchically named state spaces.
//!
//! Variables are addressed by dotted paths (`rw.ctrl.latch`). A dotted prefix
//! such as `rw` or `rw.ctrl` names a namespace: the set of variables whose path
//! equals the prefix or continues it with a `.`.
//!
//! States are dense vectors of per-variable codes. For `Bool` the code is 0/1,
//! for `Enum` the label index, for `Nat` the number itself and for `Map` a
//! mixed-radix encoding of the value vector (key index 0 is least significant).

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::Lit;
use crate::GclError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Enum(Vec<String>),
    /// `0..=max`
    Nat(u32),
    /// Total function from a finite key domain to a finite value domain.
    /// Both sides are restricted to `Bool` or `Enum`.
    Map(Box<Domain>, Box<Domain>),
}

impl Domain {
    pub fn size(&self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::Enum(labels) => labels.len() as u64,
            Domain::Nat(max) => u64::from(*max) + 1,
            Domain::Map(k, v) => {
                let k = k.size();
                let v = v.size();
                let mut acc: u64 = 1;
                for _ in 0..k {
                    acc = acc.saturating_mul(v);
                }
                acc
            }
        }
    }

    fn validate(&self, path: &str) -> Result<(), GclError> {
        match self {
            Domain::Bool | Domain::Nat(_) => Ok(()),
            Domain::Enum(labels) => {
                if labels.is_empty() {
                    return Err(GclError::Space(format!("`{path}` has an empty enumeration")));
                }
                for (i, l) in labels.iter().enumerate() {
                    if labels[..i].contains(l) {
                        return Err(GclError::Space(format!(
                            "`{path}` repeats the label `{l}`"
                        )));
                    }
                }
                Ok(())
            }
            Domain::Map(k, v) => {
                for side in [k.as_ref(), v.as_ref()] {
                    if !matches!(side, Domain::Bool | Domain::Enum(_)) {
                        return Err(GclError::Space(format!(
                            "`{path}`: map keys and values must be bool or enumerations"
                        )));
                    }
                    side.validate(path)?;
                }
                if self.size() > u64::from(u32::MAX) {
                    return Err(GclError::Space(format!("`{path}`: map domain too large")));
                }
                Ok(())
            }
        }
    }

    /// Literal denoting the value with the given code.
    pub fn literal(&self, code: u32) -> Lit {
        match self {
            Domain::Bool => Lit::Bool(code != 0),
            Domain::Enum(labels) => Lit::Label(labels[code as usize].clone()),
            Domain::Nat(_) => Lit::Nat(code),
            Domain::Map(k, v) => {
                let vc = v.size() as u32;
                let mut rest = code;
                let mut entries = Vec::new();
                for key in 0..k.size() as u32 {
                    entries.push((k.literal(key), v.literal(rest % vc)));
                    rest /= vc;
                }
                Lit::Map(entries)
            }
        }
    }

    /// Code of a literal in this domain, if the literal inhabits it.
    pub fn code_of(&self, lit: &Lit) -> Option<u32> {
        match (self, lit) {
            (Domain::Bool, Lit::Bool(b)) => Some(u32::from(*b)),
            (Domain::Enum(labels), Lit::Label(l)) => {
                labels.iter().position(|x| x == l).map(|i| i as u32)
            }
            (Domain::Nat(max), Lit::Nat(n)) if n <= max => Some(*n),
            (Domain::Map(k, v), Lit::Map(entries)) => {
                let kc = k.size() as usize;
                let vc = v.size() as u32;
                let mut slots: Vec<Option<u32>> = vec![None; kc];
                for (key, val) in entries {
                    let ki = k.code_of(key)? as usize;
                    if slots[ki].is_some() {
                        return None;
                    }
                    slots[ki] = Some(v.code_of(val)?);
                }
                let mut code = 0u32;
                for slot in slots.iter().rev() {
                    code = code * vc + (*slot)?;
                }
                Some(code)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => write!(f, "bool"),
            Domain::Nat(max) => write!(f, "nat({max})"),
            Domain::Enum(labels) => write!(f, "{{{}}}", labels.join(", ")),
            Domain::Map(k, v) => write!(f, "map {k} -> {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub path: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    vars: Vec<VarDecl>,
    index: BTreeMap<String, usize>,
}

impl StateSpace {
    pub fn new(vars: Vec<VarDecl>) -> Result<Self, GclError> {
        let mut index = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            if !valid_path(&v.path) {
                return Err(GclError::Space(format!("`{}` is not a valid path", v.path)));
            }
            v.domain.validate(&v.path)?;
            if index.insert(v.path.clone(), i).is_some() {
                return Err(GclError::Space(format!("duplicate variable `{}`", v.path)));
            }
        }
        // a variable may not double as a namespace of another variable
        for v in &vars {
            let prefix = format!("{}.", v.path);
            if let Some(other) = vars.iter().find(|o| o.path.starts_with(&prefix)) {
                return Err(GclError::Space(format!(
                    "`{}` is both a variable and the namespace of `{}`",
                    v.path, other.path
                )));
            }
        }
        Ok(StateSpace { vars, index })
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, path: &str) -> Option<usize> {
        self.index.get(path).copied()
    }

    pub fn var(&self, path: &str) -> Option<&VarDecl> {
        self.index_of(path).map(|i| &self.vars[i])
    }

    pub fn domain(&self, idx: usize) -> &Domain {
        &self.vars[idx].domain
    }

    /// Indices of the variables under `ns`, in declaration order.
    pub fn namespace(&self, ns: &str) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| in_namespace(&v.path, ns))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_namespace(&self, ns: &str) -> bool {
        self.vars.iter().any(|v| in_namespace(&v.path, ns))
    }

    /// Number of states, or `None` on overflow.
    pub fn state_count(&self) -> Option<u64> {
        self.vars
            .iter()
            .try_fold(1u64, |acc, v| acc.checked_mul(v.domain.size()))
    }

    /// The first state in enumeration order (every code zero).
    pub fn first_state(&self) -> State {
        State(vec![0; self.vars.len()])
    }

    pub fn state_from_literals(&self, values: &[(&str, Lit)]) -> Result<State, GclError> {
        let mut st = self.first_state();
        for (path, lit) in values {
            let idx = self
                .index_of(path)
                .ok_or_else(|| GclError::Type(format!("unknown variable `{path}`")))?;
            let code = self.domain(idx).code_of(lit).ok_or_else(|| {
                GclError::Type(format!("`{lit}` is not a value of `{path}`"))
            })?;
            st.0[idx] = code;
        }
        Ok(st)
    }

    /// Iterate every state in lexicographic code order, first variable most
    /// significant.
    pub fn states(&self) -> StateIter<'_> {
        StateIter {
            radices: self.vars.iter().map(|v| v.domain.size() as u32).collect(),
            next: if self.vars.iter().any(|v| v.domain.size() == 0) {
                None
            } else {
                Some(vec![0; self.vars.len()])
            },
            _space: self,
        }
    }
}

pub struct StateIter<'a> {
    radices: Vec<u32>,
    next: Option<Vec<u32>>,
    _space: &'a StateSpace,
}

impl Iterator for StateIter<'_> {
    type Item = State;

    fn next(&mut self) -> Option<State> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        let mut done = true;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.radices[i] {
                done = false;
                break;
            }
            succ[i] = 0;
        }
        if !done {
            self.next = Some(succ);
        }
        Some(State(cur))
    }
}

pub(crate) fn in_namespace(path: &str, ns: &str) -> bool {
    path == ns || (path.len() > ns.len() && path.starts_with(ns) && path.as_bytes()[ns.len()] == b'.')
}

pub(crate) fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn valid_path(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(valid_ident)
}

/// A total assignment of codes to the variables of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<u32>);

impl State {
    pub fn get(&self, idx: usize) -> u32 {
        self.0[idx]
    }

    pub fn value(&self, space: &StateSpace, path: &str) -> Option<Lit> {
        let idx = space.index_of(path)?;
        Some(space.domain(idx).literal(self.0[idx]))
    }

    /// `path = value` lines sorted by path.
    pub fn render(&self, space: &StateSpace) -> String {
        let mut lines: Vec<(String, String)> = space
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.path.clone(), v.domain.literal(self.0[i]).to_string()))
            .collect();
        lines.sort();
        lines
            .into_iter()
            .map(|(p, v)| format!("{p} = {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
