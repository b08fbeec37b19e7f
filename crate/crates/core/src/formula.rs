//! The modal language: formulas with group modalities `[G]`, a parser for
//! the ASCII grammar, a minimal-parenthesis printer, and propositional
//! tautology checking with box-rooted subformulas treated as opaque units.
//!
//! ```text
//! formula := iff
//! iff     := imp ( "<->" imp )*            left-assoc
//! imp     := or ( "->" imp )?              right-assoc
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | "[" nat ("," nat)* "]" unary
//!          | "true" | "false" | ident | "(" formula ")"
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// An index in the agent set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonempty finite set of agents, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group(Vec<AgentId>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group must be nonempty")]
    Empty,
    #[error("invalid agent id `{0}`: expected a non-negative integer")]
    BadAgent(String),
}

impl Group {
    pub fn new<I: IntoIterator<Item = AgentId>>(members: I) -> Result<Self, GroupError> {
        let mut v: Vec<AgentId> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(GroupError::Empty);
        }
        Ok(Group(v))
    }

    /// Convenience constructor from raw ids.
    pub fn of(ids: &[u32]) -> Result<Self, GroupError> {
        Self::new(ids.iter().copied().map(AgentId))
    }

    pub fn singleton(agent: AgentId) -> Self {
        Group(vec![agent])
    }

    pub fn members(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    pub fn union(&self, other: &Group) -> Group {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        Group(v)
    }

    /// Members of `self` not in `other`, or `None` when that is empty.
    pub fn difference(&self, other: &Group) -> Option<Group> {
        let v: Vec<AgentId> = self.0.iter().copied().filter(|a| !other.contains(*a)).collect();
        if v.is_empty() {
            None
        } else {
            Some(Group(v))
        }
    }

    pub fn is_disjoint(&self, other: &Group) -> bool {
        self.0.iter().all(|a| !other.contains(*a))
    }

    pub fn is_subset(&self, other: &Group) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Group {
    type Err = GroupError;

    /// Parses a comma-separated list such as `1,2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(GroupError::Empty);
        }
        let ids = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<u32>().map(AgentId).map_err(|_| GroupError::BadAgent(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Group::new(ids)
    }
}

/// A formula of the modal language. `Top`, `And`, `Implies` and `Iff` are
/// sugar over the primitive basis `{Bottom, Atom, Not, Or, Box}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bottom,
    Top,
    Atom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Box(Group, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn boxed(g: Group, body: Formula) -> Self {
        Formula::Box(g, Box::new(body))
    }

    /// Right-nested conjunction `f1 & (f2 & (... & fn))`; `None` for an empty list.
    pub fn conjunction(fs: &[Formula]) -> Option<Formula> {
        let (last, init) = fs.split_last()?;
        Some(init.iter().rev().fold(last.clone(), |acc, f| Formula::and(f.clone(), acc)))
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Rewrites all sugar into the primitive basis.
    pub fn normalize(&self) -> Formula {
        use Formula::*;
        match self {
            Bottom => Bottom,
            Top => Formula::not(Bottom),
            Atom(a) => Atom(a.clone()),
            Not(a) => Formula::not(a.normalize()),
            Or(a, b) => Formula::or(a.normalize(), b.normalize()),
            And(a, b) => Formula::not(Formula::or(Formula::not(a.normalize()), Formula::not(b.normalize()))),
            Implies(a, b) => Formula::or(Formula::not(a.normalize()), b.normalize()),
            Iff(a, b) => {
                let (a, b) = (a.normalize(), b.normalize());
                let ab = Formula::or(Formula::not(a.clone()), b.clone());
                let ba = Formula::or(Formula::not(b), a);
                Formula::not(Formula::or(Formula::not(ab), Formula::not(ba)))
            }
            Box(g, a) => Formula::boxed(g.clone(), a.normalize()),
        }
    }

    pub fn is_primitive(&self) -> bool {
        use Formula::*;
        match self {
            Bottom | Atom(_) => true,
            Top | And(..) | Implies(..) | Iff(..) => false,
            Not(a) | Box(_, a) => a.is_primitive(),
            Or(a, b) => a.is_primitive() && b.is_primitive(),
        }
    }

    /// Maximal box-rooted subformulas plus all atoms outside boxes.
    pub fn boxed_atoms(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_units(&mut out);
        out
    }

    fn collect_units(&self, out: &mut BTreeSet<Formula>) {
        use Formula::*;
        match self {
            Bottom | Top => {}
            Atom(_) | Box(..) => {
                out.insert(self.clone());
            }
            Not(a) => a.collect_units(out),
            Or(a, b) | And(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_units(out);
                b.collect_units(out);
            }
        }
    }

    /// Classical evaluation where each unit (atom or box-rooted subformula)
    /// gets its value from `unit`.
    pub fn eval_propositional<F: Fn(&Formula) -> bool + Copy>(&self, unit: F) -> bool {
        use Formula::*;
        match self {
            Bottom => false,
            Top => true,
            Atom(_) | Box(..) => unit(self),
            Not(a) => !a.eval_propositional(unit),
            Or(a, b) => a.eval_propositional(unit) || b.eval_propositional(unit),
            And(a, b) => a.eval_propositional(unit) && b.eval_propositional(unit),
            Implies(a, b) => !a.eval_propositional(unit) || b.eval_propositional(unit),
            Iff(a, b) => a.eval_propositional(unit) == b.eval_propositional(unit),
        }
    }

    /// True iff the formula holds under every truth assignment to its
    /// `boxed_atoms`. Exponential in the number of units.
    pub fn is_propositional_tautology(&self) -> bool {
        let units: Vec<Formula> = self.boxed_atoms().into_iter().collect();
        assert!(units.len() < 32, "too many propositional units for truth-table check");
        (0u64..(1u64 << units.len())).all(|assignment| {
            self.eval_propositional(|u| {
                let k = units.binary_search(u).expect("unit collected above");
                assignment >> k & 1 == 1
            })
        })
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            Bottom | Top | Atom(_) => 1,
            Not(a) | Box(_, a) => 1 + a.size(),
            Or(a, b) | And(a, b) | Implies(a, b) | Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// All atom names occurring anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Atom(a) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    /// All groups indexing a box anywhere in the formula.
    pub fn groups(&self) -> BTreeSet<Group> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Box(g, _) = f {
                out.insert(g.clone());
            }
        });
        out
    }

    fn walk(&self, visit: &mut dyn FnMut(&Formula)) {
        use Formula::*;
        visit(self);
        match self {
            Bottom | Top | Atom(_) => {}
            Not(a) | Box(_, a) => a.walk(visit),
            Or(a, b) | And(a, b) | Implies(a, b) | Iff(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }

    fn precedence(&self) -> u8 {
        use Formula::*;
        match self {
            Iff(..) => 1,
            Implies(..) => 2,
            Or(..) => 3,
            And(..) => 4,
            _ => 5,
        }
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            Bottom => f.write_str("false"),
            Top => f.write_str("true"),
            Atom(a) => f.write_str(a),
            Not(a) => {
                f.write_str("~")?;
                write_at(f, a, 5)
            }
            Box(g, a) => {
                write!(f, "[{g}]")?;
                write_at(f, a, 5)
            }
            // left-assoc: left child may share the level, right child may not
            Iff(a, b) => {
                write_at(f, a, 1)?;
                f.write_str(" <-> ")?;
                write_at(f, b, 2)
            }
            // right-assoc
            Implies(a, b) => {
                write_at(f, a, 3)?;
                f.write_str(" -> ")?;
                write_at(f, b, 2)
            }
            Or(a, b) => {
                write_at(f, a, 3)?;
                f.write_str(" | ")?;
                write_at(f, b, 4)
            }
            And(a, b) => {
                write_at(f, a, 4)?;
                f.write_str(" & ")?;
                write_at(f, b, 5)
            }
        }
    }
}

/// Syntax error with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    Or,
    And,
    Arrow,
    DoubleArrow,
    LBracket,
    RBracket,
    Comma,
    LParen,
    RParen,
    True,
    False,
    Ident(String),
    Number(String),
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Not => "`~`",
            Tok::Or => "`|`",
            Tok::And => "`&`",
            Tok::Arrow => "`->`",
            Tok::DoubleArrow => "`<->`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Minus => "`-`",
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Number(s) => return write!(f, "number `{s}`"),
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => Tok::Not,
            b'|' => Tok::Or,
            b'&' => Tok::And,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'-' => Tok::Minus,
            b'<' if text[i..].starts_with("<->") => {
                i += 2;
                Tok::DoubleArrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric() {
                    i += 1;
                }
                Tok::Number(text[start..=i].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    s => Tok::Ident(s.to_string()),
                }
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError { pos: i, message: format!("unexpected character `{ch}`") });
            }
        };
        toks.push((start, tok));
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.offset(), message: message.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            return Ok(());
        }
        match self.peek() {
            Some(found) => self.error(format!("expected {t}, found {found}")),
            None => self.error(format!("expected {t}, found end of input")),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn agent(&mut self) -> Result<AgentId, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => match n.parse::<u32>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(AgentId(v))
                }
                Err(_) => self.error(format!("agent id `{n}` is not a non-negative integer")),
            },
            Some(Tok::RBracket) => self.error("empty group `[]`"),
            Some(t) => self.error(format!("agent id must be a non-negative integer, found {t}")),
            None => self.error("unterminated group"),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        match tok {
            Tok::Not => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Tok::LBracket => {
                self.pos += 1;
                let mut members = vec![self.agent()?];
                while self.eat(&Tok::Comma) {
                    members.push(self.agent()?);
                }
                self.expect(Tok::RBracket)?;
                let group = Group::new(members).expect("at least one member parsed");
                Ok(Formula::boxed(group, self.unary()?))
            }
            Tok::True => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Tok::False => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => self.error(format!("unexpected {other}")),
        }
    }
}

/// Parses a formula in the ASCII grammar.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.iff()?;
    if let Some(t) = p.peek() {
        return p.error(format!("unexpected trailing {t}"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
