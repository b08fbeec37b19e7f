//! Axiom schemas as data: templates over group and formula metavariables,
//! instantiation, and purely structural recognition of instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::LogicError;
use crate::formula::{AgentId, Formula, Group};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemaId {
    /// `([G]φ & [H]ψ) -> [G∪H](φ & ψ)` for disjoint `G`, `H`
    B1,
    /// `[G∪H]true -> [G]true`
    B2,
    /// `([G]φ & [G∪H∪J]φ) -> [G∪H]φ`
    B3,
    /// `([G]φ & [H](φ | ψ)) -> [G∪H]φ`
    B4,
    /// `[i]true`
    Nec(AgentId),
    /// `~[i]true`
    Conec(AgentId),
    /// `~[i]false`
    P(AgentId),
    /// `[i]false`
    Cop(AgentId),
    /// `~[G]false`
    PG,
    /// `[G]φ -> φ`
    TG,
    /// `[i]φ -> ~[i]~φ`
    DI(AgentId),
    /// `[G]φ -> [G](φ | ψ)`
    RMG,
    /// `([G]φ & [H]ψ) -> [G∪H](φ & ψ)`, any `G`, `H`
    CG,
    /// `[G]φ -> [G∪H]φ`
    SA,
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaId::B1 => f.write_str("B1"),
            SchemaId::B2 => f.write_str("B2"),
            SchemaId::B3 => f.write_str("B3"),
            SchemaId::B4 => f.write_str("B4"),
            SchemaId::Nec(i) => write!(f, "NEC:{i}"),
            SchemaId::Conec(i) => write!(f, "CONEC:{i}"),
            SchemaId::P(i) => write!(f, "P:{i}"),
            SchemaId::Cop(i) => write!(f, "COP:{i}"),
            SchemaId::PG => f.write_str("PG"),
            SchemaId::TG => f.write_str("TG"),
            SchemaId::DI(i) => write!(f, "DI:{i}"),
            SchemaId::RMG => f.write_str("RMG"),
            SchemaId::CG => f.write_str("CG"),
            SchemaId::SA => f.write_str("SA"),
        }
    }
}

impl FromStr for SchemaId {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || LogicError::UnknownSchema(s.to_string());
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a.trim())),
            None => (lower.as_str(), None),
        };
        let agent = |a: Option<&str>| -> Result<AgentId, LogicError> {
            a.and_then(|a| a.parse::<u32>().ok()).map(AgentId).ok_or_else(unknown)
        };
        Ok(match name {
            "b1" if arg.is_none() => SchemaId::B1,
            "b2" if arg.is_none() => SchemaId::B2,
            "b3" if arg.is_none() => SchemaId::B3,
            "b4" if arg.is_none() => SchemaId::B4,
            "pg" if arg.is_none() => SchemaId::PG,
            "tg" | "t" if arg.is_none() => SchemaId::TG,
            "rmg" | "rm" if arg.is_none() => SchemaId::RMG,
            "cg" | "c" if arg.is_none() => SchemaId::CG,
            "sa" if arg.is_none() => SchemaId::SA,
            "nec" => SchemaId::Nec(agent(arg)?),
            "conec" => SchemaId::Conec(agent(arg)?),
            "p" => SchemaId::P(agent(arg)?),
            "cop" => SchemaId::Cop(agent(arg)?),
            "di" | "d" => SchemaId::DI(agent(arg)?),
            _ => return Err(unknown()),
        })
    }
}

/// Group metavariables of the schemas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupVar {
    G,
    H,
    J,
}

/// Formula (or, semantically, world-set) metavariables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetVar {
    Phi,
    Psi,
}

impl fmt::Display for GroupVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupVar::G => "G",
            GroupVar::H => "H",
            GroupVar::J => "J",
        })
    }
}

impl fmt::Display for SetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetVar::Phi => "phi",
            SetVar::Psi => "psi",
        })
    }
}

impl FromStr for GroupVar {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "G" | "g" => Ok(GroupVar::G),
            "H" | "h" => Ok(GroupVar::H),
            "J" | "j" => Ok(GroupVar::J),
            _ => Err(LogicError::UnknownMetavariable(s.to_string())),
        }
    }
}

impl FromStr for SetVar {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phi" | "φ" => Ok(SetVar::Phi),
            "psi" | "ψ" => Ok(SetVar::Psi),
            _ => Err(LogicError::UnknownMetavariable(s.to_string())),
        }
    }
}

/// Values for the metavariables of a schema: formulas when instantiating
/// syntactically, world sets when checking on a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding<T> {
    pub groups: BTreeMap<GroupVar, Group>,
    pub values: BTreeMap<SetVar, T>,
}

impl<T> Default for Binding<T> {
    fn default() -> Self {
        Binding { groups: BTreeMap::new(), values: BTreeMap::new() }
    }
}

impl<T> Binding<T> {
    pub fn group(mut self, v: GroupVar, g: Group) -> Self {
        self.groups.insert(v, g);
        self
    }

    pub fn value(mut self, v: SetVar, x: T) -> Self {
        self.values.insert(v, x);
        self
    }
}

pub type SyntacticBinding = Binding<Formula>;

impl fmt::Display for SyntacticBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|(v, g)| format!("{v}={{{g}}}"))
            .chain(self.values.iter().map(|(v, x)| format!("{v}={x}")))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum GroupTerm {
    Var(GroupVar),
    Fixed(Group),
    Union(Vec<GroupVar>),
}

/// Schema skeleton. Box bodies never contain boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Template {
    Bottom,
    Top,
    Var(SetVar),
    Not(Box<Template>),
    Or(Box<Template>, Box<Template>),
    And(Box<Template>, Box<Template>),
    Implies(Box<Template>, Box<Template>),
    Box(GroupTerm, Box<Template>),
}

mod build {
    use super::{GroupTerm, GroupVar, SetVar, Template};
    use crate::formula::{AgentId, Group};

    pub fn var(v: SetVar) -> Template {
        Template::Var(v)
    }
    pub fn not(a: Template) -> Template {
        Template::Not(Box::new(a))
    }
    pub fn or(a: Template, b: Template) -> Template {
        Template::Or(Box::new(a), Box::new(b))
    }
    pub fn and(a: Template, b: Template) -> Template {
        Template::And(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Template, b: Template) -> Template {
        Template::Implies(Box::new(a), Box::new(b))
    }
    pub fn bx(g: GroupVar, a: Template) -> Template {
        Template::Box(GroupTerm::Var(g), Box::new(a))
    }
    pub fn bx_union(gs: &[GroupVar], a: Template) -> Template {
        Template::Box(GroupTerm::Union(gs.to_vec()), Box::new(a))
    }
    pub fn bx_agent(i: AgentId, a: Template) -> Template {
        Template::Box(GroupTerm::Fixed(Group::singleton(i)), Box::new(a))
    }
}

impl SchemaId {
    pub(crate) fn template(&self) -> Template {
        use build::*;
        use GroupVar::{G, H, J};
        use SetVar::{Phi, Psi};
        match *self {
            SchemaId::B1 | SchemaId::CG => {
                imp(and(bx(G, var(Phi)), bx(H, var(Psi))), bx_union(&[G, H], and(var(Phi), var(Psi))))
            }
            SchemaId::B2 => imp(bx_union(&[G, H], Template::Top), bx(G, Template::Top)),
            SchemaId::B3 => imp(and(bx(G, var(Phi)), bx_union(&[G, H, J], var(Phi))), bx_union(&[G, H], var(Phi))),
            SchemaId::B4 => imp(and(bx(G, var(Phi)), bx(H, or(var(Phi), var(Psi)))), bx_union(&[G, H], var(Phi))),
            SchemaId::Nec(i) => bx_agent(i, Template::Top),
            SchemaId::Conec(i) => not(bx_agent(i, Template::Top)),
            SchemaId::P(i) => not(bx_agent(i, Template::Bottom)),
            SchemaId::Cop(i) => bx_agent(i, Template::Bottom),
            SchemaId::PG => not(bx(G, Template::Bottom)),
            SchemaId::TG => imp(bx(G, var(Phi)), var(Phi)),
            SchemaId::DI(i) => imp(bx_agent(i, var(Phi)), not(bx_agent(i, not(var(Phi))))),
            SchemaId::RMG => imp(bx(G, var(Phi)), bx(G, or(var(Phi), var(Psi)))),
            SchemaId::SA => imp(bx(G, var(Phi)), bx_union(&[G, H], var(Phi))),
        }
    }

    pub fn group_vars(&self) -> &'static [GroupVar] {
        match self {
            SchemaId::B1 | SchemaId::B2 | SchemaId::B4 | SchemaId::CG | SchemaId::SA => &[GroupVar::G, GroupVar::H],
            SchemaId::B3 => &[GroupVar::G, GroupVar::H, GroupVar::J],
            SchemaId::PG | SchemaId::TG | SchemaId::RMG => &[GroupVar::G],
            SchemaId::Nec(_) | SchemaId::Conec(_) | SchemaId::P(_) | SchemaId::Cop(_) | SchemaId::DI(_) => &[],
        }
    }

    pub fn set_vars(&self) -> &'static [SetVar] {
        match self {
            SchemaId::B1 | SchemaId::B4 | SchemaId::CG | SchemaId::RMG => &[SetVar::Phi, SetVar::Psi],
            SchemaId::B3 | SchemaId::TG | SchemaId::DI(_) | SchemaId::SA => &[SetVar::Phi],
            _ => &[],
        }
    }

    /// Only B1 carries a side condition: `G ∩ H = ∅`.
    pub fn requires_disjoint(&self) -> bool {
        matches!(self, SchemaId::B1)
    }

    /// The schema with every metavariable replaced by a placeholder, e.g.
    /// `[G]phi -> phi`.
    pub fn shape(&self) -> String {
        fn go(t: &Template) -> String {
            match t {
                Template::Bottom => "false".into(),
                Template::Top => "true".into(),
                Template::Var(v) => v.to_string(),
                Template::Not(a) => format!("~{}", go(a)),
                Template::Or(a, b) => format!("({} | {})", go(a), go(b)),
                Template::And(a, b) => format!("({} & {})", go(a), go(b)),
                Template::Implies(a, b) => format!("({} -> {})", go(a), go(b)),
                Template::Box(g, a) => {
                    let g = match g {
                        GroupTerm::Var(v) => v.to_string(),
                        GroupTerm::Fixed(g) => g.to_string(),
                        GroupTerm::Union(vs) => vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("∪"),
                    };
                    format!("[{g}]{}", go(a))
                }
            }
        }
        let s = go(&self.template());
        match s.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            Some(inner) if matches!(self.template(), Template::Implies(..)) => inner.to_string(),
            _ => s,
        }
    }
}

pub(crate) fn resolve_group(term: &GroupTerm, groups: &BTreeMap<GroupVar, Group>) -> Option<Group> {
    match term {
        GroupTerm::Fixed(g) => Some(g.clone()),
        GroupTerm::Var(v) => groups.get(v).cloned(),
        GroupTerm::Union(vs) => {
            let mut it = vs.iter().map(|v| groups.get(v));
            let first = it.next()??.clone();
            it.try_fold(first, |acc, g| Some(acc.union(g?)))
        }
    }
}

/// Substitutes a binding into a schema.
pub fn instantiate_schema(s: SchemaId, b: &SyntacticBinding) -> Result<Formula, LogicError> {
    for v in s.group_vars() {
        if !b.groups.contains_key(v) {
            return Err(LogicError::MissingMetavariable(v.to_string()));
        }
    }
    for v in s.set_vars() {
        if !b.values.contains_key(v) {
            return Err(LogicError::MissingMetavariable(v.to_string()));
        }
    }
    if s.requires_disjoint() {
        let (g, h) = (&b.groups[&GroupVar::G], &b.groups[&GroupVar::H]);
        if !g.is_disjoint(h) {
            return Err(LogicError::DisjointnessViolated { g: g.clone(), h: h.clone() });
        }
    }
    fn go(t: &Template, b: &SyntacticBinding) -> Formula {
        match t {
            Template::Bottom => Formula::Bottom,
            Template::Top => Formula::Top,
            Template::Var(v) => b.values[v].clone(),
            Template::Not(a) => Formula::not(go(a, b)),
            Template::Or(x, y) => Formula::or(go(x, b), go(y, b)),
            Template::And(x, y) => Formula::and(go(x, b), go(y, b)),
            Template::Implies(x, y) => Formula::implies(go(x, b), go(y, b)),
            Template::Box(g, a) => Formula::boxed(resolve_group(g, &b.groups).expect("checked above"), go(a, b)),
        }
    }
    Ok(go(&s.template(), b))
}

#[derive(Default)]
struct Matcher {
    binding: SyntacticBinding,
    unions: Vec<(Vec<GroupVar>, Group)>,
}

impl Matcher {
    fn matches(&mut self, t: &Template, f: &Formula) -> bool {
        match (t, f) {
            (Template::Bottom, Formula::Bottom) | (Template::Top, Formula::Top) => true,
            (Template::Var(v), _) => match self.binding.values.get(v) {
                Some(bound) => bound == f,
                None => {
                    self.binding.values.insert(*v, f.clone());
                    true
                }
            },
            (Template::Not(a), Formula::Not(fa)) => self.matches(a, fa),
            (Template::Or(a, b), Formula::Or(fa, fb))
            | (Template::And(a, b), Formula::And(fa, fb))
            | (Template::Implies(a, b), Formula::Implies(fa, fb)) => self.matches(a, fa) && self.matches(b, fb),
            (Template::Box(term, a), Formula::Box(g, fa)) => {
                let ok = match term {
                    GroupTerm::Fixed(h) => h == g,
                    GroupTerm::Var(v) => match self.binding.groups.get(v) {
                        Some(bound) => bound == g,
                        None => {
                            self.binding.groups.insert(*v, g.clone());
                            true
                        }
                    },
                    GroupTerm::Union(vs) => {
                        self.unions.push((vs.clone(), g.clone()));
                        true
                    }
                };
                ok && self.matches(a, fa)
            }
            _ => false,
        }
    }

    /// Binds group variables that only occur inside unions. For `U ∪ X = K`
    /// with `U` known, `X` becomes `K ∖ U`, or `K` itself when that is empty.
    fn solve_unions(&mut self) -> bool {
        let mut pending = std::mem::take(&mut self.unions);
        while !pending.is_empty() {
            let before = pending.len();
            let mut rest = Vec::new();
            for (vs, k) in pending {
                let unbound: Vec<GroupVar> =
                    vs.iter().copied().filter(|v| !self.binding.groups.contains_key(v)).collect();
                let bound = vs
                    .iter()
                    .filter_map(|v| self.binding.groups.get(v))
                    .fold(None::<Group>, |acc, g| Some(acc.map_or_else(|| g.clone(), |a| a.union(g))));
                match unbound.len() {
                    0 => {
                        if bound.as_ref() != Some(&k) {
                            return false;
                        }
                    }
                    1 => {
                        let x = match &bound {
                            Some(u) if !u.is_subset(&k) => return false,
                            Some(u) => k.difference(u).unwrap_or_else(|| k.clone()),
                            None => k.clone(),
                        };
                        self.binding.groups.insert(unbound[0], x);
                    }
                    _ => rest.push((vs, k)),
                }
            }
            if rest.len() == before {
                return false;
            }
            pending = rest;
        }
        true
    }
}

/// Structural recognition of `f` as an instance of `s` (no matching modulo
/// associativity or commutativity).
pub fn match_schema(s: SchemaId, f: &Formula) -> Option<SyntacticBinding> {
    let mut m = Matcher::default();
    if !m.matches(&s.template(), f) || !m.solve_unions() {
        return None;
    }
    match instantiate_schema(s, &m.binding) {
        Ok(g) if &g == f => Some(m.binding),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn g(ids: &[u32]) -> Group {
        Group::of(ids).unwrap()
    }

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn schema_names_round_trip() {
        for s in ["B1", "B2", "B3", "B4", "NEC:2", "CONEC:1", "P:3", "COP:1", "PG", "TG", "DI:1", "RMG", "CG", "SA"] {
            assert_eq!(s.parse::<SchemaId>().unwrap().to_string(), s);
        }
        assert_eq!("nec:2".parse::<SchemaId>().unwrap(), SchemaId::Nec(AgentId(2)));
        assert!("nec".parse::<SchemaId>().is_err());
        assert!("b5".parse::<SchemaId>().is_err());
        assert!("b1:2".parse::<SchemaId>().is_err());
    }

    #[test]
    fn instantiates_b1() {
        let b = SyntacticBinding::default()
            .group(GroupVar::G, g(&[1]))
            .group(GroupVar::H, g(&[2]))
            .value(SetVar::Phi, p("p"))
            .value(SetVar::Psi, p("q"));
        assert_eq!(instantiate_schema(SchemaId::B1, &b).unwrap(), p("([1]p & [2]q) -> [1,2](p & q)"));
    }

    #[test]
    fn instantiates_b2_and_sa() {
        let b = SyntacticBinding::default().group(GroupVar::G, g(&[1])).group(GroupVar::H, g(&[2]));
        assert_eq!(instantiate_schema(SchemaId::B2, &b).unwrap(), p("[1,2]true -> [1]true"));
        let sa = SyntacticBinding::default()
            .group(GroupVar::G, g(&[1]))
            .group(GroupVar::H, g(&[1]))
            .value(SetVar::Phi, p("p"));
        assert_eq!(instantiate_schema(SchemaId::SA, &sa).unwrap(), p("[1]p -> [1]p"));
    }

    #[test]
    fn b1_requires_disjoint_groups() {
        let b = SyntacticBinding::default()
            .group(GroupVar::G, g(&[1]))
            .group(GroupVar::H, g(&[1]))
            .value(SetVar::Phi, p("p"))
            .value(SetVar::Psi, p("q"));
        assert!(matches!(instantiate_schema(SchemaId::B1, &b), Err(LogicError::DisjointnessViolated { .. })));
        assert!(instantiate_schema(SchemaId::CG, &b).is_ok());
    }

    #[test]
    fn missing_metavariable() {
        let b = SyntacticBinding::default().group(GroupVar::G, g(&[1]));
        assert_eq!(instantiate_schema(SchemaId::B2, &b), Err(LogicError::MissingMetavariable("H".into())));
        let b = b.group(GroupVar::H, g(&[2]));
        assert_eq!(instantiate_schema(SchemaId::B4, &b), Err(LogicError::MissingMetavariable("phi".into())));
    }

    #[test]
    fn recognizes_instances() {
        let b1 = match_schema(SchemaId::B1, &p("([1]p & [2]q) -> [1,2](p & q)")).unwrap();
        assert_eq!(b1.groups[&GroupVar::G], g(&[1]));
        assert_eq!(b1.groups[&GroupVar::H], g(&[2]));
        assert_eq!(b1.values[&SetVar::Psi], p("q"));
        assert!(match_schema(SchemaId::B1, &p("([1]p & [1]q) -> [1](p & q)")).is_none());
        assert!(match_schema(SchemaId::CG, &p("([1]p & [1]q) -> [1](p & q)")).is_some());
        assert!(match_schema(SchemaId::TG, &p("[1]p -> p")).is_some());
        assert!(match_schema(SchemaId::TG, &p("[1]p -> q")).is_none());
        // no commutativity
        assert!(match_schema(SchemaId::B1, &p("([1]p & [2]q) -> [1,2](q & p)")).is_none());
        // wrong union
        assert!(match_schema(SchemaId::B1, &p("([1]p & [2]q) -> [1,3](p & q)")).is_none());
    }

    #[test]
    fn recognizes_union_only_variables() {
        let b2 = match_schema(SchemaId::B2, &p("[1,2]true -> [1]true")).unwrap();
        assert_eq!(b2.groups[&GroupVar::H], g(&[2]));
        assert!(match_schema(SchemaId::B2, &p("[1]true -> [1]true")).is_some());
        assert!(match_schema(SchemaId::B2, &p("[2]true -> [1]true")).is_none());
        let b3 = match_schema(SchemaId::B3, &p("([1]p & [1,2,3]p) -> [1,2]p")).unwrap();
        assert_eq!(b3.groups[&GroupVar::J], g(&[3]));
        assert!(match_schema(SchemaId::B3, &p("([1]p & [1,2]p) -> [1,2,3]p")).is_none());
        assert!(match_schema(SchemaId::SA, &p("[1]p -> [1,2]p")).is_some());
        assert!(match_schema(SchemaId::SA, &p("[1,2]p -> [1]p")).is_none());
    }

    #[test]
    fn fixed_agent_schemas() {
        assert!(match_schema(SchemaId::Nec(AgentId(2)), &p("[2]true")).is_some());
        assert!(match_schema(SchemaId::Nec(AgentId(1)), &p("[2]true")).is_none());
        assert!(match_schema(SchemaId::DI(AgentId(1)), &p("[1]p -> ~[1]~p")).is_some());
        assert!(match_schema(SchemaId::P(AgentId(1)), &p("~[1]false")).is_some());
        assert!(match_schema(SchemaId::PG, &p("~[1,2]false")).is_some());
    }

    #[test]
    fn shapes() {
        assert_eq!(SchemaId::TG.shape(), "[G]phi -> phi");
        assert_eq!(SchemaId::B2.shape(), "[G∪H]true -> [G]true");
        assert_eq!(SchemaId::Nec(AgentId(1)).shape(), "[1]true");
    }
}
