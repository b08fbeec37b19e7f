//! Validity of a schema on one finite model: metavariables range over world
//! sets and over a pool of groups, and the schema's boolean skeleton is
//! evaluated with neighbourhood membership tests.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::schema::{GroupTerm, Template};
use super::{Binding, GroupVar, LogicError, SchemaId, SetVar};
use crate::formula::Group;
use crate::model::{Evaluator, Family, Model, World, WorldSet};

/// Largest domain for which every subset is tried.
pub const MAX_ALL_SUBSETS_WORLDS: usize = 6;

pub type SemanticBinding = Binding<WorldSet>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetRange {
    /// Every subset of `W`.
    AllSubsets,
    /// Only truth sets of formulas over the pool.
    Definable,
}

impl fmt::Display for SetRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetRange::AllSubsets => "all-subsets",
            SetRange::Definable => "definable",
        })
    }
}

impl FromStr for SetRange {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-subsets" | "all" => Ok(SetRange::AllSubsets),
            "definable" | "definable-only" => Ok(SetRange::Definable),
            _ => Err(LogicError::UnknownRange(s.to_string())),
        }
    }
}

/// A world together with metavariable values falsifying the schema there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticWitness {
    pub world: World,
    pub binding: SemanticBinding,
}

impl SemanticWitness {
    pub fn describe(&self, m: &Model) -> String {
        let mut parts = vec![format!("world {}", m.label(self.world))];
        parts.extend(self.binding.groups.iter().map(|(v, g)| format!("{v}={{{g}}}")));
        parts.extend(self.binding.values.iter().map(|(v, x)| format!("{v}={}", m.format_set(x))));
        parts.join(", ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaVerdict {
    pub counterexample: Option<SemanticWitness>,
    /// In definable mode only: a counterexample that exists once sets range
    /// over all of `℘(W)`, although none exists over definable sets.
    pub all_subsets_counterexample: Option<SemanticWitness>,
}

impl SchemaVerdict {
    pub fn is_valid(&self) -> bool {
        self.counterexample.is_none()
    }
}

enum Node {
    Bottom,
    Top,
    Var(usize),
    Not(Box<Node>),
    Or(Box<Node>, Box<Node>),
    And(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Box(usize, Box<Node>),
}

fn var_index(v: SetVar) -> usize {
    match v {
        SetVar::Phi => 0,
        SetVar::Psi => 1,
    }
}

fn compile(t: &Template, boxes: &mut Vec<GroupTerm>) -> Node {
    let pair = |a: &Template, b: &Template, boxes: &mut Vec<GroupTerm>| {
        let a = Box::new(compile(a, boxes));
        (a, Box::new(compile(b, boxes)))
    };
    match t {
        Template::Bottom => Node::Bottom,
        Template::Top => Node::Top,
        Template::Var(v) => Node::Var(var_index(*v)),
        Template::Not(a) => Node::Not(Box::new(compile(a, boxes))),
        Template::Or(a, b) => {
            let (a, b) = pair(a, b, boxes);
            Node::Or(a, b)
        }
        Template::And(a, b) => {
            let (a, b) = pair(a, b, boxes);
            Node::And(a, b)
        }
        Template::Implies(a, b) => {
            let (a, b) = pair(a, b, boxes);
            Node::Implies(a, b)
        }
        Template::Box(g, a) => {
            boxes.push(g.clone());
            Node::Box(boxes.len() - 1, Box::new(compile(a, boxes)))
        }
    }
}

type Env = [Option<WorldSet>; 2];

/// `N_G(w)` for every world, as bit masks over subset values when the
/// domain is small enough.
enum Members<'a> {
    Masks(Vec<u64>),
    Sets(&'a [Family]),
}

impl<'a> Members<'a> {
    fn new(fams: &'a [Family], size: usize) -> Self {
        if size <= MAX_ALL_SUBSETS_WORLDS {
            Members::Masks(fams.iter().map(|f| f.iter().fold(0u64, |m, x| m | 1 << x.bits())).collect())
        } else {
            Members::Sets(fams)
        }
    }

    fn contains(&self, w: World, x: &WorldSet) -> bool {
        match self {
            Members::Masks(ms) => ms[w.0] >> x.bits() & 1 == 1,
            Members::Sets(fs) => fs[w.0].contains(x),
        }
    }
}

fn set_value(n: &Node, env: &Env, full: WorldSet) -> Option<WorldSet> {
    Some(match n {
        Node::Bottom => WorldSet::empty(full.domain_size()),
        Node::Top => full,
        Node::Var(i) => env[*i]?,
        Node::Not(a) => set_value(a, env, full)?.complement(),
        Node::Or(a, b) => set_value(a, env, full)?.union(&set_value(b, env, full)?),
        Node::And(a, b) => set_value(a, env, full)?.intersection(&set_value(b, env, full)?),
        Node::Implies(a, b) => set_value(a, env, full)?.complement().union(&set_value(b, env, full)?),
        Node::Box(..) => unreachable!("schema box bodies are box-free"),
    })
}

/// Kleene evaluation at `w`: `None` while it still depends on unbound
/// variables.
fn truth(n: &Node, w: World, env: &Env, boxes: &[&Members], full: WorldSet) -> Option<bool> {
    match n {
        Node::Bottom => Some(false),
        Node::Top => Some(true),
        Node::Var(i) => env[*i].map(|x| x.contains(w)),
        Node::Not(a) => truth(a, w, env, boxes, full).map(|b| !b),
        Node::Or(a, b) => kleene_or(truth(a, w, env, boxes, full), || truth(b, w, env, boxes, full)),
        Node::And(a, b) => {
            let neg = |x: Option<bool>| x.map(|b| !b);
            neg(kleene_or(neg(truth(a, w, env, boxes, full)), || neg(truth(b, w, env, boxes, full))))
        }
        Node::Implies(a, b) => kleene_or(truth(a, w, env, boxes, full).map(|b| !b), || truth(b, w, env, boxes, full)),
        Node::Box(i, body) => set_value(body, env, full).map(|x| boxes[*i].contains(w, &x)),
    }
}

fn kleene_or(a: Option<bool>, b: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if a == Some(true) {
        return Some(true);
    }
    match (a, b()) {
        (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

/// Bit `x` set iff `w ∈ x`, over subset values `x < 2^size`.
fn containing(w: World, size: usize) -> u64 {
    (0..1u64 << size).filter(|x| x >> w.0 & 1 == 1).fold(0, |m, x| m | 1 << x)
}

fn all_values(size: usize) -> u64 {
    if size == MAX_ALL_SUBSETS_WORLDS {
        u64::MAX
    } else {
        (1u64 << (1u64 << size)) - 1
    }
}

fn mentions(n: &Node, slot: usize) -> bool {
    match n {
        Node::Bottom | Node::Top => false,
        Node::Var(i) => *i == slot,
        Node::Not(a) | Node::Box(_, a) => mentions(a, slot),
        Node::Or(a, b) | Node::And(a, b) | Node::Implies(a, b) => mentions(a, slot) || mentions(b, slot),
    }
}

/// Truth at `w` as a function of the one unbound variable `slot`: bit `x`
/// is set iff the node is true when that variable denotes the set with
/// bit value `x`. Needs `|W| <= 6`.
struct MaskEval<'a> {
    w: World,
    slot: usize,
    boxes: &'a [&'a Members<'a>],
    full: WorldSet,
    all: u64,
    containing: u64,
}

impl MaskEval<'_> {
    fn eval(&self, n: &Node, env: &mut Env) -> u64 {
        match n {
            Node::Bottom => 0,
            Node::Top => self.all,
            Node::Var(i) if *i == self.slot => self.containing,
            Node::Var(i) => {
                if env[*i].expect("bound").contains(self.w) {
                    self.all
                } else {
                    0
                }
            }
            Node::Not(a) => !self.eval(a, env) & self.all,
            Node::Or(a, b) => self.eval(a, env) | self.eval(b, env),
            Node::And(a, b) => self.eval(a, env) & self.eval(b, env),
            Node::Implies(a, b) => (!self.eval(a, env) | self.eval(b, env)) & self.all,
            Node::Box(i, body) => {
                let table = self.boxes[*i];
                match (&**body, table) {
                    (Node::Var(v), Members::Masks(ms)) if *v == self.slot => ms[self.w.0],
                    (body, _) if !mentions(body, self.slot) => {
                        let x = set_value(body, env, self.full).expect("bound");
                        if table.contains(self.w, &x) {
                            self.all
                        } else {
                            0
                        }
                    }
                    (body, _) => {
                        let size = self.full.domain_size();
                        let mut mask = 0;
                        for x in 0..1u64 << size {
                            env[self.slot] = Some(WorldSet::from_bits(size, x));
                            let y = set_value(body, env, self.full).expect("bound");
                            if table.contains(self.w, &y) {
                                mask |= 1 << x;
                            }
                        }
                        env[self.slot] = None;
                        mask
                    }
                }
            }
        }
    }
}

struct Search<'a> {
    node: &'a Node,
    boxes: &'a [&'a Members<'a>],
    range: &'a [WorldSet],
    /// The range as a mask over subset values, when `|W| <= 6`.
    range_mask: Option<u64>,
    /// Per world, the mask of subset values containing it.
    containing: &'a [u64],
    vars: &'a [SetVar],
    full: WorldSet,
}

impl Search<'_> {
    /// First falsifying assignment extending `env` at `w`, in ascending
    /// lexicographic order of the unbound variables.
    fn run(&self, w: World, env: &mut Env, k: usize) -> bool {
        match truth(self.node, w, env, self.boxes, self.full) {
            Some(true) => false,
            Some(false) => {
                for v in &self.vars[k..] {
                    env[var_index(*v)] = Some(self.range[0]);
                }
                true
            }
            None => {
                let slot = var_index(self.vars[k]);
                if let (Some(range_mask), true) = (self.range_mask, k + 1 == self.vars.len()) {
                    let size = self.full.domain_size();
                    let eval = MaskEval {
                        w,
                        slot,
                        boxes: self.boxes,
                        full: self.full,
                        all: all_values(size),
                        containing: self.containing[w.0],
                    };
                    let failing = !eval.eval(self.node, env) & range_mask;
                    if failing == 0 {
                        return false;
                    }
                    env[slot] = Some(WorldSet::from_bits(size, failing.trailing_zeros() as u64));
                    return true;
                }
                for &x in self.range {
                    env[slot] = Some(x);
                    if self.run(w, env, k + 1) {
                        return true;
                    }
                }
                env[slot] = None;
                false
            }
        }
    }
}

/// Interns groups so that each distinct neighbourhood table is built once.
#[derive(Default)]
struct Interner {
    index: HashMap<Group, usize>,
    groups: Vec<Group>,
    unions: HashMap<Vec<usize>, usize>,
}

impl Interner {
    fn intern(&mut self, g: &Group) -> usize {
        if let Some(i) = self.index.get(g) {
            return *i;
        }
        self.groups.push(g.clone());
        self.index.insert(g.clone(), self.groups.len() - 1);
        self.groups.len() - 1
    }

    fn union(&mut self, mut parts: Vec<usize>) -> usize {
        parts.sort_unstable();
        parts.dedup();
        if let Some(i) = self.unions.get(&parts) {
            return *i;
        }
        let g = parts[1..].iter().fold(self.groups[parts[0]].clone(), |acc, i| acc.union(&self.groups[*i]));
        let i = self.intern(&g);
        self.unions.insert(parts, i);
        i
    }
}

fn first_counterexample(
    ev: &mut Evaluator,
    s: SchemaId,
    range: &[WorldSet],
    pool: &[Group],
) -> Result<Option<SemanticWitness>, LogicError> {
    let mut terms = Vec::new();
    let node = compile(&s.template(), &mut terms);
    let gvars = s.group_vars();
    let mut interner = Interner::default();
    let pool_ids: Vec<usize> = pool.iter().map(|g| interner.intern(g)).collect();
    let slot = |v: &GroupVar| gvars.iter().position(|x| x == v).expect("schema variable");

    // Group bindings as digits over the pool, first variable most significant.
    let count = pool.len().pow(gvars.len() as u32);
    let mut bindings: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(count);
    for k in 0..count {
        let mut digits = vec![0; gvars.len()];
        let mut rest = k;
        for d in digits.iter_mut().rev() {
            *d = rest % pool.len();
            rest /= pool.len();
        }
        if s.requires_disjoint() && !pool[digits[0]].is_disjoint(&pool[digits[1]]) {
            continue;
        }
        let boxes = terms
            .iter()
            .map(|t| match t {
                GroupTerm::Var(v) => pool_ids[digits[slot(v)]],
                GroupTerm::Fixed(g) => interner.intern(g),
                GroupTerm::Union(vs) => interner.union(vs.iter().map(|v| pool_ids[digits[slot(v)]]).collect()),
            })
            .collect();
        bindings.push((digits, boxes));
    }
    for g in &interner.groups {
        ev.families(g)?;
    }
    let m = ev.model();
    let ev = &*ev;
    let tables: Vec<Members> =
        interner.groups.iter().map(|g| Members::new(ev.cached(g).expect("populated above"), m.size())).collect();
    let full = m.full_set();
    let range_mask =
        (m.size() <= MAX_ALL_SUBSETS_WORLDS).then(|| range.iter().fold(0u64, |acc, x| acc | 1 << x.bits()));
    let containing: Vec<u64> =
        if range_mask.is_some() { m.worlds().map(|w| containing(w, m.size())).collect() } else { vec![] };
    let mut boxes: Vec<&Members> = Vec::with_capacity(terms.len());
    for w in m.worlds() {
        for (digits, ids) in &bindings {
            boxes.clear();
            boxes.extend(ids.iter().map(|i| &tables[*i]));
            let search = Search {
                node: &node,
                boxes: &boxes,
                range,
                range_mask,
                containing: &containing,
                vars: s.set_vars(),
                full,
            };
            let mut env: Env = [None, None];
            if search.run(w, &mut env, 0) {
                let mut binding = SemanticBinding::default();
                for (v, d) in gvars.iter().zip(digits) {
                    binding.groups.insert(*v, pool[*d].clone());
                }
                for v in s.set_vars() {
                    binding.values.insert(*v, env[var_index(*v)].expect("bound on success"));
                }
                return Ok(Some(SemanticWitness { world: w, binding }));
            }
        }
    }
    Ok(None)
}

fn all_subsets(m: &Model) -> Result<Vec<WorldSet>, LogicError> {
    if m.size() > MAX_ALL_SUBSETS_WORLDS {
        return Err(LogicError::Resource(format!(
            "all-subsets mode needs at most {MAX_ALL_SUBSETS_WORLDS} worlds, model has {}",
            m.size()
        )));
    }
    Ok(WorldSet::all_subsets(m.size()).collect())
}

/// Like [`check_schema_semantically`], reusing the evaluator's cached
/// neighbourhoods.
pub fn check_schema_with(
    ev: &mut Evaluator,
    s: SchemaId,
    range: SetRange,
    pool: &[Group],
) -> Result<SchemaVerdict, LogicError> {
    if pool.is_empty() && !s.group_vars().is_empty() {
        return Err(LogicError::EmptyPool);
    }
    let m = ev.model();
    match range {
        SetRange::AllSubsets => {
            let sets = all_subsets(m)?;
            Ok(SchemaVerdict {
                counterexample: first_counterexample(ev, s, &sets, pool)?,
                all_subsets_counterexample: None,
            })
        }
        SetRange::Definable => {
            let sets: Vec<WorldSet> = m.definable_sets(pool)?.into_keys().collect();
            let counterexample = first_counterexample(ev, s, &sets, pool)?;
            let all_subsets_counterexample = if counterexample.is_none() && m.size() <= MAX_ALL_SUBSETS_WORLDS {
                first_counterexample(ev, s, &all_subsets(m)?, pool)?
            } else {
                None
            };
            Ok(SchemaVerdict { counterexample, all_subsets_counterexample })
        }
    }
}

/// Checks every instance of `s` whose groups come from `pool` and whose
/// formula metavariables range over `range`, at every world. The first
/// counterexample is the least by world, then group binding in pool order,
/// then set values by bit value.
pub fn check_schema_semantically(
    m: &Model,
    s: SchemaId,
    range: SetRange,
    pool: &[Group],
) -> Result<SchemaVerdict, LogicError> {
    check_schema_with(&mut Evaluator::new(m), s, range, pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{AgentId, Formula};
    use crate::logics::{instantiate_schema, SyntacticBinding};
    use crate::model::FixtureId;
    use crate::testutil::arb_agent_model;
    use proptest::prelude::*;

    fn g(ids: &[u32]) -> Group {
        Group::of(ids).unwrap()
    }

    const BASE: [SchemaId; 4] = [SchemaId::B1, SchemaId::B2, SchemaId::B3, SchemaId::B4];

    #[test]
    fn m1_refutes_b1_with_the_expected_witness() {
        let m = FixtureId::M1.model();
        let pool = vec![g(&[1]), g(&[2]), g(&[1, 2])];
        let v = check_schema_semantically(&m, SchemaId::B1, SetRange::AllSubsets, &pool).unwrap();
        let cx = v.counterexample.unwrap();
        assert_eq!(m.label(cx.world), "wp");
        assert_eq!(cx.describe(&m), "world wp, G={1}, H={2}, phi={wp,wr}, psi={wq,wr}");
        for s in [SchemaId::B2, SchemaId::B3, SchemaId::B4] {
            assert!(check_schema_semantically(&m, s, SetRange::AllSubsets, &pool).unwrap().is_valid(), "{s}");
        }
    }

    #[test]
    fn independence_fixtures() {
        let fixtures = [FixtureId::M1, FixtureId::M2, FixtureId::M3, FixtureId::M4];
        for (k, id) in fixtures.iter().enumerate() {
            let m = id.model();
            let pool = m.default_pool();
            for (j, s) in BASE.iter().enumerate() {
                let v = check_schema_semantically(&m, *s, SetRange::AllSubsets, &pool).unwrap();
                assert_eq!(v.is_valid(), j != k, "{id} {s}");
            }
        }
    }

    #[test]
    fn nonreflexive_t() {
        let m = FixtureId::NonReflexive.model();
        let singles = vec![g(&[1]), g(&[2])];
        let v = check_schema_semantically(&m, SchemaId::TG, SetRange::Definable, &singles).unwrap();
        assert!(v.is_valid());
        // {v} ∈ N_2(w) but w ∉ {v}
        let disagreement = v.all_subsets_counterexample.unwrap();
        assert_eq!(disagreement.describe(&m), "world w, G={2}, phi={v}");

        let pool = vec![g(&[1]), g(&[2]), g(&[1, 2])];
        let v = check_schema_semantically(&m, SchemaId::TG, SetRange::Definable, &pool).unwrap();
        assert_eq!(v.counterexample.unwrap().describe(&m), "world w, G={1,2}, phi={}");
    }

    #[test]
    fn schemas_without_group_variables() {
        let m = FixtureId::NonReflexive.model();
        let v = check_schema_semantically(&m, SchemaId::Nec(AgentId(1)), SetRange::AllSubsets, &[]).unwrap();
        assert_eq!(v.counterexample.unwrap().describe(&m), "world w");
        let v = check_schema_semantically(&m, SchemaId::P(AgentId(1)), SetRange::AllSubsets, &[]).unwrap();
        assert!(v.is_valid());
    }

    #[test]
    fn errors() {
        let m = FixtureId::M1.model();
        assert_eq!(check_schema_semantically(&m, SchemaId::B1, SetRange::AllSubsets, &[]), Err(LogicError::EmptyPool));
        let big = crate::model::GeneralModel::new(
            crate::model::Domain::numbered(7, Default::default()).unwrap(),
            Default::default(),
        )
        .unwrap()
        .into();
        assert!(matches!(
            check_schema_semantically(&big, SchemaId::TG, SetRange::AllSubsets, &[g(&[1])]),
            Err(LogicError::Resource(_))
        ));
        assert!(check_schema_semantically(&big, SchemaId::TG, SetRange::Definable, &[g(&[1])]).is_ok());
    }

    /// Independent oracle: instantiate every binding with a formula naming
    /// each set and check validity of the instance directly.
    fn brute_force(m: &Model, s: SchemaId, pool: &[Group]) -> bool {
        let defs = m.definable_sets(pool).unwrap();
        let witnesses: Vec<&Formula> = defs.values().collect();
        let mut groupings: Vec<Vec<Group>> = vec![vec![]];
        for _ in s.group_vars() {
            groupings = groupings
                .iter()
                .flat_map(|p| pool.iter().map(move |g| [p.clone(), vec![g.clone()]].concat()))
                .collect();
        }
        let mut valuations: Vec<Vec<&Formula>> = vec![vec![]];
        for _ in s.set_vars() {
            valuations =
                valuations.iter().flat_map(|p| witnesses.iter().map(move |f| [p.clone(), vec![*f]].concat())).collect();
        }
        for gs in &groupings {
            for fs in &valuations {
                let mut b = SyntacticBinding::default();
                for (v, g) in s.group_vars().iter().zip(gs) {
                    b.groups.insert(*v, g.clone());
                }
                for (v, f) in s.set_vars().iter().zip(fs) {
                    b.values.insert(*v, (*f).clone());
                }
                match instantiate_schema(s, &b) {
                    Ok(inst) => {
                        if !m.valid(&inst).unwrap() {
                            return false;
                        }
                    }
                    Err(LogicError::DisjointnessViolated { .. }) => continue,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        true
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn definable_mode_matches_instance_oracle(m in arb_agent_model(3, 2)) {
            let m: Model = m.into();
            let pool = m.default_pool();
            for s in [SchemaId::B1, SchemaId::B3, SchemaId::TG, SchemaId::RMG, SchemaId::CG] {
                let v = check_schema_semantically(&m, s, SetRange::Definable, &pool).unwrap();
                prop_assert_eq!(v.is_valid(), brute_force(&m, s, &pool), "{}", s);
            }
        }

        #[test]
        fn base_schemas_hold_on_agent_models(m in arb_agent_model(3, 3)) {
            let m: Model = m.into();
            let pool = m.default_pool();
            for s in BASE {
                let v = check_schema_semantically(&m, s, SetRange::AllSubsets, &pool).unwrap();
                prop_assert!(v.is_valid(), "{} {:?}", s, v.counterexample.map(|c| c.describe(&m)));
            }
        }
    }
}
