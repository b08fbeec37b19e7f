//! Bounded exhaustive enumeration and seeded random generation of agent
//! models, countermodel search and soundness fuzzing.
//!
//! Random models come from ChaCha8 seeded with `seed` via
//! `SeedableRng::seed_from_u64`, using stream number `draw`. Per draw: the
//! domain size is uniform in `1..=max_worlds`; then for each atom (in the
//! given order) one `u64` whose low `|W|` bits are its truth set; then for
//! each agent (ascending) and world (ascending) one `u64` whose bit `k`
//! says whether the set with bit value `k` belongs to `N_i(w)`.

use std::collections::BTreeMap;
use std::env;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{AgentId, Formula, Group};
use crate::frames::{check_condition, intersection_closure, superset_closure, FrameCondition, FrameError};
use crate::logics::{check_schema_with, LogicDescriptor, LogicError, SchemaId, SemanticWitness, SetRange};
use crate::model::{
    unions_up_to_three, AgentModel, Domain, Evaluator, Family, Model, ModelError, NeighbourhoodMap, World, WorldSet,
};

/// Default cap on the number of models visited by exhaustive search.
pub const DEFAULT_MAX_STATES: u64 = 1 << 21;
/// Largest domain for random generation (one `u64` per family).
pub const MAX_RANDOM_WORLDS: usize = 6;
const REPAIR_ROUNDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search bounds: {0}")]
    Bounds(String),
    #[error("state space of {states} models exceeds the guard of {limit}")]
    StateGuard { states: u64, limit: u64 },
    #[error("frame constraints cannot be satisfied: {0}")]
    Unsatisfiable(String),
    #[error("random generation needs random mode with an explicit seed")]
    NotRandom,
    #[error("logic needs frame constraint {needed} for schema {schema}")]
    ConstraintMismatch { schema: SchemaId, needed: FrameCondition },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_worlds: usize,
    pub agents: Vec<AgentId>,
    pub atoms: Vec<String>,
    pub mode: SearchMode,
    pub frame_constraints: Vec<FrameCondition>,
}

impl SearchBounds {
    pub fn random(max_worlds: usize, agents: &[u32], trials: u64, seed: u64) -> Self {
        SearchBounds {
            max_worlds,
            agents: agents.iter().copied().map(AgentId).collect(),
            atoms: vec!["p".into(), "q".into()],
            mode: SearchMode::Random { trials, seed },
            frame_constraints: Vec::new(),
        }
    }

    pub fn exhaustive(max_worlds: usize, agents: &[u32]) -> Self {
        SearchBounds { mode: SearchMode::Exhaustive, atoms: vec!["p".into()], ..Self::random(max_worlds, agents, 0, 0) }
    }

    pub fn with_constraints(mut self, cs: impl IntoIterator<Item = FrameCondition>) -> Self {
        self.frame_constraints.extend(cs);
        self
    }

    pub fn with_atoms(mut self, atoms: &[&str]) -> Self {
        self.atoms = atoms.iter().map(|a| a.to_string()).collect();
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.max_worlds == 0 {
            return Err(SearchError::Bounds("max_worlds must be at least 1".into()));
        }
        let mut agents = self.agents.clone();
        agents.sort();
        agents.dedup();
        if agents.len() != self.agents.len() {
            return Err(SearchError::Bounds("agents must be distinct".into()));
        }
        for c in &self.frame_constraints {
            let named: Vec<AgentId> = match c {
                FrameCondition::Nec(i) | FrameCondition::Conec(i) | FrameCondition::P(i) | FrameCondition::Cop(i) => {
                    vec![*i]
                }
                FrameCondition::PGroup(g) => g.members().to_vec(),
                _ => vec![],
            };
            if let Some(i) = named.iter().find(|i| !self.agents.contains(i)) {
                return Err(SearchError::Bounds(format!("constraint {c} mentions agent {i}, which is not searched")));
            }
        }
        match self.mode {
            SearchMode::Random { .. } if self.max_worlds > MAX_RANDOM_WORLDS => {
                Err(SearchError::Bounds(format!("random mode supports at most {MAX_RANDOM_WORLDS} worlds")))
            }
            SearchMode::Exhaustive if self.max_worlds > 2 || self.agents.len() > 2 || self.atoms.len() > 2 => {
                Err(SearchError::Bounds("exhaustive mode supports at most 2 worlds, 2 agents and 2 atoms".into()))
            }
            _ => Ok(()),
        }
    }

    /// The groups every generated model is checked against.
    pub fn pool(&self) -> Vec<Group> {
        unions_up_to_three(&self.agents)
    }
}

/// The exhaustive-search guard, lowered by `NBHD_MAX_STATES` when set.
pub fn max_states() -> u64 {
    env::var("NBHD_MAX_STATES")
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map_or(DEFAULT_MAX_STATES, |v| v.min(DEFAULT_MAX_STATES))
}

type Families = BTreeMap<AgentId, Vec<Family>>;

fn build(n: usize, atoms: &[String], valuation: &[WorldSet], fams: Families) -> Result<AgentModel, ModelError> {
    let valuation = atoms.iter().cloned().zip(valuation.iter().copied()).collect();
    let agents = fams.into_iter().map(|(a, fs)| (a, NeighbourhoodMap::new(fs))).collect();
    AgentModel::new(Domain::numbered(n, valuation)?, agents)
}

fn contradictions(cs: &[FrameCondition]) -> Result<(), SearchError> {
    let has = |c: &FrameCondition| cs.contains(c);
    for c in cs {
        let clash = match c {
            FrameCondition::Nec(i) if has(&FrameCondition::Conec(*i)) => Some(format!("NEC and CONEC for agent {i}")),
            FrameCondition::Cop(i) if has(&FrameCondition::P(*i)) => Some(format!("COP and P for agent {i}")),
            FrameCondition::Cop(i) if has(&FrameCondition::Reflexive) => {
                Some(format!("COP for agent {i} and reflexivity"))
            }
            FrameCondition::Cop(i) if has(&FrameCondition::Nec(*i)) && has(&FrameCondition::BinaryConsistent) => {
                Some(format!("NEC, COP and binary consistency for agent {i}"))
            }
            FrameCondition::Cop(i) if has(&FrameCondition::PGroup(Group::singleton(*i))) => {
                Some(format!("COP for agent {i} and P for group {{{i}}}"))
            }
            _ => None,
        };
        if let Some(msg) = clash {
            return Err(SearchError::Unsatisfiable(msg));
        }
    }
    Ok(())
}

struct Repair<'a> {
    n: usize,
    cs: &'a [FrameCondition],
}

impl Repair<'_> {
    fn has(&self, c: &FrameCondition) -> bool {
        self.cs.contains(c)
    }

    fn protected(&self, a: AgentId, x: WorldSet) -> bool {
        (x.is_full() && self.has(&FrameCondition::Nec(a))) || (x.is_empty() && self.has(&FrameCondition::Cop(a)))
    }

    /// Removes `x`, and under monotonicity every subset of it, so that an
    /// upward-closed family stays upward closed.
    fn delete(&self, a: AgentId, fam: &mut Family, x: WorldSet) {
        if self.has(&FrameCondition::Monotone) {
            fam.retain(|y| !y.is_subset(&x) || self.protected(a, *y));
        } else if !self.protected(a, x) {
            fam.remove(&x);
        }
    }

    fn round(&self, fams: &mut Families) -> Result<(), SearchError> {
        let full = WorldSet::full(self.n);
        let empty = WorldSet::empty(self.n);
        for c in self.cs {
            match c {
                FrameCondition::Nec(i) => fams.get_mut(i).into_iter().flatten().for_each(|f| {
                    f.insert(full);
                }),
                FrameCondition::Cop(i) => fams.get_mut(i).into_iter().flatten().for_each(|f| {
                    f.insert(empty);
                }),
                _ => {}
            }
        }
        for (a, per_world) in fams.iter_mut() {
            for (w, fam) in per_world.iter_mut().enumerate() {
                for c in self.cs {
                    match c {
                        FrameCondition::Reflexive => {
                            let bad: Vec<WorldSet> = fam.iter().copied().filter(|x| !x.contains(World(w))).collect();
                            bad.into_iter().for_each(|x| self.delete(*a, fam, x));
                        }
                        FrameCondition::P(i) if i == a => self.delete(*a, fam, empty),
                        FrameCondition::Conec(i) if i == a => self.delete(*a, fam, full),
                        _ => {}
                    }
                }
                if self.has(&FrameCondition::Monotone) {
                    *fam = superset_closure(fam);
                }
                if self.has(&FrameCondition::IntersectionClosed) {
                    *fam = intersection_closure(fam);
                }
                if self.has(&FrameCondition::BinaryConsistent) {
                    self.binary_consistency(*a, fam)?;
                }
            }
        }
        for c in self.cs {
            if let FrameCondition::PGroup(g) = c {
                for w in 0..self.n {
                    self.group_consistency(fams, g, w)?;
                }
            }
        }
        Ok(())
    }

    /// For each complementary pair, drops the member with the larger bit
    /// value unless it is protected by NEC/COP.
    fn binary_consistency(&self, a: AgentId, fam: &mut Family) -> Result<(), SearchError> {
        let members: Vec<WorldSet> = fam.iter().copied().collect();
        for x in members {
            let c = x.complement();
            if !(fam.contains(&x) && fam.contains(&c)) {
                continue;
            }
            let (lo, hi) = if x < c { (x, c) } else { (c, x) };
            let victim = if !self.protected(a, hi) {
                hi
            } else if !self.protected(a, lo) {
                lo
            } else {
                return Err(SearchError::Unsatisfiable(format!("agent {a} must contain both W and ∅")));
            };
            self.delete(a, fam, victim);
        }
        Ok(())
    }

    /// While some choice of members intersects to ∅, removes the smallest
    /// unprotected set of that choice.
    fn group_consistency(&self, fams: &mut Families, g: &Group, w: usize) -> Result<(), SearchError> {
        loop {
            let lists: Vec<(AgentId, Vec<WorldSet>)> = g
                .members()
                .iter()
                .map(|a| (*a, fams.get(a).map_or_else(Vec::new, |f| f[w].iter().copied().collect())))
                .collect();
            let Some(tuple) = first_empty_tuple(&lists, self.n) else { return Ok(()) };
            let victim =
                tuple.iter().filter(|(a, x)| !self.protected(*a, *x)).min_by_key(|(_, x)| (x.count(), *x)).copied();
            match victim {
                Some((a, x)) => {
                    let fam = &mut fams.get_mut(&a).expect("agent in tuple")[w];
                    let before = fam.len();
                    self.delete(a, fam, x);
                    if fam.len() == before {
                        return Err(SearchError::Unsatisfiable(format!("cannot keep ∅ out of N_{{{g}}}")));
                    }
                }
                None => return Err(SearchError::Unsatisfiable(format!("∅ is forced into N_{{{g}}}"))),
            }
        }
    }
}

fn first_empty_tuple(lists: &[(AgentId, Vec<WorldSet>)], n: usize) -> Option<Vec<(AgentId, WorldSet)>> {
    fn go(lists: &[(AgentId, Vec<WorldSet>)], acc: WorldSet, chosen: &mut Vec<(AgentId, WorldSet)>) -> bool {
        let Some(((a, xs), rest)) = lists.split_first() else { return acc.is_empty() };
        for x in xs {
            chosen.push((*a, *x));
            if go(rest, acc.intersection(x), chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen = Vec::new();
    go(lists, WorldSet::full(n), &mut chosen).then_some(chosen)
}

fn conforms(m: &AgentModel, cs: &[FrameCondition]) -> Result<bool, SearchError> {
    let model = Model::Agent(m.clone());
    for c in cs {
        if !check_condition(&model, c)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn repaired(
    n: usize,
    atoms: &[String],
    valuation: &[WorldSet],
    mut fams: Families,
    cs: &[FrameCondition],
) -> Result<AgentModel, SearchError> {
    if cs.is_empty() {
        return Ok(build(n, atoms, valuation, fams)?);
    }
    let repair = Repair { n, cs };
    for _ in 0..REPAIR_ROUNDS {
        repair.round(&mut fams)?;
        let m = build(n, atoms, valuation, fams.clone())?;
        if conforms(&m, cs)? {
            return Ok(m);
        }
    }
    // Minimal families: only what NEC/COP force.
    for (a, per_world) in fams.iter_mut() {
        for fam in per_world.iter_mut() {
            fam.clear();
            if repair.has(&FrameCondition::Nec(*a)) {
                fam.insert(WorldSet::full(n));
            }
            if repair.has(&FrameCondition::Cop(*a)) {
                fam.insert(WorldSet::empty(n));
            }
        }
    }
    let m = build(n, atoms, valuation, fams)?;
    if conforms(&m, cs)? {
        Ok(m)
    } else {
        let names: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        Err(SearchError::Unsatisfiable(format!("repair did not converge for {{{}}}", names.join(", "))))
    }
}

/// The `draw`-th random model for the bounds' seed, repaired to satisfy the
/// frame constraints.
pub fn random_model(b: &SearchBounds, draw: u64) -> Result<AgentModel, SearchError> {
    let SearchMode::Random { seed, .. } = b.mode else { return Err(SearchError::NotRandom) };
    b.validate()?;
    contradictions(&b.frame_constraints)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let n = rng.random_range(1..=b.max_worlds);
    let valuation: Vec<WorldSet> = b.atoms.iter().map(|_| WorldSet::from_bits(n, rng.random())).collect();
    let subsets: Vec<WorldSet> = WorldSet::all_subsets(n).collect();
    let fams: Families = b
        .agents
        .iter()
        .map(|a| {
            let per_world = (0..n)
                .map(|_| {
                    let mask: u64 = rng.random();
                    subsets.iter().copied().filter(|s| mask >> s.bits() & 1 == 1).collect()
                })
                .collect();
            (*a, per_world)
        })
        .collect();
    repaired(n, &b.atoms, &valuation, fams, &b.frame_constraints)
}

/// Number of raw models with exactly `n` worlds in exhaustive mode.
fn space_size(n: usize, agents: usize, atoms: usize) -> u64 {
    let family_choices = 1u64 << (1u64 << n);
    family_choices.pow((n * agents) as u32) * (1u64 << n).pow(atoms as u32)
}

/// Decodes the `index`-th model with `n` worlds: families in agent-major,
/// world-minor order as the least significant digits, then valuations.
fn decode(b: &SearchBounds, n: usize, mut index: u64) -> Result<AgentModel, ModelError> {
    let family_radix = 1u64 << (1u64 << n);
    let subsets: Vec<WorldSet> = WorldSet::all_subsets(n).collect();
    let mut fams = Families::new();
    for a in &b.agents {
        let mut per_world = Vec::with_capacity(n);
        for _ in 0..n {
            let mask = index % family_radix;
            index /= family_radix;
            per_world.push(subsets.iter().copied().filter(|s| mask >> s.bits() & 1 == 1).collect());
        }
        fams.insert(*a, per_world);
    }
    let valuation: Vec<WorldSet> = b
        .atoms
        .iter()
        .map(|_| {
            let bits = index % (1u64 << n);
            index /= 1u64 << n;
            WorldSet::from_bits(n, bits)
        })
        .collect();
    build(n, &b.atoms, &valuation, fams)
}

/// Every model of the bounded space that meets the frame constraints, in
/// enumeration order: by domain size, then by [`decode`] index.
pub fn enumerate_models(b: &SearchBounds) -> Result<Vec<AgentModel>, SearchError> {
    let (offsets, total) = exhaustive_layout(b)?;
    let mut out = Vec::new();
    for k in 0..total {
        if let Some(m) = exhaustive_model(b, &offsets, k)? {
            out.push(m);
        }
    }
    Ok(out)
}

/// Per-size offsets and the total state count, after the guard check.
fn exhaustive_layout(b: &SearchBounds) -> Result<(Vec<(usize, u64)>, u64), SearchError> {
    b.validate()?;
    if b.mode != SearchMode::Exhaustive {
        return Err(SearchError::Bounds("expected exhaustive mode".into()));
    }
    let mut offsets = Vec::new();
    let mut total = 0u64;
    for n in 1..=b.max_worlds {
        offsets.push((n, total));
        total += space_size(n, b.agents.len(), b.atoms.len());
    }
    let limit = max_states();
    if total > limit {
        return Err(SearchError::StateGuard { states: total, limit });
    }
    Ok((offsets, total))
}

fn exhaustive_model(b: &SearchBounds, offsets: &[(usize, u64)], k: u64) -> Result<Option<AgentModel>, SearchError> {
    let (n, base) = offsets.iter().rev().find(|(_, off)| *off <= k).copied().expect("k within total");
    let m = decode(b, n, k - base)?;
    Ok(conforms(&m, &b.frame_constraints)?.then_some(m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PoolPolicy {
    /// Each model's own default pool.
    Model,
    Fixed(Vec<Group>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Formula(Formula),
    Schema { schema: SchemaId, range: SetRange, pool: PoolPolicy },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A world where the formula is false.
    World(World),
    Schema(SemanticWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    /// Enumeration index in exhaustive mode, draw number in random mode.
    pub index: u64,
    pub model: Model,
    pub witness: Witness,
}

impl Countermodel {
    pub fn describe_witness(&self) -> String {
        match &self.witness {
            Witness::World(w) => format!("false at {}", self.model.label(*w)),
            Witness::Schema(s) => s.describe(&self.model),
        }
    }
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "countermodel #{}: {}\n{}", self.index, self.describe_witness(), self.model)
    }
}

fn refute(m: &Model, target: &Target) -> Result<Option<Witness>, SearchError> {
    match target {
        Target::Formula(f) => {
            let t = m.truth_set(f)?;
            Ok(m.worlds().find(|w| !t.contains(*w)).map(Witness::World))
        }
        Target::Schema { schema, range, pool } => {
            let pool = match pool {
                PoolPolicy::Model => m.default_pool(),
                PoolPolicy::Fixed(p) => p.clone(),
            };
            let v = check_schema_with(&mut Evaluator::new(m), *schema, *range, &pool)?;
            Ok(v.counterexample.map(Witness::Schema))
        }
    }
}

/// The first model in enumeration (or draw) order that refutes the target.
/// `None` only means that no countermodel exists within the bounds.
pub fn find_countermodel(target: &Target, b: &SearchBounds) -> Result<Option<Countermodel>, SearchError> {
    let attempt = |index: u64, m: Option<AgentModel>| -> Result<Option<Countermodel>, SearchError> {
        let Some(m) = m else { return Ok(None) };
        let model = Model::Agent(m);
        Ok(refute(&model, target)?.map(|witness| Countermodel { index, model, witness }))
    };
    let found = match b.mode {
        SearchMode::Exhaustive => {
            let (offsets, total) = exhaustive_layout(b)?;
            (0..total)
                .into_par_iter()
                .map(|k| exhaustive_model(b, &offsets, k).and_then(|m| attempt(k, m)))
                .find_first(|r| !matches!(r, Ok(None)))
        }
        SearchMode::Random { trials, .. } => {
            contradictions(&b.frame_constraints)?;
            (0..trials)
                .into_par_iter()
                .map(|d| random_model(b, d).and_then(|m| attempt(d, Some(m))))
                .find_first(|r| !matches!(r, Ok(None)))
        }
    };
    found.unwrap_or(Ok(None))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub draw: u64,
    pub model: Model,
    pub schema: SchemaId,
    pub witness: SemanticWitness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzReport {
    pub trials: u64,
    pub violations: Vec<Violation>,
}

impl FuzzReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        let violations: Vec<serde_json::Value> = self
            .violations
            .iter()
            .map(|v| {
                serde_json::json!({
                    "draw": v.draw,
                    "model": v.model.to_json_value(),
                    "schema": v.schema.to_string(),
                    "witness": v.witness.describe(&v.model),
                })
            })
            .collect();
        serde_json::json!({ "trials": self.trials, "violations": violations })
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} trials, {} violations", self.trials, self.violations.len())?;
        for v in &self.violations {
            write!(f, "\ndraw {}: {} fails at {}", v.draw, v.schema, v.witness.describe(&v.model))?;
        }
        Ok(())
    }
}

/// Frame constraints under which `s` is sound, for the given agents.
pub fn required_constraints(s: SchemaId, agents: &[AgentId]) -> Vec<FrameCondition> {
    match s {
        SchemaId::B1 | SchemaId::B2 | SchemaId::B3 | SchemaId::B4 => vec![],
        SchemaId::Nec(i) => vec![FrameCondition::Nec(i)],
        SchemaId::Conec(i) => vec![FrameCondition::Conec(i)],
        SchemaId::P(i) => vec![FrameCondition::P(i)],
        SchemaId::Cop(i) => vec![FrameCondition::Cop(i)],
        SchemaId::PG => unions_up_to_three(agents).into_iter().map(FrameCondition::PGroup).collect(),
        SchemaId::TG => vec![FrameCondition::Reflexive],
        SchemaId::DI(_) => vec![FrameCondition::BinaryConsistent],
        SchemaId::RMG => vec![FrameCondition::Monotone],
        SchemaId::CG => vec![FrameCondition::IntersectionClosed],
        SchemaId::SA => agents.iter().map(|i| FrameCondition::Nec(*i)).collect(),
    }
}

/// Checks every schema of `l` (all subsets, default pools) on `trials`
/// random models drawn under the bounds' constraints.
pub fn soundness_fuzz(l: &LogicDescriptor, b: &SearchBounds) -> Result<FuzzReport, SearchError> {
    let SearchMode::Random { trials, .. } = b.mode else { return Err(SearchError::NotRandom) };
    let schemas = l.schemas();
    for s in &schemas {
        if let Some(needed) = required_constraints(*s, &b.agents).into_iter().find(|c| !b.frame_constraints.contains(c))
        {
            return Err(SearchError::ConstraintMismatch { schema: *s, needed });
        }
    }
    b.validate()?;
    contradictions(&b.frame_constraints)?;
    let per_draw = (0..trials)
        .into_par_iter()
        .map(|draw| -> Result<Vec<Violation>, SearchError> {
            let model = Model::Agent(random_model(b, draw)?);
            let pool = model.default_pool();
            let mut ev = Evaluator::new(&model);
            let mut found = Vec::new();
            for s in &schemas {
                if let Some(witness) = check_schema_with(&mut ev, *s, SetRange::AllSubsets, &pool)?.counterexample {
                    found.push(Violation { draw, model: model.clone(), schema: *s, witness });
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FuzzReport { trials, violations: per_draw.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn a(i: u32) -> AgentId {
        AgentId(i)
    }

    #[test]
    fn random_models_are_deterministic() {
        let b = SearchBounds::random(4, &[1, 2, 3], 10, 7);
        for d in 0..10 {
            assert_eq!(random_model(&b, d).unwrap(), random_model(&b, d).unwrap());
        }
        let other = SearchBounds::random(4, &[1, 2, 3], 10, 8);
        assert!((0..10).any(|d| random_model(&b, d).unwrap() != random_model(&other, d).unwrap()));
    }

    #[test]
    fn nec_repair() {
        let b = SearchBounds::random(4, &[1, 2], 50, 1).with_constraints([FrameCondition::Nec(a(1))]);
        for d in 0..50 {
            let m = random_model(&b, d).unwrap();
            for w in 0..m.domain().size() {
                assert!(m.family(a(1), World(w)).contains(&WorldSet::full(m.domain().size())));
            }
        }
    }

    #[test]
    fn contradictory_constraints() {
        let b = SearchBounds::random(3, &[1], 1, 1)
            .with_constraints([FrameCondition::Nec(a(1)), FrameCondition::Conec(a(1))]);
        assert!(matches!(random_model(&b, 0), Err(SearchError::Unsatisfiable(_))));
        let b =
            SearchBounds::random(3, &[1], 1, 1).with_constraints([FrameCondition::Cop(a(1)), FrameCondition::P(a(1))]);
        assert!(matches!(random_model(&b, 0), Err(SearchError::Unsatisfiable(_))));
    }

    #[test]
    fn repair_meets_every_single_constraint() {
        let cs = [
            FrameCondition::Nec(a(1)),
            FrameCondition::Conec(a(2)),
            FrameCondition::P(a(1)),
            FrameCondition::Cop(a(2)),
            FrameCondition::PGroup(Group::of(&[1, 2]).unwrap()),
            FrameCondition::Reflexive,
            FrameCondition::BinaryConsistent,
            FrameCondition::Monotone,
            FrameCondition::IntersectionClosed,
        ];
        for c in cs {
            let b = SearchBounds::random(4, &[1, 2], 40, 3).with_constraints([c.clone()]);
            for d in 0..40 {
                let m = Model::Agent(random_model(&b, d).unwrap());
                assert!(check_condition(&m, &c).unwrap().holds(), "{c} draw {d}");
            }
        }
    }

    #[test]
    fn repair_meets_combined_constraints() {
        let combos = [
            vec![FrameCondition::Monotone, FrameCondition::BinaryConsistent, FrameCondition::Nec(a(1))],
            vec![FrameCondition::Monotone, FrameCondition::Conec(a(1))],
            vec![FrameCondition::IntersectionClosed, FrameCondition::P(a(1)), FrameCondition::P(a(2))],
            vec![FrameCondition::Reflexive, FrameCondition::Monotone, FrameCondition::IntersectionClosed],
        ];
        for cs in combos {
            let b = SearchBounds::random(3, &[1, 2], 30, 11).with_constraints(cs.clone());
            for d in 0..30 {
                let m = Model::Agent(random_model(&b, d).unwrap());
                for c in &cs {
                    assert!(check_condition(&m, c).unwrap().holds(), "{c} draw {d}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_finds_cg_countermodel() {
        let g = Group::of(&[1]).unwrap();
        let target =
            Target::Schema { schema: SchemaId::CG, range: SetRange::AllSubsets, pool: PoolPolicy::Fixed(vec![g]) };
        let found = find_countermodel(&target, &SearchBounds::exhaustive(2, &[1])).unwrap().unwrap();
        let m = found.model.as_agent().unwrap();
        let Witness::Schema(w) = &found.witness else { panic!() };
        let fam = m.family(a(1), w.world);
        let x = w.binding.values[&crate::logics::SetVar::Phi];
        let y = w.binding.values[&crate::logics::SetVar::Psi];
        assert!(fam.contains(&x) && fam.contains(&y) && !fam.contains(&x.intersection(&y)));
    }

    #[test]
    fn exhaustive_guard_and_bounds() {
        let b = SearchBounds::exhaustive(3, &[1]);
        assert!(matches!(find_countermodel(&Target::Formula(parse("p").unwrap()), &b), Err(SearchError::Bounds(_))));
        assert!(max_states() <= DEFAULT_MAX_STATES);
    }

    #[test]
    fn formula_countermodels() {
        let b = SearchBounds::exhaustive(1, &[1]);
        let found = find_countermodel(&Target::Formula(parse("p -> q").unwrap()), &b.clone().with_atoms(&["p", "q"]))
            .unwrap()
            .unwrap();
        assert_eq!(found.describe_witness(), "false at w0");
        assert!(find_countermodel(&Target::Formula(parse("[1]p -> [1]p").unwrap()), &b).unwrap().is_none());
    }

    /// Independent enumeration of the one-world, one-agent, one-atom space.
    #[test]
    fn exhaustive_matches_hand_enumeration() {
        let b = SearchBounds::exhaustive(1, &[1]);
        let models = enumerate_models(&b).unwrap();
        let (empty, full) = (WorldSet::empty(1), WorldSet::full(1));
        let families: Vec<Family> = vec![Family::new(), [empty].into(), [full].into(), [empty, full].into()];
        let mut expected: Vec<(u64, Family)> =
            (0..2u64).flat_map(|v| families.iter().map(move |f| (v, f.clone()))).collect();
        let mut got: Vec<(u64, Family)> =
            models.iter().map(|m| (m.domain().valuation()["p"].bits(), m.family(a(1), World(0)))).collect();
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
        for f in ["[1]p", "[1]true -> [1]p", "~[1]false", "[1]p | [1]~p", "[1]p -> [1](p | q)"] {
            let f = parse(f).unwrap();
            let brute = models.iter().all(|m| Model::Agent(m.clone()).valid(&f).unwrap());
            let search = find_countermodel(&Target::Formula(f.clone()), &b).unwrap().is_none();
            assert_eq!(brute, search, "{f}");
        }
    }

    #[test]
    fn fuzz_requires_matching_constraints() {
        let b = SearchBounds::random(3, &[1, 2], 5, 1);
        let l = LogicDescriptor::base().with(SchemaId::TG);
        assert!(matches!(soundness_fuzz(&l, &b), Err(SearchError::ConstraintMismatch { .. })));
        let r = soundness_fuzz(&l, &b.with_constraints([FrameCondition::Reflexive])).unwrap();
        assert_eq!(r.trials, 5);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn fuzz_reports_violations_of_unsound_schemas() {
        let b = SearchBounds::random(3, &[1, 2], 40, 5).with_constraints([FrameCondition::Reflexive]);
        let l = LogicDescriptor::base().with(SchemaId::TG).with(SchemaId::Nec(a(1)));
        let b = b.with_constraints([FrameCondition::Nec(a(1))]);
        assert!(soundness_fuzz(&l, &b).unwrap().violations.is_empty());
        // CG without intersection closure is caught
        let l = LogicDescriptor::new([], true);
        let b = SearchBounds::random(3, &[1, 2], 40, 5).with_constraints([FrameCondition::IntersectionClosed]);
        assert!(soundness_fuzz(&l, &b).unwrap().violations.is_empty());
        let loose = SearchBounds { frame_constraints: vec![], ..b };
        assert!(matches!(soundness_fuzz(&l, &loose), Err(SearchError::ConstraintMismatch { .. })));
    }
}
