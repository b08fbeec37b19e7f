//! Frame conditions on neighbourhood functions, and the superset and
//! intersection closures of agent models.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{AgentId, Group, GroupError};
use crate::model::{AgentModel, Family, Model, ModelError, NeighbourhoodMap, World, WorldSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameCondition {
    /// `W ∈ N_i(w)`
    Nec(AgentId),
    /// `W ∉ N_i(w)`
    Conec(AgentId),
    /// `∅ ∉ N_i(w)`
    P(AgentId),
    /// `∅ ∈ N_i(w)`
    Cop(AgentId),
    /// `∅ ∉ N_G(w)`
    PGroup(Group),
    /// every `X ∈ N_i(w)` contains `w`
    Reflexive,
    /// no family holds both a set and its complement
    BinaryConsistent,
    /// every family is closed under supersets
    Monotone,
    /// every family is closed under binary intersections
    IntersectionClosed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("unknown frame condition `{0}` (expected nec:i, conec:i, p:i, cop:i, pg:G, reflexive, bincons, monotone, intclosed)")]
    UnknownCondition(String),
    #[error("bad condition parameter in `{0}`: {1}")]
    BadParameter(String, GroupError),
    #[error("unknown closure `{0}` (expected supersets or intersections)")]
    UnknownClosure(String),
    #[error("closures are only defined on agent models")]
    GeneralModel,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl fmt::Display for FrameCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameCondition::Nec(i) => write!(f, "nec:{i}"),
            FrameCondition::Conec(i) => write!(f, "conec:{i}"),
            FrameCondition::P(i) => write!(f, "p:{i}"),
            FrameCondition::Cop(i) => write!(f, "cop:{i}"),
            FrameCondition::PGroup(g) => write!(f, "pg:{g}"),
            FrameCondition::Reflexive => f.write_str("reflexive"),
            FrameCondition::BinaryConsistent => f.write_str("bincons"),
            FrameCondition::Monotone => f.write_str("monotone"),
            FrameCondition::IntersectionClosed => f.write_str("intclosed"),
        }
    }
}

impl FromStr for FrameCondition {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let bad = |e| FrameError::BadParameter(s.to_string(), e);
        let agent = |a: &str| -> Result<AgentId, FrameError> {
            a.trim().parse::<u32>().map(AgentId).map_err(|_| bad(GroupError::BadAgent(a.to_string())))
        };
        Ok(match (name, arg) {
            ("nec", Some(a)) => FrameCondition::Nec(agent(a)?),
            ("conec", Some(a)) => FrameCondition::Conec(agent(a)?),
            ("p", Some(a)) => FrameCondition::P(agent(a)?),
            ("cop", Some(a)) => FrameCondition::Cop(agent(a)?),
            ("pg", Some(a)) => FrameCondition::PGroup(a.parse().map_err(bad)?),
            ("reflexive", None) => FrameCondition::Reflexive,
            ("bincons", None) => FrameCondition::BinaryConsistent,
            ("monotone", None) => FrameCondition::Monotone,
            ("intclosed", None) => FrameCondition::IntersectionClosed,
            _ => return Err(FrameError::UnknownCondition(s.to_string())),
        })
    }
}

/// Whose neighbourhood a witness refers to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Agent(AgentId),
    Group(Group),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Agent(a) => write!(f, "agent {a}"),
            Subject::Group(g) => write!(f, "group {{{g}}}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameWitness {
    pub world: World,
    pub subject: Subject,
    /// The offending set: present when it should be absent, or missing when
    /// it should be present.
    pub set: WorldSet,
    pub reason: String,
}

impl FrameWitness {
    pub fn describe(&self, m: &Model) -> String {
        format!("world {}, {}, set {}: {}", m.label(self.world), self.subject, m.format_set(&self.set), self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameVerdict {
    pub witness: Option<FrameWitness>,
    /// Non-fatal remarks, such as references to agents the model lacks.
    pub notes: Vec<String>,
}

impl FrameVerdict {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

fn family_violation(c: &FrameCondition, fam: &Family, w: World, size: usize) -> Option<(WorldSet, String)> {
    let full = WorldSet::full(size);
    let empty = WorldSet::empty(size);
    match c {
        FrameCondition::Nec(_) => (!fam.contains(&full)).then(|| (full, "W is missing".to_string())),
        FrameCondition::Conec(_) => fam.contains(&full).then(|| (full, "W is present".to_string())),
        FrameCondition::P(_) | FrameCondition::PGroup(_) => {
            fam.contains(&empty).then(|| (empty, "∅ is present".to_string()))
        }
        FrameCondition::Cop(_) => (!fam.contains(&empty)).then(|| (empty, "∅ is missing".to_string())),
        FrameCondition::Reflexive => {
            fam.iter().find(|x| !x.contains(w)).map(|x| (*x, "member does not contain the world".to_string()))
        }
        FrameCondition::BinaryConsistent => fam
            .iter()
            .find(|x| fam.contains(&x.complement()))
            .map(|x| (*x, "member and its complement are both present".to_string())),
        FrameCondition::Monotone => fam
            .iter()
            .flat_map(|x| x.supersets().filter(|y| !fam.contains(y)).collect::<Vec<_>>())
            .min()
            .map(|y| (y, "superset of a member is missing".to_string())),
        FrameCondition::IntersectionClosed => fam
            .iter()
            .flat_map(|x| fam.iter().map(move |y| x.intersection(y)))
            .filter(|z| !fam.contains(z))
            .min()
            .map(|z| (z, "intersection of two members is missing".to_string())),
    }
}

/// Checks `c` at every world, returning the least `(world, subject, set)`
/// counterexample.
///
/// Agent-indexed conditions on a general model inspect the stored singleton
/// group `{i}`; the structural conditions inspect every stored group.
pub fn check_condition(m: &Model, c: &FrameCondition) -> Result<FrameVerdict, FrameError> {
    let mut notes = Vec::new();
    let size = m.size();
    let mut subjects: Vec<(Subject, Vec<Family>)> = Vec::new();
    let per_world =
        |g: &Group| -> Result<Vec<Family>, ModelError> { m.worlds().map(|w| m.group_neighbourhood(g, w)).collect() };
    match c {
        FrameCondition::Nec(i) | FrameCondition::Conec(i) | FrameCondition::P(i) | FrameCondition::Cop(i) => match m {
            Model::Agent(a) => {
                if a.agent(*i).is_none() {
                    notes.push(format!("agent {i} is absent from the model; its family is empty"));
                }
                subjects.push((Subject::Agent(*i), m.worlds().map(|w| a.family(*i, w)).collect()));
            }
            Model::General(_) => {
                let g = Group::singleton(*i);
                subjects.push((Subject::Group(g.clone()), per_world(&g)?));
            }
        },
        FrameCondition::PGroup(g) => {
            if let Model::Agent(a) = m {
                for i in g.members().iter().filter(|i| a.agent(**i).is_none()) {
                    notes.push(format!("agent {i} is absent from the model; its family is empty"));
                }
            }
            subjects.push((Subject::Group(g.clone()), per_world(g)?));
        }
        _ => match m {
            Model::Agent(a) => {
                for (i, map) in a.agents() {
                    subjects.push((Subject::Agent(*i), map.families().to_vec()));
                }
            }
            Model::General(gm) => {
                for (g, map) in gm.groups() {
                    subjects.push((Subject::Group(g.clone()), map.families().to_vec()));
                }
            }
        },
    }
    for w in m.worlds() {
        for (subject, fams) in &subjects {
            if let Some((set, reason)) = family_violation(c, &fams[w.0], w, size) {
                let witness = FrameWitness { world: w, subject: subject.clone(), set, reason };
                return Ok(FrameVerdict { witness: Some(witness), notes });
            }
        }
    }
    Ok(FrameVerdict { witness: None, notes })
}

/// True iff every condition holds on `m`.
pub fn satisfies_all(m: &Model, conditions: &[FrameCondition]) -> Result<bool, FrameError> {
    for c in conditions {
        if !check_condition(m, c)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Supersets,
    Intersections,
}

impl FromStr for Closure {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "supersets" | "up" => Ok(Closure::Supersets),
            "intersections" | "cap" => Ok(Closure::Intersections),
            _ => Err(FrameError::UnknownClosure(s.to_string())),
        }
    }
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Closure::Supersets => "supersets",
            Closure::Intersections => "intersections",
        })
    }
}

pub fn superset_closure(fam: &Family) -> Family {
    fam.iter().flat_map(|x| x.supersets().collect::<Vec<_>>()).collect()
}

/// Closure under intersections of nonempty subfamilies.
pub fn intersection_closure(fam: &Family) -> Family {
    let mut out = fam.clone();
    loop {
        let new: Vec<WorldSet> = out
            .iter()
            .flat_map(|x| out.iter().map(move |y| x.intersection(y)))
            .filter(|z| !out.contains(z))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if new.is_empty() {
            return out;
        }
        out.extend(new);
    }
}

fn close_with(m: &AgentModel, op: fn(&Family) -> Family) -> AgentModel {
    m.map_agents(|_, map| NeighbourhoodMap::new(map.families().iter().map(op).collect()))
}

/// Replaces each `N_i(w)` by its closure under supersets.
pub fn close_under_supersets(m: &AgentModel) -> AgentModel {
    close_with(m, superset_closure)
}

/// Replaces each `N_i(w)` by the intersections of its nonempty subfamilies.
pub fn close_under_intersections(m: &AgentModel) -> AgentModel {
    close_with(m, intersection_closure)
}

pub fn close_model(m: &Model, closure: Closure) -> Result<Model, FrameError> {
    let a = m.as_agent().ok_or(FrameError::GeneralModel)?;
    Ok(match closure {
        Closure::Supersets => close_under_supersets(a),
        Closure::Intersections => close_under_intersections(a),
    }
    .into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FixtureId;
    use crate::testutil::arb_agent_model;
    use proptest::prelude::*;

    fn fam(size: usize, sets: &[&[usize]]) -> Family {
        sets.iter().map(|s| WorldSet::from_worlds(size, s.iter().copied())).collect()
    }

    #[test]
    fn condition_names_round_trip() {
        for s in ["nec:1", "conec:2", "p:3", "cop:0", "pg:1,2", "reflexive", "bincons", "monotone", "intclosed"] {
            assert_eq!(s.parse::<FrameCondition>().unwrap().to_string(), s);
        }
        assert!("nec".parse::<FrameCondition>().is_err());
        assert!("nec:x".parse::<FrameCondition>().is_err());
        assert!("pg:".parse::<FrameCondition>().is_err());
        assert!("transitive".parse::<FrameCondition>().is_err());
    }

    #[test]
    fn nonreflexive_fixture_fails_reflexivity_at_agent_two() {
        let m = FixtureId::NonReflexive.model();
        let v = check_condition(&m, &FrameCondition::Reflexive).unwrap();
        let wit = v.witness.unwrap();
        assert_eq!(wit.world, World(0));
        assert_eq!(wit.subject, Subject::Agent(AgentId(2)));
        assert_eq!(m.format_set(&wit.set), "{v}");
    }

    #[test]
    fn nonreflexive_fixture_is_binary_consistent() {
        let m = FixtureId::NonReflexive.model();
        assert!(check_condition(&m, &FrameCondition::BinaryConsistent).unwrap().holds());
    }

    #[test]
    fn p_holds_vacuously_on_empty_families() {
        let m = FixtureId::NonReflexive.model();
        let v = check_condition(&m, &FrameCondition::P(AgentId(5))).unwrap();
        assert!(v.holds());
        assert_eq!(v.notes.len(), 1);
        assert!(!check_condition(&m, &FrameCondition::Nec(AgentId(5))).unwrap().holds());
    }

    #[test]
    fn p_does_not_transfer_to_groups() {
        let m = FixtureId::NonReflexive.model();
        assert!(check_condition(&m, &FrameCondition::P(AgentId(1))).unwrap().holds());
        assert!(check_condition(&m, &FrameCondition::P(AgentId(2))).unwrap().holds());
        let pg = check_condition(&m, &FrameCondition::PGroup(Group::of(&[1, 2]).unwrap())).unwrap();
        assert!(pg.witness.unwrap().set.is_empty());
    }

    #[test]
    fn general_models_check_stored_groups() {
        let m = FixtureId::M2.model();
        assert!(!check_condition(&m, &FrameCondition::Nec(AgentId(1))).unwrap().holds());
        assert!(check_condition(&m, &FrameCondition::Cop(AgentId(1))).unwrap().holds());
        // M1's {1} family {{wp,wr}, ∅}: ∅ ⊆ everything, so not monotone
        assert!(!check_condition(&FixtureId::M1.model(), &FrameCondition::Monotone).unwrap().holds());
    }

    #[test]
    fn superset_closure_examples() {
        assert_eq!(superset_closure(&fam(2, &[&[0]])), fam(2, &[&[0], &[0, 1]]));
        assert_eq!(superset_closure(&Family::new()), Family::new());
        assert_eq!(superset_closure(&fam(2, &[&[0, 1]])), fam(2, &[&[0, 1]]));
    }

    #[test]
    fn intersection_closure_examples() {
        assert_eq!(intersection_closure(&fam(3, &[&[0, 1], &[1, 2]])), fam(3, &[&[0, 1], &[1, 2], &[1]]));
        assert_eq!(intersection_closure(&fam(3, &[&[0, 2]])), fam(3, &[&[0, 2]]));
        assert_eq!(intersection_closure(&fam(2, &[&[0], &[1]])), fam(2, &[&[0], &[1], &[]]));
        assert_eq!(intersection_closure(&Family::new()), Family::new());
    }

    #[test]
    fn closures_reject_general_models() {
        assert_eq!(close_model(&FixtureId::M1.model(), Closure::Supersets), Err(FrameError::GeneralModel));
    }

    fn pointwise_subset(a: &AgentModel, b: &AgentModel) -> bool {
        a.agents()
            .iter()
            .all(|(i, map)| map.families().iter().enumerate().all(|(w, f)| f.is_subset(&b.family(*i, World(w)))))
    }

    proptest! {
        #[test]
        fn closures_are_extensive_idempotent_and_establish_their_condition(m in arb_agent_model(3, 2)) {
            for (close, cond) in [
                (close_under_supersets as fn(&AgentModel) -> AgentModel, FrameCondition::Monotone),
                (close_under_intersections, FrameCondition::IntersectionClosed),
            ] {
                let c = close(&m);
                prop_assert!(pointwise_subset(&m, &c));
                prop_assert_eq!(close(&c), c.clone());
                prop_assert!(check_condition(&c.clone().into(), &cond).unwrap().holds());
            }
        }

        #[test]
        fn closures_are_monotone(m in arb_agent_model(3, 2), keep in any::<u64>()) {
            // a pointwise sub-model obtained by dropping some members
            let mut bit = 0;
            let sub = m.map_agents(|_, map| NeighbourhoodMap::new(map.families().iter().map(|f| {
                f.iter().copied().filter(|_| { bit += 1; keep >> (bit % 64) & 1 == 1 }).collect()
            }).collect()));
            prop_assert!(pointwise_subset(&sub, &m));
            prop_assert!(pointwise_subset(&close_under_supersets(&sub), &close_under_supersets(&m)));
            prop_assert!(pointwise_subset(&close_under_intersections(&sub), &close_under_intersections(&m)));
        }

        #[test]
        fn closures_preserve_conditions(m in arb_agent_model(3, 2)) {
            let model: Model = m.clone().into();
            let up: Model = close_under_supersets(&m).into();
            let cap: Model = close_under_intersections(&m).into();
            let agents: Vec<AgentId> = m.agents().keys().copied().collect();
            let mut kept_by_up = vec![FrameCondition::Reflexive];
            let mut kept_by_cap = vec![FrameCondition::Reflexive];
            for i in agents {
                kept_by_up.push(FrameCondition::Nec(i));
                kept_by_cap.extend([FrameCondition::Nec(i), FrameCondition::Cop(i)]);
            }
            for c in &kept_by_up {
                if check_condition(&model, c).unwrap().holds() {
                    prop_assert!(check_condition(&up, c).unwrap().holds(), "{} lost by superset closure", c);
                }
            }
            for c in &kept_by_cap {
                if check_condition(&model, c).unwrap().holds() {
                    prop_assert!(check_condition(&cap, c).unwrap().holds(), "{} lost by intersection closure", c);
                }
            }
        }
    }
}
