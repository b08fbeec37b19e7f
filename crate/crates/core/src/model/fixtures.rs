//! The worked example models: four general models separating the base
//! axioms from one another, and a two-world agent model that is not
//! reflexive yet validates every single-agent T instance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{AgentModel, Domain, Family, GeneralModel, Model, ModelError, NeighbourhoodMap, WorldSet};
use crate::formula::{AgentId, Group};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FixtureId {
    M1,
    M2,
    M3,
    M4,
    NonReflexive,
}

impl FixtureId {
    pub const ALL: [FixtureId; 5] =
        [FixtureId::M1, FixtureId::M2, FixtureId::M3, FixtureId::M4, FixtureId::NonReflexive];

    pub fn model(self) -> Model {
        match self {
            FixtureId::M1 => m1(),
            FixtureId::M2 => m2(),
            FixtureId::M3 => m3(),
            FixtureId::M4 => m4(),
            FixtureId::NonReflexive => nonreflexive(),
        }
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureId::M1 => "M1",
            FixtureId::M2 => "M2",
            FixtureId::M3 => "M3",
            FixtureId::M4 => "M4",
            FixtureId::NonReflexive => "NONREFLEXIVE",
        })
    }
}

impl FromStr for FixtureId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "M1" => Ok(FixtureId::M1),
            "M2" => Ok(FixtureId::M2),
            "M3" => Ok(FixtureId::M3),
            "M4" => Ok(FixtureId::M4),
            "NONREFLEXIVE" => Ok(FixtureId::NonReflexive),
            _ => Err(ModelError::UnknownFixture(s.to_string())),
        }
    }
}

const WP: usize = 0;
const WQ: usize = 1;
const WR: usize = 2;

/// `W = {wp, wq, wr}` with `p`, `q`, `r` true at exactly their own world.
fn pqr_domain() -> Domain {
    let valuation = [("p", WP), ("q", WQ), ("r", WR)]
        .into_iter()
        .map(|(a, w)| (a.to_string(), WorldSet::from_worlds(3, [w])))
        .collect();
    Domain::new(vec!["wp".into(), "wq".into(), "wr".into()], valuation).expect("valid domain")
}

fn set(ws: &[usize]) -> WorldSet {
    WorldSet::from_worlds(3, ws.iter().copied())
}

fn general(entries: Vec<(&[u32], Vec<WorldSet>)>) -> Model {
    let groups = entries
        .into_iter()
        .map(|(ids, sets)| {
            let family: Family = sets.into_iter().collect();
            (Group::of(ids).expect("nonempty"), NeighbourhoodMap::constant(3, family))
        })
        .collect();
    GeneralModel::new(pqr_domain(), groups).expect("valid fixture").into()
}

fn m1() -> Model {
    let e = set(&[]);
    general(vec![(&[1], vec![set(&[WP, WR]), e]), (&[2], vec![set(&[WQ, WR]), e])])
}

/// Singletons get every set but `W`; larger groups get the whole powerset.
fn m2() -> Model {
    let all: Vec<WorldSet> = WorldSet::all_subsets(3).collect();
    let proper: Vec<WorldSet> = all.iter().copied().filter(|s| !s.is_full()).collect();
    general(vec![
        (&[1], proper.clone()),
        (&[2], proper.clone()),
        (&[3], proper),
        (&[1, 2], all.clone()),
        (&[1, 3], all.clone()),
        (&[2, 3], all.clone()),
        (&[1, 2, 3], all),
    ])
}

fn m3() -> Model {
    let e = set(&[]);
    general(vec![(&[1], vec![set(&[WP]), e]), (&[1, 2, 3], vec![set(&[WP]), e])])
}

fn m4() -> Model {
    let e = set(&[]);
    general(vec![
        (&[1, 3], vec![set(&[WP]), e]),
        (&[1, 2], vec![set(&[WP, WQ]), e]),
        (&[1, 2, 3], vec![set(&[WP, WQ]), e]),
    ])
}

/// `W = {w, v}`, every atom true everywhere, `N_1 ≡ {{w}}`, `N_2 ≡ {{v}}`.
fn nonreflexive() -> Model {
    let full = WorldSet::full(2);
    let valuation: BTreeMap<String, WorldSet> = ["p", "q"].into_iter().map(|a| (a.to_string(), full)).collect();
    let domain = Domain::new(vec!["w".into(), "v".into()], valuation).expect("valid domain");
    let agents = [
        (AgentId(1), NeighbourhoodMap::constant(2, [WorldSet::from_worlds(2, [0])].into_iter().collect())),
        (AgentId(2), NeighbourhoodMap::constant(2, [WorldSet::from_worlds(2, [1])].into_iter().collect())),
    ]
    .into_iter()
    .collect();
    AgentModel::new(domain, agents).expect("valid fixture").into()
}
