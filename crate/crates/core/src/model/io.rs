//! JSON model files.
//!
//! ```json
//! { "worlds": ["wp","wq","wr"],
//!   "valuation": {"p": ["wp"]},
//!   "agents": {"1": {"*": [["wp","wr"], []]}} }
//! ```
//!
//! Exactly one of `agents` / `groups` is present. A family under `"*"`
//! applies to every world not listed explicitly. Worlds left unlisted get the
//! empty family for agents and `{∅}` for groups.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AgentModel, Domain, Family, GeneralModel, Model, ModelError, NeighbourhoodMap, WorldSet};
use crate::formula::{AgentId, Group};

type FamilyLiteral = Vec<Vec<String>>;
type MapLiteral = BTreeMap<String, FamilyLiteral>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    worlds: Vec<String>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    agents: Option<BTreeMap<String, MapLiteral>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<BTreeMap<String, MapLiteral>>,
}

fn invalid(msg: String) -> ModelError {
    ModelError::Invalid(msg)
}

fn world_set(labels: &[String], lit: &[String], ctx: &str) -> Result<WorldSet, ModelError> {
    let mut s = WorldSet::empty(labels.len());
    for l in lit {
        let i = labels.iter().position(|x| x == l).ok_or_else(|| invalid(format!("{ctx}: unknown world `{l}`")))?;
        s.insert(super::World(i));
    }
    Ok(s)
}

fn neighbourhood_map(
    labels: &[String],
    lit: &MapLiteral,
    default: Family,
    ctx: &str,
) -> Result<NeighbourhoodMap, ModelError> {
    let family = |fl: &FamilyLiteral, key: &str| -> Result<Family, ModelError> {
        fl.iter().map(|s| world_set(labels, s, &format!("{ctx}.{key}"))).collect()
    };
    let fallback = match lit.get("*") {
        Some(fl) => family(fl, "*")?,
        None => default,
    };
    let mut families = vec![fallback; labels.len()];
    for (key, fl) in lit {
        if key == "*" {
            continue;
        }
        let w = labels.iter().position(|x| x == key).ok_or_else(|| invalid(format!("{ctx}: unknown world `{key}`")))?;
        families[w] = family(fl, key)?;
    }
    Ok(NeighbourhoodMap::new(families))
}

fn map_literal(labels: &[String], map: &NeighbourhoodMap) -> MapLiteral {
    let lit = |fam: &Family| -> FamilyLiteral {
        fam.iter().map(|s| s.iter().map(|w| labels[w.0].clone()).collect()).collect()
    };
    if map.is_constant() {
        [("*".to_string(), lit(&map.families()[0]))].into_iter().collect()
    } else {
        labels.iter().cloned().zip(map.families().iter().map(lit)).collect()
    }
}

impl Model {
    pub fn from_json_str(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let labels = file.worlds;
        let mut valuation = BTreeMap::new();
        for (atom, lit) in &file.valuation {
            valuation.insert(atom.clone(), world_set(&labels, lit, &format!("valuation.{atom}"))?);
        }
        let domain = Domain::new(labels.clone(), valuation)?;
        match (file.agents, file.groups) {
            (Some(agents), None) => {
                let mut maps = BTreeMap::new();
                for (key, lit) in &agents {
                    let id = key
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| invalid(format!("agents: `{key}` is not a non-negative integer")))?;
                    let ctx = format!("agents.{key}");
                    maps.insert(AgentId(id), neighbourhood_map(&labels, lit, Family::new(), &ctx)?);
                }
                Ok(AgentModel::new(domain, maps)?.into())
            }
            (None, Some(groups)) => {
                let mut maps = BTreeMap::new();
                let default: Family = [WorldSet::empty(labels.len())].into_iter().collect();
                for (key, lit) in &groups {
                    let g: Group = key.parse().map_err(|e| invalid(format!("groups: `{key}`: {e}")))?;
                    let ctx = format!("groups.{key}");
                    maps.insert(g, neighbourhood_map(&labels, lit, default.clone(), &ctx)?);
                }
                Ok(GeneralModel::new(domain, maps)?.into())
            }
            _ => Err(invalid("exactly one of `agents` and `groups` must be present".into())),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let labels = self.domain().labels().to_vec();
        let valuation = self
            .domain()
            .valuation()
            .iter()
            .map(|(a, s)| (a.clone(), s.iter().map(|w| labels[w.0].clone()).collect()))
            .collect();
        let (agents, groups) = match self {
            Model::Agent(m) => {
                (Some(m.agents().iter().map(|(a, map)| (a.to_string(), map_literal(&labels, map))).collect()), None)
            }
            Model::General(m) => {
                (None, Some(m.groups().iter().map(|(g, map)| (g.to_string(), map_literal(&labels, map))).collect()))
            }
        };
        serde_json::to_value(ModelFile { worlds: labels, valuation, agents, groups }).expect("serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FixtureId, World};

    #[test]
    fn fixtures_round_trip_through_json() {
        for id in FixtureId::ALL {
            let m = id.model();
            let back = Model::from_json_str(&m.to_json_string()).unwrap();
            assert_eq!(back, m, "{id}");
        }
    }

    #[test]
    fn reads_the_documented_shape() {
        let text = r#"{ "worlds": ["wp","wq","wr"],
            "valuation": {"p":["wp"], "q":["wq"], "r":["wr"]},
            "agents": {"1": {"*": [["wp","wr"],[]]}, "2": {"wq": [["wq"]]}} }"#;
        let m = Model::from_json_str(text).unwrap();
        let a = m.as_agent().unwrap();
        assert_eq!(a.family(AgentId(1), World(2)).len(), 2);
        assert_eq!(a.family(AgentId(2), World(1)).len(), 1);
        assert!(a.family(AgentId(2), World(0)).is_empty());
    }

    #[test]
    fn general_defaults_to_empty_set_family() {
        let text = r#"{"worlds":["a","b"], "groups": {"1,2": {"a": [["a","b"]]}}}"#;
        let m = Model::from_json_str(text).unwrap();
        let g = Group::of(&[1, 2]).unwrap();
        assert_eq!(m.group_neighbourhood(&g, World(1)).unwrap(), [WorldSet::empty(2)].into_iter().collect());
        assert_eq!(m.group_neighbourhood(&g, World(0)).unwrap(), [WorldSet::full(2)].into_iter().collect());
    }

    #[test]
    fn rejects_malformed_files() {
        let e = Model::from_json_str("{\"worlds\": [\"a\"],\n \"agents\": {").unwrap_err();
        assert!(matches!(e, ModelError::Json { line: 2, .. }), "{e:?}");
        let both = r#"{"worlds":["a"], "agents":{}, "groups":{}}"#;
        assert!(matches!(Model::from_json_str(both), Err(ModelError::Invalid(_))));
        let neither = r#"{"worlds":["a"]}"#;
        assert!(Model::from_json_str(neither).is_err());
        let bad_world = r#"{"worlds":["a"], "agents":{"1":{"*":[["z"]]}}}"#;
        assert!(Model::from_json_str(bad_world).unwrap_err().to_string().contains("unknown world `z`"));
        let bad_agent = r#"{"worlds":["a"], "agents":{"x":{}}}"#;
        assert!(Model::from_json_str(bad_agent).is_err());
        let empty_group = r#"{"worlds":["a"], "groups":{"":{}}}"#;
        assert!(Model::from_json_str(empty_group).is_err());
        let no_worlds = r#"{"worlds":[], "agents":{}}"#;
        assert!(Model::from_json_str(no_worlds).is_err());
    }
}
