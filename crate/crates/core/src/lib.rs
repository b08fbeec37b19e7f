//! Multi-agent neighbourhood modal logic where group modalities are
//! interpreted by pointwise intersection of the members' neighbourhoods.
//!
//! - [`formula`]: the language, its parser and printer, tautology checking.
//! - [`model`]: finite models, truth sets, definable sets, example fixtures.
//! - [`frames`]: frame conditions and the superset/intersection closures.
//! - [`logics`]: axiom schemas, semantic schema checking, proof checking.
//! - [`search`]: model enumeration and sampling, countermodels, soundness fuzzing.
//! - [`cli`]: the `nbhd` command-line front end.

pub mod cli;
pub mod formula;
pub mod frames;
pub mod logics;
pub mod model;
pub mod search;

#[cfg(test)]
mod testutil;

pub use formula::{parse, AgentId, Formula, Group};
pub use model::{AgentModel, FixtureId, GeneralModel, Model, World, WorldSet};
