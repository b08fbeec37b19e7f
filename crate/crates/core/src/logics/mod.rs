//! Axiom schemas, logics built from them, semantic schema checking and a
//! Hilbert-style proof checker.

mod proof;
mod schema;
mod semantic;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use proof::{
    check_entailment_certificate, check_proof, Certificate, Justification, Proof, ProofDocument, ProofLine,
    ProofVerdict,
};
pub use schema::{instantiate_schema, match_schema, Binding, GroupVar, SchemaId, SetVar, SyntacticBinding};
pub use semantic::{
    check_schema_semantically, check_schema_with, SchemaVerdict, SemanticBinding, SemanticWitness, SetRange,
};

use crate::formula::{Formula, Group, ParseError};
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("unknown metavariable `{0}`")]
    UnknownMetavariable(String),
    #[error("missing binding for metavariable {0}")]
    MissingMetavariable(String),
    #[error("B1 needs disjoint groups, got {{{g}}} and {{{h}}}")]
    DisjointnessViolated { g: Group, h: Group },
    #[error("group pool is empty")]
    EmptyPool,
    #[error("unknown set range `{0}` (expected all-subsets or definable)")]
    UnknownRange(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed proof file at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("proof line {line}: {error}")]
    LineFormula { line: usize, error: ParseError },
    #[error("{field}: {error}")]
    Formula { field: String, error: ParseError },
    #[error("invalid proof file: {0}")]
    Invalid(String),
    #[error("selected premise `{0}` is not among the premises")]
    SelectionNotInPremises(Formula),
}

/// The base logic (B1–B4 with classical logic, RE and MP) plus extension
/// schemas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogicDescriptor {
    extensions: BTreeSet<SchemaId>,
    replace_b1_with_cg: bool,
}

const BASE: [SchemaId; 4] = [SchemaId::B1, SchemaId::B2, SchemaId::B3, SchemaId::B4];

impl LogicDescriptor {
    pub fn base() -> Self {
        Self::default()
    }

    /// Base schemas listed among the extensions are ignored. Replacing B1
    /// adds CG.
    pub fn new(extensions: impl IntoIterator<Item = SchemaId>, replace_b1_with_cg: bool) -> Self {
        let mut extensions: BTreeSet<SchemaId> = extensions.into_iter().filter(|s| !BASE.contains(s)).collect();
        if replace_b1_with_cg {
            extensions.insert(SchemaId::CG);
        }
        LogicDescriptor { extensions, replace_b1_with_cg }
    }

    pub fn with(mut self, s: SchemaId) -> Self {
        if !BASE.contains(&s) {
            self.extensions.insert(s);
        }
        self
    }

    pub fn extensions(&self) -> &BTreeSet<SchemaId> {
        &self.extensions
    }

    pub fn replaces_b1(&self) -> bool {
        self.replace_b1_with_cg
    }

    /// Every axiom schema of the logic, base first.
    pub fn schemas(&self) -> Vec<SchemaId> {
        BASE.iter()
            .copied()
            .filter(|s| !(self.replace_b1_with_cg && *s == SchemaId::B1))
            .chain(self.extensions.iter().copied())
            .collect()
    }

    pub fn contains(&self, s: SchemaId) -> bool {
        self.schemas().contains(&s)
    }
}

impl fmt::Display for LogicDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.schemas().iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// First schema of `l`, in `schemas()` order, that `f` instantiates.
pub fn is_axiom_instance(f: &Formula, l: &LogicDescriptor) -> Option<(SchemaId, SyntacticBinding)> {
    l.schemas().into_iter().find_map(|s| match_schema(s, f).map(|b| (s, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, AgentId};

    #[test]
    fn descriptor_schemas() {
        assert_eq!(LogicDescriptor::base().schemas(), BASE.to_vec());
        let cg = LogicDescriptor::new([], true);
        assert_eq!(cg.schemas(), vec![SchemaId::B2, SchemaId::B3, SchemaId::B4, SchemaId::CG]);
        let nec = LogicDescriptor::base().with(SchemaId::Nec(AgentId(2))).with(SchemaId::B1);
        assert_eq!(nec.schemas().len(), 5);
        assert_eq!(nec.to_string(), "{B1, B2, B3, B4, NEC:2}");
    }

    #[test]
    fn recognizes_against_a_logic() {
        let base = LogicDescriptor::base();
        let (s, b) = is_axiom_instance(&parse("([1]p & [2]q) -> [1,2](p & q)").unwrap(), &base).unwrap();
        assert_eq!(s, SchemaId::B1);
        assert_eq!(b.to_string(), "G={1}, H={2}, phi=p, psi=q");

        let same = parse("([1]p & [1]q) -> [1](p & q)").unwrap();
        assert!(is_axiom_instance(&same, &base).is_none());
        let with_cg = base.clone().with(SchemaId::CG);
        assert_eq!(is_axiom_instance(&same, &with_cg).unwrap().0, SchemaId::CG);

        let t = parse("[1]p -> p").unwrap();
        assert!(is_axiom_instance(&t, &base).is_none());
        assert_eq!(is_axiom_instance(&t, &base.with(SchemaId::TG)).unwrap().0, SchemaId::TG);
    }

    #[test]
    fn replacing_b1_drops_it() {
        let f = parse("([1]p & [2]q) -> [1,2](p & q)").unwrap();
        let l = LogicDescriptor::new([], true);
        assert_eq!(is_axiom_instance(&f, &l).unwrap().0, SchemaId::CG);
        assert!(!l.contains(SchemaId::B1));
    }
}
