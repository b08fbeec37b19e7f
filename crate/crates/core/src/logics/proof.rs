//! Hilbert-style proofs: lines justified by tautology, axiom instance, modus
//! ponens or replacement of equivalents under a box.
//!
//! ```json
//! { "logic": {"extensions": ["nec:2"], "cg": false},
//!   "lines": [
//!     {"formula": "[2]true", "just": {"type": "axiom", "schema": "nec:2"}},
//!     {"formula": "p & true <-> p", "just": {"type": "taut"}},
//!     {"formula": "[1](p & true) <-> [1]p", "just": {"type": "re", "from": 2, "group": [1]}},
//!     {"formula": "...", "just": {"type": "mp", "from": [1, 4]}} ] }
//! ```
//!
//! Line numbers are 1-based. An entailment certificate additionally carries
//! `premises`, `selection` and `conclusion`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{instantiate_schema, match_schema};
use super::{GroupVar, LogicDescriptor, LogicError, SchemaId, SetVar, SyntacticBinding};
use crate::formula::{parse, AgentId, Formula, Group};

/// Truth tables beyond this many units are not attempted.
pub const MAX_TAUTOLOGY_UNITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Taut,
    Axiom {
        schema: SchemaId,
        binding: Option<SyntacticBinding>,
    },
    /// Line `major` is `minor -> current`.
    Mp {
        minor: usize,
        major: usize,
    },
    /// Line `from` is `φ <-> ψ`; the current line is `[group]φ <-> [group]ψ`.
    Re {
        from: usize,
        group: Group,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofVerdict {
    Accepted { lines: usize },
    Rejected { line: usize, reason: String },
}

impl ProofVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, ProofVerdict::Accepted { .. })
    }
}

impl fmt::Display for ProofVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofVerdict::Accepted { lines } => write!(f, "accepted ({lines} lines)"),
            ProofVerdict::Rejected { line, reason } => write!(f, "rejected at line {line}: {reason}"),
        }
    }
}

fn earlier(lines: &[ProofLine], k: usize, current: usize) -> Result<&Formula, String> {
    if k == 0 || k >= current {
        return Err(format!("line {k} does not precede line {current}"));
    }
    Ok(&lines[k - 1].formula)
}

fn check_line(lines: &[ProofLine], n: usize, l: &LogicDescriptor) -> Result<(), String> {
    let line = &lines[n - 1];
    let f = &line.formula;
    match &line.justification {
        Justification::Taut => {
            let units = f.boxed_atoms().len();
            if units > MAX_TAUTOLOGY_UNITS {
                return Err(format!("{units} propositional units exceed the limit of {MAX_TAUTOLOGY_UNITS}"));
            }
            if !f.is_propositional_tautology() {
                return Err("not a propositional tautology".into());
            }
        }
        Justification::Axiom { schema, binding } => {
            if !l.contains(*schema) {
                return Err(format!("schema {schema} is not an axiom of the logic {l}"));
            }
            match binding {
                Some(b) => {
                    let inst = instantiate_schema(*schema, b).map_err(|e| e.to_string())?;
                    if &inst != f {
                        return Err(format!("{schema}[{b}] is `{inst}`, not this formula"));
                    }
                }
                None => {
                    if match_schema(*schema, f).is_none() {
                        return Err(format!("not an instance of {schema}"));
                    }
                }
            }
        }
        Justification::Mp { minor, major } => {
            let a = earlier(lines, *minor, n)?;
            let b = earlier(lines, *major, n)?;
            let expected = Formula::implies(a.clone(), f.clone());
            if b != &expected {
                return Err(format!("line {major} is not `{expected}`"));
            }
        }
        Justification::Re { from, group } => {
            let Formula::Iff(a, b) = earlier(lines, *from, n)? else {
                return Err(format!("line {from} is not a biconditional"));
            };
            let expected = Formula::iff(
                Formula::boxed(group.clone(), (**a).clone()),
                Formula::boxed(group.clone(), (**b).clone()),
            );
            if f != &expected {
                return Err(format!("RE from line {from} yields `{expected}`"));
            }
        }
    }
    Ok(())
}

/// Verifies each line in order and stops at the first faulty one.
pub fn check_proof(p: &Proof, l: &LogicDescriptor) -> ProofVerdict {
    if p.lines.is_empty() {
        return ProofVerdict::Rejected { line: 0, reason: "empty proof".into() };
    }
    for n in 1..=p.lines.len() {
        if let Err(reason) = check_line(&p.lines, n, l) {
            return ProofVerdict::Rejected { line: n, reason };
        }
    }
    ProofVerdict::Accepted { lines: p.lines.len() }
}

/// `Γ ⊢ φ` witnessed by a proof of `(ψ1 & (ψ2 & ...)) -> φ` for the selected
/// premises `ψ1, ψ2, ...`, or of `φ` itself when nothing is selected.
pub fn check_entailment_certificate(
    gamma: &[Formula],
    phi: &Formula,
    selection: &[Formula],
    p: &Proof,
    l: &LogicDescriptor,
) -> Result<ProofVerdict, LogicError> {
    if let Some(missing) = selection.iter().find(|s| !gamma.contains(s)) {
        return Err(LogicError::SelectionNotInPremises(missing.clone()));
    }
    let verdict = check_proof(p, l);
    if !verdict.is_accepted() {
        return Ok(verdict);
    }
    let expected = match Formula::conjunction(selection) {
        Some(c) => Formula::implies(c, phi.clone()),
        None => phi.clone(),
    };
    let last = &p.lines[p.lines.len() - 1].formula;
    if last != &expected {
        return Ok(ProofVerdict::Rejected { line: p.lines.len(), reason: format!("last line should be `{expected}`") });
    }
    Ok(verdict)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogicFile {
    #[serde(default)]
    extensions: Vec<String>,
    #[serde(default)]
    cg: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum BindingValue {
    Group(Vec<u32>),
    Formula(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum JustFile {
    Taut,
    Axiom {
        schema: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        binding: Option<BTreeMap<String, BindingValue>>,
    },
    Mp {
        from: [usize; 2],
    },
    Re {
        from: usize,
        group: Vec<u32>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    formula: String,
    just: JustFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProofFile {
    #[serde(default)]
    logic: Option<LogicFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    premises: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    conclusion: Option<String>,
    lines: Vec<LineFile>,
}

/// An entailment claim `premises ⊢ conclusion`, certified by the proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub premises: Vec<Formula>,
    pub selection: Vec<Formula>,
    pub conclusion: Formula,
}

/// A proof file: the logic, the proof and optionally an entailment claim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofDocument {
    pub logic: LogicDescriptor,
    pub proof: Proof,
    pub certificate: Option<Certificate>,
}

fn formula_field(text: &str, field: impl Into<String>) -> Result<Formula, LogicError> {
    parse(text).map_err(|error| LogicError::Formula { field: field.into(), error })
}

fn group_of(ids: &[u32], ctx: &str) -> Result<Group, LogicError> {
    Group::new(ids.iter().copied().map(AgentId)).map_err(|e| LogicError::Invalid(format!("{ctx}: {e}")))
}

fn binding_from(map: &BTreeMap<String, BindingValue>, n: usize) -> Result<SyntacticBinding, LogicError> {
    let mut b = SyntacticBinding::default();
    for (key, value) in map {
        match value {
            BindingValue::Group(ids) => {
                let v: GroupVar = key.parse()?;
                b.groups.insert(v, group_of(ids, &format!("line {n}: binding {key}"))?);
            }
            BindingValue::Formula(text) => {
                let v: SetVar = key.parse()?;
                b.values.insert(v, formula_field(text, format!("line {n}: binding {key}"))?);
            }
        }
    }
    Ok(b)
}

impl ProofDocument {
    pub fn from_json_str(text: &str) -> Result<Self, LogicError> {
        let file: ProofFile = serde_json::from_str(text).map_err(|e| LogicError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let logic = match &file.logic {
            Some(lf) => {
                let exts = lf.extensions.iter().map(|s| s.parse()).collect::<Result<Vec<SchemaId>, _>>()?;
                LogicDescriptor::new(exts, lf.cg)
            }
            None => LogicDescriptor::base(),
        };
        let mut lines = Vec::with_capacity(file.lines.len());
        for (i, lf) in file.lines.iter().enumerate() {
            let n = i + 1;
            let formula = parse(&lf.formula).map_err(|error| LogicError::LineFormula { line: n, error })?;
            let justification = match &lf.just {
                JustFile::Taut => Justification::Taut,
                JustFile::Axiom { schema, binding } => Justification::Axiom {
                    schema: schema.parse()?,
                    binding: binding.as_ref().map(|m| binding_from(m, n)).transpose()?,
                },
                JustFile::Mp { from } => Justification::Mp { minor: from[0], major: from[1] },
                JustFile::Re { from, group } => {
                    Justification::Re { from: *from, group: group_of(group, &format!("line {n}: group"))? }
                }
            };
            lines.push(ProofLine { formula, justification });
        }
        let parse_list = |xs: &Option<Vec<String>>, field: &str| -> Result<Vec<Formula>, LogicError> {
            xs.iter().flatten().enumerate().map(|(i, t)| formula_field(t, format!("{field}[{i}]"))).collect()
        };
        let certificate = match &file.conclusion {
            Some(c) => Some(Certificate {
                premises: parse_list(&file.premises, "premises")?,
                selection: parse_list(&file.selection, "selection")?,
                conclusion: formula_field(c, "conclusion")?,
            }),
            None if file.premises.is_some() || file.selection.is_some() => {
                return Err(LogicError::Invalid("premises or selection given without a conclusion".into()))
            }
            None => None,
        };
        Ok(ProofDocument { logic, proof: Proof { lines }, certificate })
    }

    pub fn to_json_string(&self) -> String {
        let strings = |fs: &[Formula]| fs.iter().map(|f| f.to_string()).collect::<Vec<_>>();
        let ids = |g: &Group| g.members().iter().map(|a| a.0).collect::<Vec<_>>();
        let lines = self
            .proof
            .lines
            .iter()
            .map(|l| LineFile {
                formula: l.formula.to_string(),
                just: match &l.justification {
                    Justification::Taut => JustFile::Taut,
                    Justification::Axiom { schema, binding } => JustFile::Axiom {
                        schema: schema.to_string().to_ascii_lowercase(),
                        binding: binding.as_ref().map(|b| {
                            b.groups
                                .iter()
                                .map(|(v, g)| (v.to_string(), BindingValue::Group(ids(g))))
                                .chain(
                                    b.values.iter().map(|(v, f)| (v.to_string(), BindingValue::Formula(f.to_string()))),
                                )
                                .collect()
                        }),
                    },
                    Justification::Mp { minor, major } => JustFile::Mp { from: [*minor, *major] },
                    Justification::Re { from, group } => JustFile::Re { from: *from, group: ids(group) },
                },
            })
            .collect();
        let file = ProofFile {
            logic: Some(LogicFile {
                extensions: self
                    .logic
                    .extensions()
                    .iter()
                    .filter(|s| !(self.logic.replaces_b1() && **s == SchemaId::CG))
                    .map(|s| s.to_string().to_ascii_lowercase())
                    .collect(),
                cg: self.logic.replaces_b1(),
            }),
            premises: self.certificate.as_ref().map(|c| strings(&c.premises)),
            selection: self.certificate.as_ref().map(|c| strings(&c.selection)),
            conclusion: self.certificate.as_ref().map(|c| c.conclusion.to_string()),
            lines,
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// Checks the proof, and the entailment claim when there is one.
    pub fn verify(&self) -> Result<ProofVerdict, LogicError> {
        match &self.certificate {
            Some(c) => check_entailment_certificate(&c.premises, &c.conclusion, &c.selection, &self.proof, &self.logic),
            None => Ok(check_proof(&self.proof, &self.logic)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn line(f: &str, justification: Justification) -> ProofLine {
        ProofLine { formula: p(f), justification }
    }

    fn axiom(s: &str) -> Justification {
        Justification::Axiom { schema: s.parse().unwrap(), binding: None }
    }

    #[test]
    fn one_line_tautology() {
        let proof = Proof { lines: vec![line("p -> p", Justification::Taut)] };
        assert_eq!(check_proof(&proof, &LogicDescriptor::base()), ProofVerdict::Accepted { lines: 1 });
    }

    #[test]
    fn bad_modus_ponens_is_rejected_at_its_line() {
        let proof = Proof {
            lines: vec![
                line("p -> p", Justification::Taut),
                line("q | ~q", Justification::Taut),
                line("q", Justification::Mp { minor: 1, major: 2 }),
            ],
        };
        assert!(matches!(check_proof(&proof, &LogicDescriptor::base()), ProofVerdict::Rejected { line: 3, .. }));
        let forward = Proof {
            lines: vec![line("p -> p", Justification::Taut), line("p", Justification::Mp { minor: 1, major: 3 })],
        };
        assert!(matches!(check_proof(&forward, &LogicDescriptor::base()), ProofVerdict::Rejected { line: 2, .. }));
    }

    #[test]
    fn replacement_of_equivalents() {
        let g = Group::of(&[1, 2]).unwrap();
        let proof = Proof {
            lines: vec![
                line("p & true <-> p", Justification::Taut),
                line("[1,2](p & true) <-> [1,2]p", Justification::Re { from: 1, group: g.clone() }),
            ],
        };
        assert!(check_proof(&proof, &LogicDescriptor::base()).is_accepted());
        let wrong = Proof {
            lines: vec![
                line("p & true <-> p", Justification::Taut),
                line("[1](p & true) <-> [1]p", Justification::Re { from: 1, group: g }),
            ],
        };
        assert!(!check_proof(&wrong, &LogicDescriptor::base()).is_accepted());
    }

    #[test]
    fn axioms_must_belong_to_the_logic() {
        let proof = Proof { lines: vec![line("[2]true", axiom("nec:2"))] };
        assert!(!check_proof(&proof, &LogicDescriptor::base()).is_accepted());
        assert!(check_proof(&proof, &LogicDescriptor::base().with(SchemaId::Nec(AgentId(2)))).is_accepted());
    }

    #[test]
    fn explicit_bindings_are_checked() {
        let b = SyntacticBinding::default()
            .group(GroupVar::G, Group::of(&[1]).unwrap())
            .group(GroupVar::H, Group::of(&[2]).unwrap());
        let ok = Proof {
            lines: vec![line(
                "[1,2]true -> [1]true",
                Justification::Axiom { schema: SchemaId::B2, binding: Some(b.clone()) },
            )],
        };
        assert!(check_proof(&ok, &LogicDescriptor::base()).is_accepted());
        let bad = Proof {
            lines: vec![line("[1,2]true -> [2]true", Justification::Axiom { schema: SchemaId::B2, binding: Some(b) })],
        };
        assert!(!check_proof(&bad, &LogicDescriptor::base()).is_accepted());
    }

    #[test]
    fn entailment_certificates() {
        let gamma = vec![p("[1]p"), p("[2]q")];
        let proof = Proof { lines: vec![line("([1]p & [2]q) -> [1,2](p & q)", axiom("b1"))] };
        let base = LogicDescriptor::base();
        let v = check_entailment_certificate(&gamma, &p("[1,2](p & q)"), &gamma, &proof, &base).unwrap();
        assert!(v.is_accepted());
        // reversed selection order changes the expected last line
        let rev = vec![gamma[1].clone(), gamma[0].clone()];
        let v = check_entailment_certificate(&gamma, &p("[1,2](p & q)"), &rev, &proof, &base).unwrap();
        assert!(matches!(v, ProofVerdict::Rejected { line: 1, .. }));
        assert!(matches!(
            check_entailment_certificate(&gamma, &p("q"), &[p("r")], &proof, &base),
            Err(LogicError::SelectionNotInPremises(_))
        ));
        let theorem = Proof { lines: vec![line("p | ~p", Justification::Taut)] };
        assert!(check_entailment_certificate(&[], &p("p | ~p"), &[], &theorem, &base).unwrap().is_accepted());
        let bogus = Proof { lines: vec![line("p -> q", Justification::Taut)] };
        let v = check_entailment_certificate(&[p("p")], &p("q"), &[p("p")], &bogus, &base).unwrap();
        assert!(!v.is_accepted());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "logic": {"extensions": ["nec:2"], "cg": false},
            "premises": ["[1]p"], "selection": ["[1]p"], "conclusion": "[1,2]p",
            "lines": [
                {"formula": "[2]true", "just": {"type": "axiom", "schema": "nec:2"}},
                {"formula": "[1,2]true -> [1]true", "just": {"type": "axiom", "schema": "b2", "binding": {"G": [1], "H": [2]}}},
                {"formula": "p & true <-> p", "just": {"type": "taut"}},
                {"formula": "[1](p & true) <-> [1]p", "just": {"type": "re", "from": 3, "group": [1]}},
                {"formula": "true", "just": {"type": "mp", "from": [1, 2]}}
            ] }"#;
        let doc = ProofDocument::from_json_str(text).unwrap();
        assert_eq!(doc.proof.lines.len(), 5);
        assert_eq!(doc.certificate.as_ref().unwrap().conclusion, p("[1,2]p"));
        let back = ProofDocument::from_json_str(&doc.to_json_string()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn json_errors_carry_positions() {
        let e =
            ProofDocument::from_json_str("{\"lines\": [\n  {\"formula\": \"p\", \"just\": {\"type\": \"magic\"}}]}")
                .unwrap_err();
        assert!(matches!(e, LogicError::Json { line: 2, .. }), "{e:?}");
        let e = ProofDocument::from_json_str(
            r#"{"lines": [{"formula": "p", "just": {"type": "taut"}}, {"formula": "p &", "just": {"type": "taut"}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(e, LogicError::LineFormula { line: 2, .. }), "{e:?}");
        let e = ProofDocument::from_json_str(r#"{"logic": {"extensions": ["nec"]}, "lines": []}"#).unwrap_err();
        assert!(matches!(e, LogicError::UnknownSchema(_)));
        let e = ProofDocument::from_json_str(
            r#"{"lines": [{"formula": "[1]p", "just": {"type": "re", "from": 1, "group": []}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(e, LogicError::Invalid(_)));
    }
}
