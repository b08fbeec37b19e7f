//! The `nbhd` command line.
//!
//! Exit status 0 means the property holds, the proof is accepted or the
//! artifact was written; 1 means refuted, with a witness in the report; 2 is
//! a usage or input error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::{parse, Group, ParseError};
use crate::frames::{check_condition, close_model, Closure, FrameCondition, FrameError};
use crate::logics::{check_schema_semantically, LogicError, ProofDocument, ProofVerdict, SchemaId, SetRange};
use crate::model::{FixtureId, Model, ModelError};
use crate::search::{find_countermodel, PoolPolicy, SearchBounds, SearchError, SearchMode, Target, Witness};

#[derive(Debug, Parser)]
#[command(name = "nbhd", version, about = "Neighbourhood modal logic with group modalities by pointwise intersection")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula on a model, at one world or at all of them.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        world: Option<String>,
    },
    /// Search generated models for a countermodel to a formula or schema.
    Valid {
        #[arg(long, required_unless_present = "schema", conflicts_with = "schema")]
        formula: Option<String>,
        #[arg(long)]
        schema: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_worlds: usize,
        /// Comma-separated agent ids.
        #[arg(long, default_value = "1,2")]
        agents: String,
        /// Comma-separated atom names.
        #[arg(long, default_value = "p")]
        atoms: String,
        /// Enumerate every model within the bounds instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Required unless --exhaustive.
        #[arg(long)]
        seed: Option<u64>,
        /// Frame condition every generated model must satisfy (repeatable).
        #[arg(long = "constraint")]
        constraints: Vec<String>,
        /// Set range for schema metavariables: all-subsets or definable.
        #[arg(long, default_value = "all-subsets")]
        range: String,
        /// Groups for schema metavariables, e.g. "1;2;1,2". Defaults to
        /// each model's own pool.
        #[arg(long)]
        pool: Option<String>,
    },
    /// Check an axiom schema on a model.
    Schema {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        schema: String,
        /// all-subsets or definable.
        #[arg(long, default_value = "all-subsets")]
        mode: String,
        /// Groups for the group metavariables, e.g. "1;2;1,2".
        #[arg(long)]
        pool: Option<String>,
    },
    /// Check a frame condition on a model.
    Frame {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        condition: String,
    },
    /// Close every agent's neighbourhoods under supersets or intersections.
    Close {
        #[arg(long)]
        model: PathBuf,
        /// supersets or intersections
        closure: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a proof or entailment certificate file.
    Proof {
        #[arg(long)]
        file: PathBuf,
    },
    /// Write one of the built-in example models as JSON.
    Fixture {
        /// M1, M2, M3, M4 or NONREFLEXIVE
        name: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Rerun the built-in worked examples.
    Reproduce { target: ReproduceTarget },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    /// M1–M4 each refute exactly one of B1–B4.
    #[value(alias = "lemma3.1")]
    Independence,
    /// T over single agents holds on a non-reflexive model, T over {1,2} fails.
    #[value(alias = "sec5.2")]
    Nonreflexive,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}: {1}")]
    ModelFile(String, ModelError),
    #[error("{0}: {1}")]
    ProofFile(String, LogicError),
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// What a command found: whether it refutes something, and how to say so.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub refuted: bool,
    pub text: String,
    pub json: Value,
}

impl Report {
    fn new(refuted: bool, text: impl Into<String>, mut json: Value) -> Self {
        if let Value::Object(map) = &mut json {
            map.insert("status".into(), json!(if refuted { "refuted" } else { "ok" }));
        }
        Report { refuted, text: text.into(), json }
    }

    pub fn exit_code(&self) -> i32 {
        if self.refuted {
            1
        } else {
            0
        }
    }
}

/// Result of one invocation: exit status and the text for stdout/stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let stdout = if cli.json {
                serde_json::to_string_pretty(&report.json).expect("serializable")
            } else {
                report.text.clone()
            };
            Outcome { code: report.exit_code(), stdout: stdout + "\n", stderr: String::new() }
        }
        Err(e) => {
            let stdout = if cli.json {
                serde_json::to_string_pretty(&json!({"status": "error", "error": e.to_string()})).expect("serializable")
                    + "\n"
            } else {
                String::new()
            };
            Outcome { code: 2, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    Model::from_json_str(&read(path)?).map_err(|e| CliError::ModelFile(path.display().to_string(), e))
}

/// `"1;2;1,2"` → `[{1}, {2}, {1,2}]`, in the given order.
pub fn parse_pool(text: &str) -> Result<Vec<Group>, CliError> {
    text.split(';').map(|g| g.parse::<Group>().map_err(|e| CliError::Usage(format!("pool group `{g}`: {e}")))).collect()
}

fn parse_list<T, E: std::fmt::Display>(
    text: &str,
    what: &str,
    f: impl Fn(&str) -> Result<T, E>,
) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| CliError::Usage(format!("{what} `{s}`: {e}"))))
        .collect()
}

fn pool_json(pool: &[Group]) -> Value {
    json!(pool.iter().map(|g| g.to_string()).collect::<Vec<_>>())
}

pub fn execute(c: &Command) -> Result<Report, CliError> {
    match c {
        Command::Check { model, formula, world } => check(&load_model(model)?, formula, world.as_deref()),
        Command::Valid {
            formula,
            schema,
            max_worlds,
            agents,
            atoms,
            exhaustive,
            trials,
            seed,
            constraints,
            range,
            pool,
        } => {
            let mode = match (exhaustive, seed) {
                (true, _) => SearchMode::Exhaustive,
                (false, Some(seed)) => SearchMode::Random { trials: *trials, seed: *seed },
                (false, None) => {
                    return Err(CliError::Usage("random search needs --seed (or use --exhaustive)".into()))
                }
            };
            let bounds = SearchBounds {
                max_worlds: *max_worlds,
                agents: parse_list(agents, "agent", |s| s.parse::<u32>().map(crate::formula::AgentId))?,
                atoms: parse_list(atoms, "atom", |s| Ok::<_, String>(s.to_string()))?,
                mode,
                frame_constraints: constraints
                    .iter()
                    .map(|s| s.parse::<FrameCondition>())
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let target = match (formula, schema) {
                (Some(f), _) => Target::Formula(parse(f)?),
                (None, Some(s)) => Target::Schema {
                    schema: s.parse()?,
                    range: range.parse()?,
                    pool: match pool {
                        Some(p) => PoolPolicy::Fixed(parse_pool(p)?),
                        None => PoolPolicy::Model,
                    },
                },
                (None, None) => return Err(CliError::Usage("give --formula or --schema".into())),
            };
            valid(&target, &bounds)
        }
        Command::Schema { model, schema, mode, pool } => {
            let m = load_model(model)?;
            let pool = match pool {
                Some(p) => parse_pool(p)?,
                None => m.default_pool(),
            };
            schema_report(&m, schema.parse()?, mode.parse()?, &pool)
        }
        Command::Frame { model, condition } => frame(&load_model(model)?, &condition.parse()?),
        Command::Close { model, closure, out } => {
            let closure: Closure = closure.parse()?;
            let closed = close_model(&load_model(model)?, closure)?;
            write(out, &closed.to_json_string())?;
            let text = format!("wrote {} (closed under {closure})", out.display());
            Ok(Report::new(false, text, json!({"closure": closure.to_string(), "out": out.display().to_string()})))
        }
        Command::Proof { file } => {
            let doc = ProofDocument::from_json_str(&read(file)?)
                .map_err(|e| CliError::ProofFile(file.display().to_string(), e))?;
            let verdict = doc.verify()?;
            let j = match &verdict {
                ProofVerdict::Accepted { lines } => json!({"verdict": "accepted", "lines": lines}),
                ProofVerdict::Rejected { line, reason } => {
                    json!({"verdict": "rejected", "line": line, "reason": reason})
                }
            };
            Ok(Report::new(!verdict.is_accepted(), verdict.to_string(), j))
        }
        Command::Fixture { name, out } => {
            let id: FixtureId = name.parse()?;
            let text = id.model().to_json_string();
            match out {
                Some(path) => {
                    write(path, &text)?;
                    let msg = format!("wrote {id} to {}", path.display());
                    Ok(Report::new(false, msg, json!({"fixture": id.to_string(), "out": path.display().to_string()})))
                }
                None => Ok(Report::new(
                    false,
                    text,
                    json!({"fixture": id.to_string(), "model": id.model().to_json_value()}),
                )),
            }
        }
        Command::Reproduce { target } => match target {
            ReproduceTarget::Independence => reproduce_independence(),
            ReproduceTarget::Nonreflexive => reproduce_nonreflexive(),
        },
    }
}

fn check(m: &Model, formula: &str, world: Option<&str>) -> Result<Report, CliError> {
    let f = parse(formula)?;
    let truth = m.truth_set(&f)?;
    match world {
        Some(label) => {
            let w = m.world(label)?;
            let holds = truth.contains(w);
            let text = format!("{} at {label}", if holds { "true" } else { "false" });
            Ok(Report::new(!holds, text, json!({"formula": f.to_string(), "world": label, "value": holds})))
        }
        None => {
            let truth_json = json!(truth.iter().map(|w| m.label(w).to_string()).collect::<Vec<_>>());
            let j = json!({"formula": f.to_string(), "truth_set": truth_json});
            match m.worlds().find(|w| !truth.contains(*w)) {
                None => Ok(Report::new(false, "valid", j)),
                Some(w) => {
                    let text = format!("false at {} (truth set {})", m.label(w), m.format_set(&truth));
                    let mut j = j;
                    j["world"] = json!(m.label(w));
                    Ok(Report::new(true, text, j))
                }
            }
        }
    }
}

fn schema_report(m: &Model, s: SchemaId, range: SetRange, pool: &[Group]) -> Result<Report, CliError> {
    let v = check_schema_semantically(m, s, range, pool)?;
    let mut j = json!({"schema": s.to_string(), "mode": range.to_string(), "pool": pool_json(pool)});
    let text = match (&v.counterexample, &v.all_subsets_counterexample) {
        (Some(cx), _) => {
            j["witness"] = json!(cx.describe(m));
            format!("refuted: {}", cx.describe(m))
        }
        (None, Some(other)) => {
            j["all_subsets_witness"] = json!(other.describe(m));
            format!("valid\nnote: over all subsets the schema fails: {}", other.describe(m))
        }
        (None, None) => "valid".to_string(),
    };
    Ok(Report::new(!v.is_valid(), text, j))
}

fn frame(m: &Model, c: &FrameCondition) -> Result<Report, CliError> {
    let v = check_condition(m, c)?;
    let mut j = json!({"condition": c.to_string(), "notes": v.notes});
    let mut text = match &v.witness {
        None => "holds".to_string(),
        Some(w) => {
            let desc = w.describe(m);
            j["witness"] = json!(desc);
            format!("fails: {desc}")
        }
    };
    for n in &v.notes {
        text.push_str(&format!("\nnote: {n}"));
    }
    Ok(Report::new(!v.holds(), text, j))
}

fn valid(target: &Target, b: &SearchBounds) -> Result<Report, CliError> {
    let what = match target {
        Target::Formula(f) => json!({"formula": f.to_string()}),
        Target::Schema { schema, range, .. } => json!({"schema": schema.to_string(), "range": range.to_string()}),
    };
    match find_countermodel(target, b)? {
        None => {
            let mut j = what;
            j["countermodel"] = Value::Null;
            Ok(Report::new(false, "no countermodel within bounds (this is not a validity proof)", j))
        }
        Some(cm) => {
            let mut j = what;
            j["index"] = json!(cm.index);
            j["witness"] = json!(cm.describe_witness());
            j["model"] = cm.model.to_json_value();
            if let Witness::World(w) = cm.witness {
                j["world"] = json!(cm.model.label(w));
            }
            Ok(Report::new(true, cm.to_string(), j))
        }
    }
}

/// `(fixture, refuted schema, witness)` rows plus whether each fixture
/// refutes exactly its own schema.
fn reproduce_independence() -> Result<Report, CliError> {
    let fixtures = [FixtureId::M1, FixtureId::M2, FixtureId::M3, FixtureId::M4];
    let schemas = [SchemaId::B1, SchemaId::B2, SchemaId::B3, SchemaId::B4];
    let mut lines = vec![format!("{:<8}{:<10}{:<10}{:<10}{}", "model", "B1", "B2", "B3", "B4")];
    let mut witnesses = Vec::new();
    let mut rows = Vec::new();
    let mut matches = true;
    for (k, id) in fixtures.iter().enumerate() {
        let m = id.model();
        let pool = m.default_pool();
        let mut line = format!("{:<8}", id.to_string());
        let mut cells = serde_json::Map::new();
        for (j, s) in schemas.iter().enumerate() {
            let v = check_schema_semantically(&m, *s, SetRange::AllSubsets, &pool)?;
            matches &= v.is_valid() == (j != k);
            let cell = if v.is_valid() { "valid" } else { "refuted" };
            line.push_str(&format!("{cell:<10}"));
            cells.insert(s.to_string(), json!(cell));
            if let Some(cx) = &v.counterexample {
                witnesses.push(format!("{id} refutes {s}: {}", cx.describe(&m)));
                cells.insert(format!("{s}_witness"), json!(cx.describe(&m)));
            }
        }
        lines.push(line.trim_end().to_string());
        rows.push(json!({"model": id.to_string(), "results": cells}));
    }
    lines.push(String::new());
    lines.extend(witnesses);
    lines.push(if matches { "each model refutes exactly its own schema" } else { "MISMATCH" }.to_string());
    Ok(Report::new(!matches, lines.join("\n"), json!({"rows": rows, "reproduced": matches})))
}

fn reproduce_nonreflexive() -> Result<Report, CliError> {
    let m = FixtureId::NonReflexive.model();
    let g = |ids: &[u32]| Group::of(ids).expect("nonempty");
    let singles = vec![g(&[1]), g(&[2])];
    let with_pair = vec![g(&[1]), g(&[2]), g(&[1, 2])];
    let mut lines = vec!["model NONREFLEXIVE, schema TG, definable sets only".to_string()];
    let mut runs = Vec::new();
    let mut outcomes = Vec::new();
    for pool in [&singles, &with_pair] {
        let v = check_schema_semantically(&m, SchemaId::TG, SetRange::Definable, pool)?;
        let names: Vec<String> = pool.iter().map(|g| format!("{{{g}}}")).collect();
        let result = match &v.counterexample {
            None => "valid".to_string(),
            Some(cx) => format!("refuted: {}", cx.describe(&m)),
        };
        lines.push(format!("groups {}: {result}", names.join(" ")));
        if let Some(other) = &v.all_subsets_counterexample {
            lines.push(format!("  note: over all subsets it fails: {}", other.describe(&m)));
        }
        runs.push(json!({
            "pool": pool_json(pool),
            "valid": v.is_valid(),
            "witness": v.counterexample.as_ref().map(|c| c.describe(&m)),
            "all_subsets_witness": v.all_subsets_counterexample.as_ref().map(|c| c.describe(&m)),
        }));
        outcomes.push(v);
    }
    let reproduced = outcomes[0].is_valid()
        && outcomes[1].counterexample.as_ref().is_some_and(|cx| {
            cx.world.0 == 0
                && cx.binding.groups.values().next() == Some(&g(&[1, 2]))
                && cx.binding.values.values().all(|x| x.is_empty())
        });
    lines.push(
        if reproduced { "single-agent T holds, T for {1,2} fails at w with phi empty" } else { "MISMATCH" }.to_string(),
    );
    Ok(Report::new(!reproduced, lines.join("\n"), json!({"runs": runs, "reproduced": reproduced})))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("nbhd").chain(args.iter().copied()))
    }

    #[test]
    fn reproduce_targets_succeed() {
        let out = run_args(&["reproduce", "independence"]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        assert!(out.stdout.contains("M1 refutes B1: world wp, G={1}, H={2}, phi={wp,wr}, psi={wq,wr}"));
        let out = run_args(&["reproduce", "lemma3.1"]);
        assert_eq!(out.code, 0);
        let out = run_args(&["reproduce", "sec5.2"]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        assert!(out.stdout.contains("refuted: world w, G={1,2}, phi={}"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["bogus"]).code, 2);
        assert_eq!(run_args(&["valid", "--formula", "p"]).code, 2);
        assert_eq!(run_args(&["check", "--model", "/nonexistent.json", "--formula", "p"]).code, 2);
        assert_eq!(run_args(&["--help"]).code, 0);
    }

    #[test]
    fn pool_syntax() {
        let pool = parse_pool("1;2;1,2").unwrap();
        assert_eq!(pool.iter().map(|g| g.to_string()).collect::<Vec<_>>(), vec!["1", "2", "1,2"]);
        assert!(parse_pool("1;;2").is_err());
    }
}
