//! Python bindings: formulas, models, schema and frame checks, proof
//! checking and countermodel search.

use std::str::FromStr;

use nbhd::frames::{check_condition, close_model, Closure, FrameCondition};
use nbhd::logics::{check_schema_semantically, LogicDescriptor, ProofDocument, ProofVerdict, SchemaId, SetRange};
use nbhd::search::{find_countermodel, soundness_fuzz, PoolPolicy, SearchBounds, Target};
use nbhd::{Formula, Group, Model};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parsed<T: FromStr>(text: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(err)
}

fn groups(pool: Vec<Vec<u32>>) -> PyResult<Vec<Group>> {
    pool.iter().map(|g| Group::of(g).map_err(err)).collect()
}

#[pyclass(name = "Formula", frozen, from_py_object)]
#[derive(Clone)]
struct PyFormula(Formula);

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        nbhd::parse(text).map(PyFormula).map_err(err)
    }

    fn atoms(&self) -> Vec<String> {
        self.0.atoms().into_iter().collect()
    }

    fn size(&self) -> usize {
        self.0.size()
    }

    fn is_tautology(&self) -> bool {
        self.0.is_propositional_tautology()
    }

    fn __str__(&self) -> String {
        self.0.render()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.0.render())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Accepts either a `Formula` or formula text.
fn formula_arg(f: &Bound<'_, PyAny>) -> PyResult<Formula> {
    if let Ok(f) = f.extract::<PyRef<'_, PyFormula>>() {
        return Ok(f.0.clone());
    }
    let text: String = f.extract()?;
    nbhd::parse(&text).map_err(err)
}

#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(Model);

impl PyModel {
    fn labels(&self, s: &nbhd::WorldSet) -> Vec<String> {
        s.iter().map(|w| self.0.label(w).to_string()).collect()
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Model::from_json_str(text).map(PyModel).map_err(err)
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        Ok(PyModel(parsed::<nbhd::FixtureId>(name)?.model()))
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    fn worlds(&self) -> Vec<String> {
        self.0.domain().labels().to_vec()
    }

    fn default_pool(&self) -> Vec<Vec<u32>> {
        self.0.default_pool().iter().map(|g| g.members().iter().map(|a| a.0).collect()).collect()
    }

    fn truth_set(&self, formula: &Bound<'_, PyAny>) -> PyResult<Vec<String>> {
        let t = self.0.truth_set(&formula_arg(formula)?).map_err(err)?;
        Ok(self.labels(&t))
    }

    fn satisfies(&self, world: &str, formula: &Bound<'_, PyAny>) -> PyResult<bool> {
        let w = self.0.world(world).map_err(err)?;
        self.0.satisfies(w, &formula_arg(formula)?).map_err(err)
    }

    fn valid(&self, formula: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.0.valid(&formula_arg(formula)?).map_err(err)
    }

    fn group_neighbourhood(&self, group: Vec<u32>, world: &str) -> PyResult<Vec<Vec<String>>> {
        let g = Group::of(&group).map_err(err)?;
        let w = self.0.world(world).map_err(err)?;
        let fam = self.0.group_neighbourhood(&g, w).map_err(err)?;
        Ok(fam.iter().map(|s| self.labels(s)).collect())
    }

    /// The first counterexample as text, or `None` when the schema is valid.
    #[pyo3(signature = (schema, range = "all-subsets", pool = None))]
    fn check_schema(&self, schema: &str, range: &str, pool: Option<Vec<Vec<u32>>>) -> PyResult<Option<String>> {
        let pool = match pool {
            Some(p) => groups(p)?,
            None => self.0.default_pool(),
        };
        let v = check_schema_semantically(&self.0, parsed::<SchemaId>(schema)?, parsed::<SetRange>(range)?, &pool)
            .map_err(err)?;
        Ok(v.counterexample.map(|w| w.describe(&self.0)))
    }

    /// The violation as text, or `None` when the condition holds.
    fn check_condition(&self, condition: &str) -> PyResult<Option<String>> {
        let v = check_condition(&self.0, &parsed::<FrameCondition>(condition)?).map_err(err)?;
        Ok(v.witness.map(|w| w.describe(&self.0)))
    }

    fn close(&self, closure: &str) -> PyResult<PyModel> {
        close_model(&self.0, parsed::<Closure>(closure)?).map(PyModel).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// `(accepted, rejected_line, message)` for a proof file's JSON text.
#[pyfunction]
fn check_proof(text: &str) -> PyResult<(bool, Option<usize>, String)> {
    let v = ProofDocument::from_json_str(text).and_then(|d| d.verify()).map_err(err)?;
    let line = match &v {
        ProofVerdict::Accepted { .. } => None,
        ProofVerdict::Rejected { line, .. } => Some(*line),
    };
    Ok((v.is_accepted(), line, v.to_string()))
}

fn bounds(
    max_worlds: usize,
    agents: Vec<u32>,
    atoms: Vec<String>,
    seed: Option<u64>,
    trials: u64,
    constraints: Vec<String>,
) -> PyResult<SearchBounds> {
    let mut b = match seed {
        Some(seed) => SearchBounds::random(max_worlds, &agents, trials, seed),
        None => SearchBounds::exhaustive(max_worlds, &agents),
    };
    let atoms: Vec<&str> = atoms.iter().map(String::as_str).collect();
    b = b.with_atoms(&atoms);
    let cs = constraints.iter().map(|c| parsed::<FrameCondition>(c)).collect::<PyResult<Vec<_>>>()?;
    Ok(b.with_constraints(cs))
}

/// Searches for a model refuting a formula or schema. Exhaustive when no
/// seed is given. Returns `(model, witness)` or `None`.
#[pyfunction]
#[pyo3(signature = (
    formula = None, schema = None, *, max_worlds = 2, agents = vec![1, 2], atoms = vec!["p".to_string()],
    seed = None, trials = 1000, constraints = vec![], pool = None, range = "all-subsets"
))]
#[allow(clippy::too_many_arguments)]
fn countermodel(
    formula: Option<&Bound<'_, PyAny>>,
    schema: Option<&str>,
    max_worlds: usize,
    agents: Vec<u32>,
    atoms: Vec<String>,
    seed: Option<u64>,
    trials: u64,
    constraints: Vec<String>,
    pool: Option<Vec<Vec<u32>>>,
    range: &str,
) -> PyResult<Option<(PyModel, String)>> {
    let target = match (formula, schema) {
        (Some(f), None) => Target::Formula(formula_arg(f)?),
        (None, Some(s)) => Target::Schema {
            schema: parsed(s)?,
            range: parsed(range)?,
            pool: match pool {
                Some(p) => PoolPolicy::Fixed(groups(p)?),
                None => PoolPolicy::Model,
            },
        },
        _ => return Err(PyValueError::new_err("give exactly one of formula and schema")),
    };
    let b = bounds(max_worlds, agents, atoms, seed, trials, constraints)?;
    let found = find_countermodel(&target, &b).map_err(err)?;
    Ok(found.map(|c| {
        let text = c.describe_witness();
        (PyModel(c.model), text)
    }))
}

/// Checks the base schemas plus `extensions` on random models; returns the
/// number of violations.
#[pyfunction]
#[pyo3(signature = (seed, *, trials = 1000, max_worlds = 4, agents = vec![1, 2, 3], extensions = vec![], constraints = vec![]))]
fn fuzz(
    seed: u64,
    trials: u64,
    max_worlds: usize,
    agents: Vec<u32>,
    extensions: Vec<String>,
    constraints: Vec<String>,
) -> PyResult<usize> {
    let exts = extensions.iter().map(|e| parsed::<SchemaId>(e)).collect::<PyResult<Vec<_>>>()?;
    let b = bounds(max_worlds, agents, vec!["p".into(), "q".into()], Some(seed), trials, constraints)?;
    let report = soundness_fuzz(&LogicDescriptor::new(exts, false), &b).map_err(err)?;
    Ok(report.violations.len())
}

#[pyfunction]
fn parse(text: &str) -> PyResult<PyFormula> {
    PyFormula::new(text)
}

#[pymodule]
fn pynbhd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(check_proof, m)?)?;
    m.add_function(wrap_pyfunction!(countermodel, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    Ok(())
}
