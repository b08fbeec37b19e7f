//! Finite neighbourhood models and their semantics.
//!
//! Two flavours of model exist. An [`AgentModel`] stores one neighbourhood
//! function per agent and derives the neighbourhood of a group by pointwise
//! intersection: `N_G(w)` holds every `X_1 ∩ .. ∩ X_n` with one `X_j` drawn
//! from each member's family. A [`GeneralModel`] stores group neighbourhoods
//! directly; any group it does not mention has the family `{∅}` everywhere.

mod fixtures;
mod io;
mod worldset;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{AgentId, Formula, Group};

pub use fixtures::FixtureId;
pub use worldset::{World, WorldSet, MAX_WORLDS};

/// A duplicate-free family of world sets, ordered by bit value.
pub type Family = BTreeSet<WorldSet>;

/// Largest group whose neighbourhood is computed by pointwise intersection.
pub const MAX_GROUP_SIZE: usize = 8;
/// Upper bound on `∏ |N_i(w)|` for a single pointwise intersection.
pub const MAX_INTERSECTION_PRODUCT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("world index {0} out of range for a domain of {1} worlds")]
    WorldOutOfRange(usize, usize),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("unknown fixture `{0}` (expected one of M1, M2, M3, M4, NONREFLEXIVE)")]
    UnknownFixture(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("malformed model file at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
}

/// A neighbourhood function: one family of world sets per world.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NeighbourhoodMap {
    families: Vec<Family>,
}

impl NeighbourhoodMap {
    pub fn new(families: Vec<Family>) -> Self {
        NeighbourhoodMap { families }
    }

    /// The same family at each of `size` worlds.
    pub fn constant(size: usize, family: Family) -> Self {
        NeighbourhoodMap { families: vec![family; size] }
    }

    pub fn family(&self, w: World) -> &Family {
        &self.families[w.0]
    }

    pub fn family_mut(&mut self, w: World) -> &mut Family {
        &mut self.families[w.0]
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn is_constant(&self) -> bool {
        self.families.windows(2).all(|p| p[0] == p[1])
    }

    fn validate(&self, size: usize, what: &str) -> Result<(), ModelError> {
        if self.families.len() != size {
            return Err(ModelError::Invalid(format!(
                "{what}: {} families for a domain of {size} worlds",
                self.families.len()
            )));
        }
        if self.families.iter().flatten().any(|x| x.domain_size() != size) {
            return Err(ModelError::Invalid(format!("{what}: world set over a different domain")));
        }
        Ok(())
    }
}

/// World labels and valuation shared by both model flavours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    labels: Vec<String>,
    valuation: BTreeMap<String, WorldSet>,
}

impl Domain {
    pub fn new(labels: Vec<String>, valuation: BTreeMap<String, WorldSet>) -> Result<Self, ModelError> {
        if labels.is_empty() {
            return Err(ModelError::Invalid("the domain must be nonempty".into()));
        }
        if labels.len() > MAX_WORLDS {
            return Err(ModelError::Resource(format!("at most {MAX_WORLDS} worlds are supported")));
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(ModelError::Invalid("world labels must be unique".into()));
        }
        if let Some((atom, _)) = valuation.iter().find(|(_, s)| s.domain_size() != labels.len()) {
            return Err(ModelError::Invalid(format!("valuation of `{atom}` is over a different domain")));
        }
        Ok(Domain { labels, valuation })
    }

    /// Worlds labelled `w0`, `w1`, ...
    pub fn numbered(size: usize, valuation: BTreeMap<String, WorldSet>) -> Result<Self, ModelError> {
        Self::new((0..size).map(|i| format!("w{i}")).collect(), valuation)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn valuation(&self) -> &BTreeMap<String, WorldSet> {
        &self.valuation
    }
}

/// A model with one primitive neighbourhood function per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentModel {
    domain: Domain,
    agents: BTreeMap<AgentId, NeighbourhoodMap>,
}

impl AgentModel {
    pub fn new(domain: Domain, agents: BTreeMap<AgentId, NeighbourhoodMap>) -> Result<Self, ModelError> {
        for (a, map) in &agents {
            map.validate(domain.size(), &format!("agent {a}"))?;
        }
        Ok(AgentModel { domain, agents })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, NeighbourhoodMap> {
        &self.agents
    }

    pub fn agent(&self, a: AgentId) -> Option<&NeighbourhoodMap> {
        self.agents.get(&a)
    }

    /// Replaces every agent's map through `f`, keeping the domain.
    pub fn map_agents(&self, mut f: impl FnMut(AgentId, &NeighbourhoodMap) -> NeighbourhoodMap) -> AgentModel {
        AgentModel { domain: self.domain.clone(), agents: self.agents.iter().map(|(a, m)| (*a, f(*a, m))).collect() }
    }

    /// `N_i(w)`; absent agents have the empty family.
    pub fn family(&self, a: AgentId, w: World) -> Family {
        self.agents.get(&a).map(|m| m.family(w).clone()).unwrap_or_default()
    }

    /// Pointwise intersection over the members of `g` at `w`.
    pub fn group_family(&self, g: &Group, w: World) -> Result<Family, ModelError> {
        if g.len() > MAX_GROUP_SIZE {
            return Err(ModelError::Resource(format!("group {{{g}}} has more than {MAX_GROUP_SIZE} members")));
        }
        let empty = Family::new();
        let families: Vec<&Family> =
            g.members().iter().map(|a| self.agents.get(a).map_or(&empty, |m| m.family(w))).collect();
        let product = families.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
        match product {
            Some(p) if p <= MAX_INTERSECTION_PRODUCT => {}
            _ => {
                return Err(ModelError::Resource(format!(
                    "pointwise intersection for {{{g}}} exceeds {MAX_INTERSECTION_PRODUCT} combinations"
                )))
            }
        }
        // Intersecting member by member with deduplication at each stage
        // yields the same set as the full cartesian enumeration.
        let mut acc = families[0].clone();
        for next in &families[1..] {
            acc = acc.iter().flat_map(|x| next.iter().map(move |y| x.intersection(y))).collect();
        }
        Ok(acc)
    }
}

/// A model whose group neighbourhoods are primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralModel {
    domain: Domain,
    groups: BTreeMap<Group, NeighbourhoodMap>,
}

impl GeneralModel {
    pub fn new(domain: Domain, groups: BTreeMap<Group, NeighbourhoodMap>) -> Result<Self, ModelError> {
        for (g, map) in &groups {
            map.validate(domain.size(), &format!("group {{{g}}}"))?;
        }
        Ok(GeneralModel { domain, groups })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn groups(&self) -> &BTreeMap<Group, NeighbourhoodMap> {
        &self.groups
    }

    /// The stored family, or `{∅}` for an unmentioned group.
    pub fn group_family(&self, g: &Group, w: World) -> Family {
        match self.groups.get(g) {
            Some(m) => m.family(w).clone(),
            None => [WorldSet::empty(self.domain.size())].into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Agent(AgentModel),
    General(GeneralModel),
}

impl From<AgentModel> for Model {
    fn from(m: AgentModel) -> Self {
        Model::Agent(m)
    }
}

impl From<GeneralModel> for Model {
    fn from(m: GeneralModel) -> Self {
        Model::General(m)
    }
}

impl Model {
    pub fn domain(&self) -> &Domain {
        match self {
            Model::Agent(m) => &m.domain,
            Model::General(m) => &m.domain,
        }
    }

    pub fn size(&self) -> usize {
        self.domain().size()
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> {
        (0..self.size()).map(World)
    }

    pub fn label(&self, w: World) -> &str {
        &self.domain().labels[w.0]
    }

    /// Looks a world up by label.
    pub fn world(&self, label: &str) -> Result<World, ModelError> {
        self.domain()
            .labels
            .iter()
            .position(|l| l == label)
            .map(World)
            .ok_or_else(|| ModelError::UnknownWorld(label.to_string()))
    }

    fn check_world(&self, w: World) -> Result<(), ModelError> {
        if w.0 < self.size() {
            Ok(())
        } else {
            Err(ModelError::WorldOutOfRange(w.0, self.size()))
        }
    }

    pub fn full_set(&self) -> WorldSet {
        WorldSet::full(self.size())
    }

    pub fn empty_set(&self) -> WorldSet {
        WorldSet::empty(self.size())
    }

    /// `V(atom)`; unknown atoms are false everywhere.
    pub fn valuation(&self, atom: &str) -> WorldSet {
        self.domain().valuation.get(atom).copied().unwrap_or_else(|| self.empty_set())
    }

    pub fn as_agent(&self) -> Option<&AgentModel> {
        match self {
            Model::Agent(m) => Some(m),
            Model::General(_) => None,
        }
    }

    /// `N_G(w)`: derived by pointwise intersection for agent models, stored
    /// (or `{∅}`) for general models.
    pub fn group_neighbourhood(&self, g: &Group, w: World) -> Result<Family, ModelError> {
        self.check_world(w)?;
        match self {
            Model::Agent(m) => m.group_family(g, w),
            Model::General(m) => Ok(m.group_family(g, w)),
        }
    }

    /// Renders a world set with world labels, e.g. `{wp,wr}`.
    pub fn format_set(&self, s: &WorldSet) -> String {
        let names: Vec<&str> = s.iter().map(|w| self.label(w)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses a list of world labels into a set.
    pub fn set_of(&self, labels: &[&str]) -> Result<WorldSet, ModelError> {
        let mut s = self.empty_set();
        for l in labels {
            s.insert(self.world(l)?);
        }
        Ok(s)
    }

    /// Agents occurring in the model: keys of an agent model, members of the
    /// stored groups of a general model.
    pub fn mentioned_agents(&self) -> BTreeSet<AgentId> {
        match self {
            Model::Agent(m) => m.agents.keys().copied().collect(),
            Model::General(m) => m.groups.keys().flat_map(|g| g.members().iter().copied()).collect(),
        }
    }

    /// The stored groups of a general model; empty for agent models.
    pub fn mentioned_groups(&self) -> BTreeSet<Group> {
        match self {
            Model::Agent(_) => BTreeSet::new(),
            Model::General(m) => m.groups.keys().cloned().collect(),
        }
    }

    /// Groups for schema quantification: the stored groups plus every union
    /// of one to three mentioned agents, ordered by size then members.
    pub fn default_pool(&self) -> Vec<Group> {
        let agents: Vec<AgentId> = self.mentioned_agents().into_iter().collect();
        let mut pool: BTreeSet<Group> = self.mentioned_groups();
        pool.extend(unions_up_to_three(&agents));
        sort_pool(pool.into_iter().collect())
    }

    pub fn truth_set(&self, f: &Formula) -> Result<WorldSet, ModelError> {
        Evaluator::new(self).truth_set(f)
    }

    pub fn satisfies(&self, w: World, f: &Formula) -> Result<bool, ModelError> {
        self.check_world(w)?;
        Ok(self.truth_set(f)?.contains(w))
    }

    pub fn valid(&self, f: &Formula) -> Result<bool, ModelError> {
        Ok(self.truth_set(f)?.is_full())
    }

    /// The truth sets of this model, each with a shortest witness formula.
    ///
    /// Least family containing `∅`, `W` and the valuation sets, closed under
    /// complement, union and, for each group of `pool`, the box image
    /// `X ↦ {w : X ∈ N_G(w)}`. Witness ties break on rendered text.
    pub fn definable_sets(&self, pool: &[Group]) -> Result<BTreeMap<WorldSet, Formula>, ModelError> {
        let mut eval = Evaluator::new(self);
        let mut defs: BTreeMap<WorldSet, (Formula, String)> = BTreeMap::new();
        fn offer(defs: &mut BTreeMap<WorldSet, (Formula, String)>, set: WorldSet, f: Formula) -> bool {
            let text = f.render();
            match defs.get(&set) {
                Some((_, old)) if (old.len(), old.as_str()) <= (text.len(), text.as_str()) => false,
                _ => {
                    defs.insert(set, (f, text));
                    true
                }
            }
        }
        offer(&mut defs, self.empty_set(), Formula::Bottom);
        offer(&mut defs, self.full_set(), Formula::Top);
        for (atom, set) in &self.domain().valuation {
            offer(&mut defs, *set, Formula::atom(atom.clone()));
        }
        let images: Vec<(Group, Vec<Family>)> =
            pool.iter().map(|g| Ok((g.clone(), eval.families(g)?.to_vec()))).collect::<Result<_, ModelError>>()?;
        loop {
            let snapshot: Vec<(WorldSet, Formula)> = defs.iter().map(|(s, (f, _))| (*s, f.clone())).collect();
            let mut changed = false;
            for (x, fx) in &snapshot {
                changed |= offer(&mut defs, x.complement(), Formula::not(fx.clone()));
                for (g, fams) in &images {
                    let image = WorldSet::from_worlds(
                        self.size(),
                        fams.iter().enumerate().filter(|(_, fam)| fam.contains(x)).map(|(w, _)| w),
                    );
                    changed |= offer(&mut defs, image, Formula::boxed(g.clone(), fx.clone()));
                }
                for (y, fy) in &snapshot {
                    if x != y {
                        changed |= offer(&mut defs, x.union(y), Formula::or(fx.clone(), fy.clone()));
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(defs.into_iter().map(|(s, (f, _))| (s, f)).collect())
    }
}

pub(crate) fn unions_up_to_three(agents: &[AgentId]) -> Vec<Group> {
    let mut out = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        out.push(Group::singleton(*a));
        for (j, b) in agents.iter().enumerate().skip(i + 1) {
            out.push(Group::new([*a, *b]).expect("nonempty"));
            for c in agents.iter().skip(j + 1) {
                out.push(Group::new([*a, *b, *c]).expect("nonempty"));
            }
        }
    }
    out
}

/// Orders a pool by group size, then by members.
pub fn sort_pool(mut pool: Vec<Group>) -> Vec<Group> {
    pool.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    pool.dedup();
    pool
}

/// Memoizes group neighbourhoods of one model for repeated evaluation.
pub struct Evaluator<'m> {
    model: &'m Model,
    cache: HashMap<Group, Vec<Family>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Self {
        Evaluator { model, cache: HashMap::new() }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    /// `N_G(w)` for every world, indexed by world.
    pub fn families(&mut self, g: &Group) -> Result<&[Family], ModelError> {
        if !self.cache.contains_key(g) {
            let fams =
                self.model.worlds().map(|w| self.model.group_neighbourhood(g, w)).collect::<Result<Vec<_>, _>>()?;
            self.cache.insert(g.clone(), fams);
        }
        Ok(&self.cache[g])
    }

    /// Families already computed by [`Evaluator::families`].
    pub fn cached(&self, g: &Group) -> Option<&[Family]> {
        self.cache.get(g).map(Vec::as_slice)
    }

    pub fn contains(&mut self, g: &Group, w: World, x: &WorldSet) -> Result<bool, ModelError> {
        Ok(self.families(g)?[w.0].contains(x))
    }

    /// `‖f‖` by structural recursion over the semantic clauses.
    pub fn truth_set(&mut self, f: &Formula) -> Result<WorldSet, ModelError> {
        use Formula::*;
        let m = self.model;
        Ok(match f {
            Bottom => m.empty_set(),
            Top => m.full_set(),
            Atom(a) => m.valuation(a),
            Not(a) => self.truth_set(a)?.complement(),
            Or(a, b) => self.truth_set(a)?.union(&self.truth_set(b)?),
            And(a, b) => self.truth_set(a)?.intersection(&self.truth_set(b)?),
            Implies(a, b) => self.truth_set(a)?.complement().union(&self.truth_set(b)?),
            Iff(a, b) => {
                let (x, y) = (self.truth_set(a)?, self.truth_set(b)?);
                x.intersection(&y).union(&x.complement().intersection(&y.complement()))
            }
            Box(g, a) => {
                let x = self.truth_set(a)?;
                let fams = self.families(g)?;
                WorldSet::from_worlds(
                    m.size(),
                    fams.iter().enumerate().filter(|(_, fam)| fam.contains(&x)).map(|(w, _)| w),
                )
            }
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn g(ids: &[u32]) -> Group {
        Group::of(ids).unwrap()
    }

    fn fam(sets: &[WorldSet]) -> Family {
        sets.iter().copied().collect()
    }

    /// M1 read as an agent-indexed model.
    fn m1_as_agents() -> Model {
        let d = Domain::new(
            vec!["wp".into(), "wq".into(), "wr".into()],
            [("p", 0), ("q", 1), ("r", 2)]
                .into_iter()
                .map(|(a, w)| (a.to_string(), WorldSet::from_worlds(3, [w])))
                .collect(),
        )
        .unwrap();
        let e = WorldSet::empty(3);
        let agents = [
            (AgentId(1), NeighbourhoodMap::constant(3, fam(&[WorldSet::from_worlds(3, [0, 2]), e]))),
            (AgentId(2), NeighbourhoodMap::constant(3, fam(&[WorldSet::from_worlds(3, [1, 2]), e]))),
        ]
        .into_iter()
        .collect();
        AgentModel::new(d, agents).unwrap().into()
    }

    #[test]
    fn pointwise_intersection_of_m1_families() {
        let m = m1_as_agents();
        let got = m.group_neighbourhood(&g(&[1, 2]), World(0)).unwrap();
        assert_eq!(got, fam(&[WorldSet::from_worlds(3, [2]), WorldSet::empty(3)]));
    }

    #[test]
    fn singleton_group_is_agent_family() {
        let m = m1_as_agents();
        let a = m.as_agent().unwrap();
        assert_eq!(m.group_neighbourhood(&g(&[1]), World(1)).unwrap(), a.family(AgentId(1), World(1)));
    }

    #[test]
    fn absent_agent_empties_group_family() {
        let m = m1_as_agents();
        assert!(m.group_neighbourhood(&g(&[1, 7]), World(0)).unwrap().is_empty());
        assert!(m.group_neighbourhood(&g(&[7]), World(0)).unwrap().is_empty());
    }

    #[test]
    fn unknown_world_is_an_error() {
        let m = m1_as_agents();
        assert_eq!(m.group_neighbourhood(&g(&[1]), World(3)), Err(ModelError::WorldOutOfRange(3, 3)));
        assert_eq!(m.world("wz"), Err(ModelError::UnknownWorld("wz".into())));
        assert!(m.satisfies(World(9), &Formula::Top).is_err());
    }

    #[test]
    fn resource_guards() {
        let d = Domain::numbered(1, BTreeMap::new()).unwrap();
        let agents = (0..9).map(|i| (AgentId(i), NeighbourhoodMap::constant(1, fam(&[WorldSet::full(1)])))).collect();
        let m: Model = AgentModel::new(d, agents).unwrap().into();
        let big = Group::new((0..9).map(AgentId)).unwrap();
        assert!(matches!(m.group_neighbourhood(&big, World(0)), Err(ModelError::Resource(_))));
        let ok = Group::new((0..8).map(AgentId)).unwrap();
        assert_eq!(m.group_neighbourhood(&ok, World(0)).unwrap().len(), 1);
    }

    #[test]
    fn truth_sets_on_m1() {
        let m = m1_as_agents();
        assert_eq!(m.truth_set(&parse("p | r").unwrap()).unwrap(), WorldSet::from_worlds(3, [0, 2]));
        assert!(m.valid(&parse("p -> p").unwrap()).unwrap());
        assert!(m.satisfies(World(0), &parse("true").unwrap()).unwrap());
    }

    #[test]
    fn definable_sets_trivial_model() {
        let d = Domain::numbered(3, BTreeMap::new()).unwrap();
        let m: Model = AgentModel::new(d, BTreeMap::new()).unwrap().into();
        let defs = m.definable_sets(&[]).unwrap();
        assert_eq!(defs.keys().copied().collect::<Vec<_>>(), vec![WorldSet::empty(3), WorldSet::full(3)]);
        assert_eq!(defs[&WorldSet::empty(3)], Formula::Bottom);
        assert_eq!(defs[&WorldSet::full(3)], Formula::Top);
    }

    #[test]
    fn definable_sets_separating_valuation_is_powerset() {
        let m = m1_as_agents();
        let defs = m.definable_sets(&[]).unwrap();
        assert_eq!(defs.len(), 8);
        for (set, witness) in &defs {
            assert_eq!(m.truth_set(witness).unwrap(), *set);
        }
        assert_eq!(defs[&WorldSet::from_worlds(3, [0])], Formula::atom("p"));
    }

    #[test]
    fn default_pool_for_agents() {
        let m = m1_as_agents();
        assert_eq!(m.default_pool(), vec![g(&[1]), g(&[2]), g(&[1, 2])]);
    }
}
