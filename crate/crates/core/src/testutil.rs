//! Proptest strategies shared by unit tests.

use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::formula::AgentId;
use crate::model::{AgentModel, Domain, Family, NeighbourhoodMap, WorldSet};

/// Agent models with 1..=`max_worlds` worlds, agents `1..=k` for some
/// `k <= max_agents`, and atoms `p`, `q` with arbitrary valuations.
pub fn arb_agent_model(max_worlds: usize, max_agents: u32) -> impl Strategy<Value = AgentModel> {
    (1..=max_worlds, 1..=max_agents).prop_flat_map(|(n, k)| {
        let families = prop::collection::vec(any::<u64>(), n * k as usize);
        let valuation = prop::collection::vec(any::<u64>(), 2);
        (Just(n), Just(k), families, valuation).prop_map(|(n, k, fams, val)| {
            let valuation: BTreeMap<String, WorldSet> =
                ["p", "q"].iter().zip(val).map(|(a, bits)| (a.to_string(), WorldSet::from_bits(n, bits))).collect();
            let agents = (0..k)
                .map(|a| {
                    let maps = (0..n)
                        .map(|w| {
                            let mask = fams[a as usize * n + w];
                            WorldSet::all_subsets(n).filter(|s| mask >> s.bits() & 1 == 1).collect::<Family>()
                        })
                        .collect();
                    (AgentId(a + 1), NeighbourhoodMap::new(maps))
                })
                .collect();
            AgentModel::new(Domain::numbered(n, valuation).unwrap(), agents).unwrap()
        })
    })
}
