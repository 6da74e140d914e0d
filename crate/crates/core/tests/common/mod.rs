#![allow(dead_code)]

use himm::generators::{gen_random, RandomParams};
use himm::{Hierarchy, NodeId};
use proptest::prelude::*;

/// Small random hierarchies: depth up to 4, up to 5 states per machine.
pub fn params() -> impl Strategy<Value = RandomParams> {
    (any::<u64>(), 1..=4usize, 1..=5usize, 1..=3usize, 3..=10u32).prop_map(
        |(seed, max_depth, max_states, inputs, d)| RandomParams {
            seed,
            max_depth,
            max_states,
            inputs,
            density: d as f64 / 10.0,
            cost_min: 0.5,
            cost_max: 10.0,
        },
    )
}

pub fn hierarchy() -> impl Strategy<Value = Hierarchy> {
    params().prop_map(|p| gen_random(&p).expect("valid parameters"))
}

/// A hierarchy with a pair of its states picked by index.
pub fn query() -> impl Strategy<Value = (Hierarchy, NodeId, NodeId)> {
    (hierarchy(), any::<prop::sample::Index>(), any::<prop::sample::Index>()).prop_map(|(h, a, b)| {
        let leaves: Vec<NodeId> = h.leaves().collect();
        let (a, b) = (leaves[a.index(leaves.len())], leaves[b.index(leaves.len())]);
        (h, a, b)
    })
}

/// Like [`query`], but dense enough that most queries are feasible.
pub fn dense_query() -> impl Strategy<Value = (Hierarchy, NodeId, NodeId)> {
    (
        any::<u64>(),
        2..=4usize,
        2..=5usize,
        2..=3usize,
        6..=10u32,
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(seed, max_depth, max_states, inputs, d, a, b)| {
            let p = RandomParams {
                seed,
                max_depth,
                max_states,
                inputs,
                density: d as f64 / 10.0,
                cost_min: 0.5,
                cost_max: 10.0,
            };
            let h = gen_random(&p).expect("valid parameters");
            let leaves: Vec<NodeId> = h.leaves().collect();
            let (a, b) = (leaves[a.index(leaves.len())], leaves[b.index(leaves.len())]);
            (h, a, b)
        })
}
