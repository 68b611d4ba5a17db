use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Partition;
use crate::graph::Topology;

/// Schedule of the semi-synchronous label propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpcConfig {
    /// Fraction of nodes updated per iteration.
    pub update_fraction: f64,
    pub max_iterations: usize,
}

impl Default for LpcConfig {
    fn default() -> Self {
        Self {
            update_fraction: 0.5,
            max_iterations: 100,
        }
    }
}

/// Labels with the highest count among the neighbors of `node`, ascending.
fn neighbor_modes(g: &Topology, labels: &[usize], node: usize) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in g.neighbors(node) {
        *counts.entry(labels[v]).or_default() += 1;
    }
    let Some(&top) = counts.values().max() else {
        return Vec::new();
    };
    counts
        .into_iter()
        .filter(|&(_, c)| c == top)
        .map(|(l, _)| l)
        .collect()
}

fn is_stable(g: &Topology, labels: &[usize]) -> bool {
    (0..g.node_count()).all(|u| {
        let modes = neighbor_modes(g, labels, u);
        modes.is_empty() || modes.contains(&labels[u])
    })
}

/// Label propagation communities.
///
/// Every node starts with its own label. Each iteration draws a seeded random
/// subset of `update_fraction · n` nodes and moves all of them at once to the
/// most frequent label among their neighbors (smallest label on ties). Stops
/// once every node holds one of its neighborhood's modal labels, or after
/// `max_iterations`. Isolated nodes keep their label.
pub fn lpc(g: &Topology, seed: u64, config: &LpcConfig) -> Partition {
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset = ((n as f64 * config.update_fraction).ceil() as usize).clamp(usize::from(n > 0), n);
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..config.max_iterations {
        if is_stable(g, &labels) {
            break;
        }
        order.shuffle(&mut rng);
        let updates: Vec<(usize, usize)> = order[..subset]
            .iter()
            .filter_map(|&u| neighbor_modes(g, &labels, u).first().map(|&l| (u, l)))
            .collect();
        for (u, l) in updates {
            labels[u] = l;
        }
    }
    Partition::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    fn cfg() -> LpcConfig {
        LpcConfig::default()
    }

    #[test]
    fn two_triangles_any_seed() {
        let g = Topology::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        for seed in 0..200 {
            assert_eq!(lpc(&g, seed, &cfg()).assignment(), &[0, 0, 0, 1, 1, 1]);
        }
    }

    #[test]
    fn edgeless_graph_keeps_singletons() {
        let g = Topology::from_edges(5, []);
        assert_eq!(lpc(&g, 3, &cfg()).community_count(), 5);
    }

    #[test]
    fn star_collapses() {
        let g = Topology::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]);
        for seed in 0..50 {
            assert_eq!(lpc(&g, seed, &cfg()).community_count(), 1);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = Topology::from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]);
        assert_eq!(lpc(&g, 42, &cfg()), lpc(&g, 42, &cfg()));
    }

    #[test]
    fn result_is_stable_and_within_components() {
        let g = Topology::from_edges(
            9,
            [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (6, 7), (7, 8)],
        );
        for seed in 0..30 {
            let p = lpc(&g, seed, &cfg());
            assert!(is_stable(&g, p.assignment()));
            for comm in p.communities() {
                let comps = connected_components(&g);
                assert!(comps.iter().any(|c| comm.iter().all(|u| c.contains(u))));
            }
        }
    }
}
