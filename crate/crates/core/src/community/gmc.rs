use std::collections::BTreeMap;

use super::Partition;
use crate::graph::Topology;
use crate::{Error, Result};

struct Community {
    degree: f64,
    /// Edge counts to neighboring communities.
    links: BTreeMap<usize, usize>,
}

/// Greedy agglomerative modularity maximization (Clauset–Newman–Moore).
///
/// Starts from singletons and merges the pair with the largest positive gain
/// `ΔQ = L_ij/m − γ D_i D_j / 2m²`. Ties go to the lowest index pair; a merged
/// community keeps the smaller index.
pub fn gmc(g: &Topology, gamma: f64) -> Result<Partition> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.node_count();
    let two_m = 2.0 * m as f64;
    let mut communities: Vec<Option<Community>> = (0..n)
        .map(|u| {
            Some(Community {
                degree: g.degree(u) as f64,
                links: g.neighbors(u).iter().map(|&v| (v, 1)).collect(),
            })
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).collect();

    loop {
        // Gain scaled by 2m² so that it is exact for integer degrees and γ = 1.
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, c) in communities.iter().enumerate() {
            let Some(c) = c else { continue };
            for (&j, &l) in c.links.range(i + 1..) {
                let dj = communities[j].as_ref().map_or(0.0, |c| c.degree);
                let gain = two_m * l as f64 - gamma * c.degree * dj;
                if gain > 0.0 && best.map_or(true, |(b, _, _)| gain > b) {
                    best = Some((gain, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };

        let absorbed = communities[j].take().expect("active community");
        for (&k, &count) in &absorbed.links {
            if k == i {
                continue;
            }
            let other = communities[k].as_mut().expect("active neighbor");
            other.links.remove(&j);
            *other.links.entry(i).or_default() += count;
        }
        let target = communities[i].as_mut().expect("active community");
        target.degree += absorbed.degree;
        target.links.remove(&j);
        for (k, count) in absorbed.links {
            if k != i {
                *target.links.entry(k).or_default() += count;
            }
        }
        for l in labels.iter_mut() {
            if *l == j {
                *l = i;
            }
        }
    }
    Ok(Partition::from_labels(&labels))
}
