//! Community detection on alignment graphs.
//!
//! Modularity for a partition with resolution γ is
//! `Q = (1/2m) Σ_ij (A_ij − γ d_i d_j / 2m) [c_i = c_j]`, evaluated per
//! community as `Σ_c (L_c/m − γ (D_c/2m)²)` where `L_c` counts intra-community
//! edges and `D_c` sums member degrees.

mod gmc;
mod lpc;
mod refine;

pub use gmc::gmc;
pub use lpc::{lpc, LpcConfig};
pub use refine::{cd_stats, detect, refine_edges, CdStats};

use serde::{Deserialize, Serialize};

use crate::graph::Topology;
use crate::{Error, Result};

/// Assignment of nodes to communities `0..K`, numbered by ascending smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels<L: Ord + Copy>(labels: &[L]) -> Self {
        let mut map = std::collections::BTreeMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = map.len();
            assignment.push(*map.entry(l).or_insert(next));
        }
        Self {
            count: map.len(),
            assignment,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            count: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Members of each community, in community order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommunityAlgorithm {
    Gmc,
    Lpc,
}

impl std::str::FromStr for CommunityAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmc" => Ok(Self::Gmc),
            "lpc" => Ok(Self::Lpc),
            other => Err(Error::Config(format!("unknown community algorithm `{other}`"))),
        }
    }
}

impl std::fmt::Display for CommunityAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gmc => "gmc",
            Self::Lpc => "lpc",
        })
    }
}

pub fn modularity(g: &Topology, p: &Partition, gamma: f64) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    assert_eq!(p.len(), g.node_count(), "partition size differs from graph");
    let k = p.community_count();
    let mut intra = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for u in 0..g.node_count() {
        degree[p.community_of(u)] += g.degree(u);
    }
    for (u, v) in g.edges() {
        if p.community_of(u) == p.community_of(v) {
            intra[p.community_of(u)] += 1;
        }
    }
    let m = m as f64;
    Ok(intra
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| l as f64 / m - gamma * (d as f64 / (2.0 * m)).powi(2))
        .sum())
}
