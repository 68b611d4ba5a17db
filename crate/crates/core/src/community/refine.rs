use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gmc, lpc, CommunityAlgorithm, LpcConfig, Partition};
use crate::graph::{connected_components, AlignmentGraph};
use crate::Result;

/// Runs one algorithm on a sentence graph. Edgeless graphs yield singletons.
pub fn detect(
    g: &AlignmentGraph,
    algorithm: CommunityAlgorithm,
    gamma: f64,
    seed: u64,
    lpc_config: &LpcConfig,
) -> Partition {
    let t = g.topology();
    match algorithm {
        _ if t.edge_count() == 0 => Partition::singletons(t.node_count()),
        CommunityAlgorithm::Gmc => gmc(t, gamma).expect("graph has edges"),
        CommunityAlgorithm::Lpc => lpc(t, seed, lpc_config),
    }
}

/// Links every cross-language pair inside a community and drops all
/// inter-community edges.
pub fn refine_edges(g: &AlignmentGraph, p: &Partition) -> Result<AlignmentGraph> {
    let mut edges = Vec::new();
    for members in p.communities() {
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                if g.nodes()[u].language != g.nodes()[v].language {
                    edges.push((u, v));
                }
            }
        }
    }
    g.with_edges(edges)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CdStats {
    pub sentences: usize,
    /// Mean connected components of the input graphs.
    pub mean_components_before: f64,
    /// Mean connected components after refinement.
    pub mean_components_after: f64,
    /// Mean tokens per language sentence.
    pub mean_sentence_length: f64,
    /// Removed inter-community edges over original edges; added clique edges are not counted.
    pub edge_removal_fraction: f64,
}

/// Corpus-level statistics of one algorithm. `seed` is offset by the graph
/// index for LPC so that sentences draw independent schedules.
pub fn cd_stats(
    graphs: &[AlignmentGraph],
    algorithm: CommunityAlgorithm,
    gamma: f64,
    seed: u64,
    lpc_config: &LpcConfig,
) -> Result<CdStats> {
    let per: Vec<(usize, usize, f64, usize, usize)> = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let p = detect(g, algorithm, gamma, seed.wrapping_add(k as u64), lpc_config);
            let refined = refine_edges(g, &p)?;
            let removed = g
                .topology()
                .edges()
                .filter(|&(u, v)| p.community_of(u) != p.community_of(v))
                .count();
            let before = connected_components(g.topology()).len();
            let after = connected_components(refined.topology()).len();
            let length = g.node_count() as f64 / g.languages().len().max(1) as f64;
            Ok((before, after, length, removed, g.edge_count()))
        })
        .collect::<Result<_>>()?;
    let count = per.len().max(1) as f64;
    let removed: usize = per.iter().map(|r| r.3).sum();
    let original: usize = per.iter().map(|r| r.4).sum();
    Ok(CdStats {
        sentences: per.len(),
        mean_components_before: per.iter().map(|r| r.0 as f64).sum::<f64>() / count,
        mean_components_after: per.iter().map(|r| r.1 as f64).sum::<f64>() / count,
        mean_sentence_length: per.iter().map(|r| r.2).sum::<f64>() / count,
        edge_removal_fraction: if original == 0 {
            0.0
        } else {
            removed as f64 / original as f64
        },
    })
}
