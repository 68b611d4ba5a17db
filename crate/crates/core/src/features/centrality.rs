//! Structural node centralities: degree, closeness, betweenness, load and harmonic.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::Topology;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Centralities {
    pub degree: f64,
    pub closeness: f64,
    pub betweenness: f64,
    pub load: f64,
    pub harmonic: f64,
}

impl Centralities {
    pub const COUNT: usize = 5;
    pub const NAMES: [&'static str; 5] = ["degree", "closeness", "betweenness", "load", "harmonic"];

    pub fn to_array(self) -> [f64; 5] {
        [self.degree, self.closeness, self.betweenness, self.load, self.harmonic]
    }
}

struct ShortestPaths {
    /// Reached nodes in BFS order, starting with the source.
    order: Vec<usize>,
    dist: Vec<usize>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

const UNREACHED: usize = usize::MAX;

fn shortest_paths(g: &Topology, source: usize) -> ShortestPaths {
    let n = g.node_count();
    let mut sp = ShortestPaths {
        order: Vec::with_capacity(n),
        dist: vec![UNREACHED; n],
        sigma: vec![0.0; n],
        preds: vec![Vec::new(); n],
    };
    sp.dist[source] = 0;
    sp.sigma[source] = 1.0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        sp.order.push(v);
        for &w in g.neighbors(v) {
            if sp.dist[w] == UNREACHED {
                sp.dist[w] = sp.dist[v] + 1;
                queue.push_back(w);
            }
            if sp.dist[w] == sp.dist[v] + 1 {
                sp.sigma[w] += sp.sigma[v];
                sp.preds[w].push(v);
            }
        }
    }
    sp
}

/// All five centralities for every node.
///
/// Closeness uses within-component distances scaled by `(|C|−1)/(n−1)`.
/// Betweenness (Brandes accumulation) and load (unit flow split equally among
/// shortest-path predecessors) are normalized by `(n−1)(n−2)` over ordered
/// pairs. Harmonic is `Σ 1/d(i,j) / (n−1)`.
pub fn centralities(g: &Topology) -> Vec<Centralities> {
    let n = g.node_count();
    let mut out: Vec<Centralities> = (0..n)
        .map(|u| Centralities {
            degree: g.degree(u) as f64,
            ..Default::default()
        })
        .collect();
    let mut delta = vec![0.0; n];
    let mut flow = vec![0.0; n];

    for s in 0..n {
        let sp = shortest_paths(g, s);

        let reached = sp.order.len();
        let total: usize = sp.order.iter().map(|&v| sp.dist[v]).sum();
        if total > 0 && n > 1 {
            let r = (reached - 1) as f64;
            out[s].closeness = r / total as f64 * r / (n - 1) as f64;
        }
        if n > 1 {
            let h: f64 = sp.order[1..].iter().map(|&v| 1.0 / sp.dist[v] as f64).sum();
            out[s].harmonic = h / (n - 1) as f64;
        }

        for &v in &sp.order {
            delta[v] = 0.0;
            flow[v] = 1.0;
        }
        for &w in sp.order.iter().rev() {
            for &v in &sp.preds[w] {
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                out[w].betweenness += delta[w];
                let share = flow[w] / sp.preds[w].len() as f64;
                for &v in &sp.preds[w] {
                    if v != s {
                        flow[v] += share;
                    }
                }
                out[w].load += flow[w] - 1.0;
            }
        }
    }

    if n > 2 {
        let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
        for c in &mut out {
            c.betweenness *= scale;
            c.load *= scale;
        }
    }
    out
}
