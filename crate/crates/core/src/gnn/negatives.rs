use rand::Rng;

use crate::graph::AlignmentGraph;
use crate::Link;

fn other_index<R: Rng>(k: usize, len: usize, rng: &mut R) -> usize {
    let r = rng.gen_range(0..len - 1);
    if r >= k {
        r + 1
    } else {
        r
    }
}

/// For each positive `(i, j)` of an `m × l` sentence pair: `(i, j′)` with
/// `j′ ≠ j` and `(i′, j)` with `i′ ≠ i`, both uniform. A side with fewer than
/// two tokens yields no negative.
pub fn sample_negatives<R: Rng>(positives: &[Link], m: usize, l: usize, rng: &mut R) -> Vec<Link> {
    let mut out = Vec::with_capacity(2 * positives.len());
    for &(i, j) in positives {
        if l >= 2 {
            out.push((i, other_index(j, l, rng)));
        }
        if m >= 2 {
            out.push((other_index(i, m, rng), j));
        }
    }
    out
}

/// Graph-level variant over ordered node pairs; negatives keep the
/// orientation of their positive.
pub fn sample_graph_negatives<R: Rng>(
    g: &AlignmentGraph,
    positives: &[(usize, usize)],
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let nodes = g.nodes();
    let mut out = Vec::with_capacity(2 * positives.len());
    for &(u, v) in positives {
        let (lu, lv) = (nodes[u].language, nodes[v].language);
        let (m, l) = (g.len_of(lu), g.len_of(lv));
        for (i, j) in sample_negatives(&[(nodes[u].position, nodes[v].position)], m, l, rng) {
            out.push((g.node_id(lu, i), g.node_id(lv, j)));
        }
    }
    out
}
