use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Link, LinkSet};

const NEIGHBORS: [(isize, isize); 8] = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)];

/// Order in which alignment points are visited inside one growing round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowOrder {
    Sorted,
    Shuffled(u64),
}

/// Grow-diag-final-and of two directional alignments of an `m × l` pair.
pub fn gdfa(forward: &LinkSet, backward: &LinkSet, m: usize, l: usize) -> LinkSet {
    gdfa_extra(forward, backward, &LinkSet::new(), m, l, GrowOrder::Sorted)
}

pub fn gdfa_with_order(forward: &LinkSet, backward: &LinkSet, m: usize, l: usize, order: GrowOrder) -> LinkSet {
    gdfa_extra(forward, backward, &LinkSet::new(), m, l, order)
}

/// `extra` joins the union but not the intersection.
///
/// Growing runs in rounds: every union point adjacent (including diagonals)
/// to the current alignment whose row or column is unaligned at the start of
/// the round is added, until a round adds nothing. Round snapshots make the
/// result independent of the visiting order. Final-and then scans forward,
/// backward and extra links, each ascending, adding a link when both its
/// ends are still unaligned.
pub(crate) fn gdfa_extra(
    forward: &LinkSet,
    backward: &LinkSet,
    extra: &LinkSet,
    m: usize,
    l: usize,
    order: GrowOrder,
) -> LinkSet {
    let mut a: LinkSet = forward.intersection(backward).copied().collect();
    let union: LinkSet = forward.union(backward).chain(extra).copied().collect();
    let mut row_aligned = vec![false; m];
    let mut col_aligned = vec![false; l];
    for &(i, j) in &a {
        row_aligned[i] = true;
        col_aligned[j] = true;
    }
    let mut rng = match order {
        GrowOrder::Sorted => None,
        GrowOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    loop {
        let mut points: Vec<Link> = a.iter().copied().collect();
        let mut offsets = NEIGHBORS;
        if let Some(rng) = rng.as_mut() {
            points.shuffle(rng);
            offsets.shuffle(rng);
        }
        let mut added = BTreeSet::new();
        for &(i, j) in &points {
            for (di, dj) in offsets {
                let (Some(ni), Some(nj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                    continue;
                };
                let p = (ni, nj);
                if ni >= m || nj >= l || a.contains(&p) || !union.contains(&p) {
                    continue;
                }
                if !row_aligned[ni] || !col_aligned[nj] {
                    added.insert(p);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        for &(i, j) in &added {
            row_aligned[i] = true;
            col_aligned[j] = true;
        }
        a.extend(added);
    }
    for &(i, j) in forward.iter().chain(backward).chain(extra) {
        if i < m && j < l && !row_aligned[i] && !col_aligned[j] {
            a.insert((i, j));
            row_aligned[i] = true;
            col_aligned[j] = true;
        }
    }
    a
}
