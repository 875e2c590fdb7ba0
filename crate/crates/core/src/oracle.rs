//! Exact ground truth for small instances.
//!
//! No metric assumption is made anywhere; EUC_2D lengths may violate the
//! triangle inequality by one unit.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::edges::SparseEdgeSet;
use crate::error::{Error, Result};
use crate::tsplib::Instance;

pub const MAX_ENUMERATE: usize = 12;
pub const MAX_HELD_KARP: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    /// Starts at vertex 0, with `order[1] < order[n - 1]`.
    pub order: Vec<usize>,
    pub length: i64,
}

impl Tour {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |i| {
            let (a, b) = (self.order[i], self.order[(i + 1) % n]);
            (a.min(b), a.max(b))
        })
    }
}

pub fn tour_length(instance: &Instance, order: &[usize]) -> i64 {
    let n = order.len();
    (0..n).map(|i| instance.dist(order[i], order[(i + 1) % n])).sum()
}

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    Ok(())
}

/// All minimum-length tours, each listed once.
pub fn enumerate_optimum_tours(instance: &Instance) -> Result<Vec<Tour>> {
    let n = instance.n();
    check_size(n, MAX_ENUMERATE)?;
    let l: Vec<Vec<i64>> = (0..n).map(|u| (0..n).map(|v| instance.dist(u, v)).collect()).collect();
    let min_edge = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .map(|(u, v)| l[u][v])
        .min()
        .unwrap_or(0);
    let mut best = held_karp_value(instance)?;
    let mut found = Vec::new();
    let mut order = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    dfs(&l, n, min_edge, &mut order, &mut used, 0, &mut best, &mut found);
    found.sort();
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    l: &[Vec<i64>],
    n: usize,
    min_edge: i64,
    order: &mut Vec<usize>,
    used: &mut [bool],
    len: i64,
    best: &mut i64,
    found: &mut Vec<Tour>,
) {
    let remaining = (n - order.len() + 1) as i64;
    if len + remaining * min_edge > *best {
        return;
    }
    let last = *order.last().expect("starts at 0");
    if order.len() == n {
        if order[1] > order[n - 1] {
            return;
        }
        let total = len + l[last][0];
        if total == *best {
            found.push(Tour {
                order: order.clone(),
                length: total,
            });
        }
        return;
    }
    for v in 1..n {
        if !used[v] {
            used[v] = true;
            order.push(v);
            dfs(l, n, min_edge, order, used, len + l[last][v], best, found);
            order.pop();
            used[v] = false;
        }
    }
}

/// Optimum tour length over the complete graph.
pub fn held_karp_value(instance: &Instance) -> Result<i64> {
    held_karp_on(instance, None).map(|v| v.expect("complete graph has a tour"))
}

/// Optimum tour length using only edges of `edges`; `None` if there is no
/// Hamiltonian cycle.
pub fn held_karp_on_edges(instance: &Instance, edges: &SparseEdgeSet) -> Result<Option<i64>> {
    if edges.n() != instance.n() {
        return Err(Error::DimensionMismatch {
            edges: edges.n(),
            instance: instance.n(),
        });
    }
    held_karp_on(instance, Some(edges))
}

fn held_karp_on(instance: &Instance, edges: Option<&SparseEdgeSet>) -> Result<Option<i64>> {
    let n = instance.n();
    check_size(n, MAX_HELD_KARP)?;
    const INF: i64 = i64::MAX / 4;
    let w = |u: usize, v: usize| match edges {
        Some(e) if !e.contains(u, v) => INF,
        _ => instance.dist(u, v),
    };
    // Vertex 0 is the start; the mask covers vertices 1..n.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut h = vec![INF; (1 << m) * m];
    for v in 0..m {
        h[(1 << v) * m + v] = w(0, v + 1);
    }
    for mask in 1..=full {
        for v in 0..m {
            let cur = h[mask * m + v];
            if cur >= INF || mask & (1 << v) == 0 {
                continue;
            }
            for u in 0..m {
                if mask & (1 << u) != 0 {
                    continue;
                }
                let step = w(v + 1, u + 1);
                if step >= INF {
                    continue;
                }
                let slot = &mut h[(mask | 1 << u) * m + u];
                *slot = (*slot).min(cur + step);
            }
        }
    }
    let best = (0..m)
        .filter_map(|v| {
            let (a, b) = (h[full * m + v], w(v + 1, 0));
            (a < INF && b < INF).then_some(a + b)
        })
        .min();
    Ok(best)
}

/// Edges contained in no optimum tour.
pub fn exact_useless_edges(instance: &Instance) -> Result<BTreeSet<(usize, usize)>> {
    let n = instance.n();
    let used: BTreeSet<(usize, usize)> = enumerate_optimum_tours(instance)?.iter().flat_map(|t| t.edges().collect::<Vec<_>>()).collect();
    Ok((0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !used.contains(e))
        .collect())
}

/// Minimum total length of vertex-disjoint paths joining each `(a, b)` of
/// `pairs` in turn, using every vertex of `interior` exactly once as an
/// interior vertex. Exhaustive over permutations and split points.
pub fn brute_min_path_system(instance: &Instance, pairs: &[(usize, usize)], interior: &[usize]) -> i64 {
    assert!(interior.len() <= 8, "interior too large for enumeration");
    assert!(!pairs.is_empty() || interior.is_empty());
    interior
        .iter()
        .copied()
        .permutations(interior.len())
        .map(|perm| best_split(instance, pairs, &perm))
        .min()
        .unwrap_or(i64::MAX)
}

/// Best way to cut `seq` into consecutive (possibly empty) chunks, one per
/// pair.
fn best_split(instance: &Instance, pairs: &[(usize, usize)], seq: &[usize]) -> i64 {
    fn go(instance: &Instance, pairs: &[(usize, usize)], seq: &[usize]) -> i64 {
        let (a, b) = pairs[0];
        if pairs.len() == 1 {
            return chain(instance, a, seq, b);
        }
        (0..=seq.len())
            .map(|cut| chain(instance, a, &seq[..cut], b) + go(instance, &pairs[1..], &seq[cut..]))
            .min()
            .expect("non-empty range")
    }
    if pairs.is_empty() {
        return 0;
    }
    go(instance, pairs, seq)
}

fn chain(instance: &Instance, a: usize, mid: &[usize], b: usize) -> i64 {
    let mut total = 0;
    let mut prev = a;
    for &v in mid.iter().chain(std::iter::once(&b)) {
        total += instance.dist(prev, v);
        prev = v;
    }
    total
}
