//! 2-opt compatibility of edge pairs, metric excess and 3-incompatibility.
//!
//! Everything here works on exact integer lengths.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::edges::SparseEdgeSet;
use crate::kdtree::NeighborIndex;
use crate::tsplib::Instance;

/// Default number of shortcut witnesses examined per path edge.
pub const DEFAULT_WITNESSES: usize = 10;

/// `pq ~ xy`: true when the edges share a vertex or neither 2-opt exchange
/// of the two edges is strictly shorter.
#[inline]
pub fn compatible(instance: &Instance, pq: (usize, usize), xy: (usize, usize)) -> bool {
    let ((p, q), (x, y)) = (pq, xy);
    if p == x || p == y || q == x || q == y {
        return true;
    }
    let here = instance.dist(p, q) + instance.dist(x, y);
    let a = instance.dist(p, x) + instance.dist(q, y);
    let b = instance.dist(p, y) + instance.dist(q, x);
    a.max(b) >= here
}

/// Variant with `l(pq)` precomputed, for hot loops.
#[inline]
pub(crate) fn compatible_with_len(instance: &Instance, p: usize, q: usize, lpq: i64, x: usize, y: usize) -> bool {
    if p == x || p == y || q == x || q == y {
        return true;
    }
    let here = lpq + instance.dist(x, y);
    instance.dist(p, x) + instance.dist(q, y) >= here || instance.dist(p, y) + instance.dist(q, x) >= here
}

/// Metric excess `m_pq(z)`: over unordered pairs `{x, y}` of neighbours of
/// `z` in `edges` other than `p` and `q`, the minimum of the largest
/// shortcut slack `l(·z) + l(z·) - l(··)` through `z` towards `p` or `q`.
///
/// Returns `None` when `z` has fewer than two eligible neighbours.
pub fn metric_excess(instance: &Instance, edges: &SparseEdgeSet, p: usize, q: usize, z: usize) -> Option<i64> {
    let lzp = instance.dist(z, p);
    let lzq = instance.dist(z, q);
    // The pair value is max(c_x, c_y), so the minimum over pairs is the
    // second smallest c.
    let mut best = i64::MAX;
    let mut second = i64::MAX;
    for &x in edges.neighbors(z) {
        let x = x as usize;
        if x == p || x == q {
            continue;
        }
        let lxz = instance.dist(x, z);
        let c = (lxz + lzp - instance.dist(x, p)).max(lxz + lzq - instance.dist(x, q));
        if c < best {
            second = best;
            best = c;
        } else if c < second {
            second = c;
        }
    }
    (second != i64::MAX).then_some(second)
}

/// Shortcut witnesses `z` for a fixed path edge `pr`, with the slack
/// `l(rz) + l(zp) - m_pr(z)` precomputed. Equivalent to calling
/// [`three_incompatible`] for every `(q, x)`.
#[derive(Debug, Clone)]
pub struct ShortcutTable {
    p: usize,
    r: usize,
    k: usize,
    /// In order of distance from the midpoint of `pr`.
    slacks: Vec<(usize, Option<i64>)>,
}

impl ShortcutTable {
    /// Two spare candidates are kept so that excluding `q` and `x` later
    /// still leaves `k`.
    pub fn new(instance: &Instance, edges: &SparseEdgeSet, index: &NeighborIndex, p: usize, r: usize, k: usize) -> Self {
        let (a, b) = (instance.point(p), instance.point(r));
        let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
        let slacks = index
            .nearest_vec(mid, k + 2, |z| z == p || z == r)
            .into_iter()
            .map(|z| {
                let slack = metric_excess(instance, edges, p, r, z)
                    .map(|m| instance.dist(r, z) + instance.dist(z, p) - m);
                (z, slack)
            })
            .collect();
        ShortcutTable { p, r, k, slacks }
    }

    /// Whether the path `q-p-r-x` is 3-incompatible; returns the witness.
    pub fn refutes(&self, instance: &Instance, q: usize, x: usize) -> Option<usize> {
        let rhs = instance.dist(self.p, q) + instance.dist(self.r, x);
        let lxq = instance.dist(x, q);
        self.slacks
            .iter()
            .filter(|&&(z, _)| z != q && z != x)
            .take(self.k)
            .find(|&&(_, slack)| slack.is_some_and(|s| lxq + s < rhs))
            .map(|&(z, _)| z)
    }
}

/// Shortcut tables for many `(p, r)` keys, built once against one edge set.
#[derive(Debug, Clone, Default)]
pub struct ShortcutCache {
    map: HashMap<(u32, u32), ShortcutTable>,
}

impl ShortcutCache {
    pub fn build(
        instance: &Instance,
        edges: &SparseEdgeSet,
        index: &NeighborIndex,
        mut keys: Vec<(usize, usize)>,
        k: usize,
    ) -> Self {
        keys.sort_unstable();
        keys.dedup();
        let map = keys
            .into_par_iter()
            .map(|(p, r)| ((p as u32, r as u32), ShortcutTable::new(instance, edges, index, p, r, k)))
            .collect();
        ShortcutCache { map }
    }

    pub fn get(&self, p: usize, r: usize) -> Option<&ShortcutTable> {
        self.map.get(&(p as u32, r as u32))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// True if the edges `pq`, `pr`, `rx` (the path `q-p-r-x`) cannot all lie in
/// one optimum tour, witnessed by a shortcut vertex among the `k` nearest to
/// the midpoint of `pr`.
pub fn three_incompatible(
    instance: &Instance,
    edges: &SparseEdgeSet,
    index: &NeighborIndex,
    (p, q, r, x): (usize, usize, usize, usize),
    k: usize,
) -> bool {
    debug_assert!(p != q && p != r && p != x && q != r && q != x && r != x);
    let (a, b) = (instance.point(p), instance.point(r));
    let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    let rhs = instance.dist(p, q) + instance.dist(r, x);
    let lxq = instance.dist(x, q);
    index
        .nearest_vec(mid, k, |z| z == p || z == q || z == r || z == x)
        .into_iter()
        .any(|z| match metric_excess(instance, edges, p, r, z) {
            Some(m) => lxq + instance.dist(r, z) + instance.dist(z, p) - m < rhs,
            None => false,
        })
}
