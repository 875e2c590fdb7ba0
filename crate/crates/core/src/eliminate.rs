//! Per-edge uselessness decisions.
//!
//! Write `a(x) = l(rx) - l(px)`, `b(y) = l(ry) - l(qy)` for the tour
//! neighbours `x, y` of `r`, and `c(z) = l(sz) - l(pz)`, `d(w) = l(sw) - l(qw)`
//! for the neighbours `z, w` of `s`. If `rs` is not a tour edge then one of
//! the two 3-opt moves
//!
//! ```text
//! remove pq, rx, sw   add px, rs, qw     gain l(pq) - l(rs) + a(x) + d(w)
//! remove pq, ry, sz   add pz, rs, qy     gain l(pq) - l(rs) + b(y) + c(z)
//! ```
//!
//! yields a tour, so an optimum tour through `pq` cannot make both gains
//! positive. The fast check bounds the gains from certificates; the direct
//! check enumerates neighbour pairs.

use serde::{Deserialize, Serialize};

use crate::certify::{compatible_neighbors, Membership, PotentialPoint};
use std::borrow::Cow;

use crate::compat::{compatible, ShortcutCache, ShortcutTable, DEFAULT_WITNESSES};
use crate::edges::SparseEdgeSet;
use crate::kdtree::NeighborIndex;
use crate::scalar::Scalar;
use crate::tsplib::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MainFast,
    MainDirect,
    ClosePoint,
    Backtrack,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Witness {
    Single(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub edge: (usize, usize),
    pub useless: bool,
    pub method: Method,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn kept(edge: (usize, usize)) -> Self {
        Verdict {
            edge,
            useless: false,
            method: Method::None,
            witness: None,
        }
    }

    pub fn useless(edge: (usize, usize), method: Method, witness: Witness) -> Self {
        Verdict {
            edge,
            useless: true,
            method,
            witness: Some(witness),
        }
    }
}

/// Main elimination test from two certified vertices.
///
/// Requires `s` outside both cones of `r` and `r` outside both cones of
/// `s`, then checks both gains against the certified lower bounds.
pub fn main_theorem_check<S: Scalar>(
    instance: &Instance,
    (p, q): (usize, usize),
    r: &PotentialPoint<S>,
    s: &PotentialPoint<S>,
    margin: S,
) -> bool {
    if r.vertex == s.vertex {
        return false;
    }
    let k = S::of_len(instance.dist(p, q) - instance.dist(r.vertex, s.vertex));
    // Cheap bound test first; the cone tests need square roots.
    if !(k + s.bound_p + r.bound_q > margin && k + r.bound_p + s.bound_q > margin) {
        return false;
    }
    r.cover.classify(instance, s.vertex, margin) == Membership::Neither
        && s.cover.classify(instance, r.vertex, margin) == Membership::Neither
}

/// True when every admissible neighbour pair `{x, y}` of `r` allows moving
/// `r` between `p` and `q` at a profit, so no optimum tour contains `pq`.
pub fn close_point_check(instance: &Instance, edges: &SparseEdgeSet, (p, q): (usize, usize), r: usize) -> bool {
    let set = compatible_neighbors(instance, edges, (p, q), r);
    let rhs = instance.dist(p, q);
    let lhs = instance.dist(p, r) + instance.dist(q, r);
    set.iter().enumerate().all(|(i, &x)| {
        set[i + 1..].iter().all(|&y| {
            is_anchor((x, y), (p, q))
                || instance.dist(x, y) + lhs < rhs + instance.dist(x, r) + instance.dist(y, r)
        })
    })
}

#[inline]
fn is_anchor((x, y): (usize, usize), (p, q): (usize, usize)) -> bool {
    (x == p && y == q) || (x == q && y == p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectConfig {
    /// Vertices nearest the midpoint of `pq` examined for the close point test.
    pub candidates: usize,
    /// The first this many of those are paired for the combination test.
    pub pair_candidates: usize,
    /// Shortcut witnesses per 3-incompatibility test.
    pub witnesses: usize,
    /// Combination count above which a pair `(r, s)` is skipped.
    pub max_combinations: usize,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            candidates: 10,
            pair_candidates: 5,
            witnesses: DEFAULT_WITNESSES,
            max_combinations: 200_000,
        }
    }
}

/// The `k` vertices closest to the midpoint of `pq`, excluding `p` and `q`.
pub fn midpoint_candidates(instance: &Instance, index: &NeighborIndex, (p, q): (usize, usize), k: usize) -> Vec<usize> {
    let (a, b) = (instance.point(p), instance.point(q));
    let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    index.nearest_vec(mid, k, |v| v == p || v == q)
}

/// Neighbour pairs `{x, y}` of `r` that may occur in an optimum tour through
/// `pq`: both edges compatible with `pq`, no profitable close point move,
/// and no 3-incompatible path `q-p-r-y` or `p-q-r-y`. Tables missing from
/// `cache` are built on demand.
pub fn feasible_pairs(
    instance: &Instance,
    edges: &SparseEdgeSet,
    index: &NeighborIndex,
    (p, q): (usize, usize),
    r: usize,
    witnesses: usize,
    cache: Option<&ShortcutCache>,
) -> Vec<(usize, usize)> {
    let table = |a: usize| match cache.and_then(|c| c.get(a, r)) {
        Some(t) => Cow::Borrowed(t),
        None => Cow::Owned(ShortcutTable::new(instance, edges, index, a, r, witnesses)),
    };
    let set = compatible_neighbors(instance, edges, (p, q), r);
    let lpq = instance.dist(p, q);
    let base = instance.dist(p, r) + instance.dist(q, r);
    let mut via_p: Option<Cow<ShortcutTable>> = None;
    let mut via_q: Option<Cow<ShortcutTable>> = None;
    let mut out = Vec::new();
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i + 1..] {
            if is_anchor((x, y), (p, q)) {
                continue;
            }
            if instance.dist(x, y) + base < lpq + instance.dist(x, r) + instance.dist(y, r) {
                continue;
            }
            if let Some(other) = partner((x, y), p) {
                let t = via_p.get_or_insert_with(|| table(p));
                if t.refutes(instance, q, other).is_some() {
                    continue;
                }
            }
            if let Some(other) = partner((x, y), q) {
                let t = via_q.get_or_insert_with(|| table(q));
                if t.refutes(instance, p, other).is_some() {
                    continue;
                }
            }
            out.push((x, y));
        }
    }
    out
}

#[inline]
fn partner((x, y): (usize, usize), v: usize) -> Option<usize> {
    if x == v {
        Some(y)
    } else if y == v {
        Some(x)
    } else {
        None
    }
}

/// Whether an optimum tour through `pq` can have `{x, y}` as the neighbours
/// of `r` and `{z, w}` as the neighbours of `s` at the same time. Returns
/// true when the combination is impossible.
pub fn combination_refuted(
    instance: &Instance,
    (p, q): (usize, usize),
    r: usize,
    (x, y): (usize, usize),
    s: usize,
    (z, w): (usize, usize),
) -> bool {
    let s_next_to_r = s == x || s == y;
    let r_next_to_s = r == z || r == w;
    if s_next_to_r != r_next_to_s {
        return true;
    }
    if s_next_to_r {
        // rs is a tour edge; the moves do not apply.
        return false;
    }
    // p (or q) would get a third tour neighbour.
    if partner((x, y), p).is_some() && partner((z, w), p).is_some() {
        return true;
    }
    if partner((x, y), q).is_some() && partner((z, w), q).is_some() {
        return true;
    }
    // x r y s would close a 4-cycle.
    if ((x == z && y == w) || (x == w && y == z)) && instance.n() > 4 {
        return true;
    }
    for a in [x, y] {
        for b in [z, w] {
            if !compatible(instance, (r, a), (s, b)) {
                return true;
            }
        }
    }
    let k = instance.dist(p, q) - instance.dist(r, s);
    let l = |u, v| instance.dist(u, v);
    for (x1, y1) in [(x, y), (y, x)] {
        let a = l(r, x1) - l(p, x1);
        let b = l(r, y1) - l(q, y1);
        for (z1, w1) in [(z, w), (w, z)] {
            let c = l(s, z1) - l(p, z1);
            let d = l(s, w1) - l(q, w1);
            if k + a + d > 0 && k + b + c > 0 {
                return true;
            }
        }
    }
    false
}

/// Neighbour pairs of one vertex with the per-neighbour gains precomputed.
struct Side {
    v: usize,
    nb: Vec<usize>,
    /// `l(v x) - l(p x)` and `l(v x) - l(q x)` per entry of `nb`.
    to_p: Vec<i64>,
    to_q: Vec<i64>,
    pairs: Vec<(usize, usize)>,
    has_p: Vec<bool>,
    has_q: Vec<bool>,
}

impl Side {
    fn new(instance: &Instance, (p, q): (usize, usize), v: usize, pairs: &[(usize, usize)]) -> Self {
        let mut nb: Vec<usize> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
        nb.sort_unstable();
        nb.dedup();
        let at = |x: usize| nb.binary_search(&x).expect("listed");
        let idx: Vec<(usize, usize)> = pairs.iter().map(|&(x, y)| (at(x), at(y))).collect();
        let to_p = nb.iter().map(|&x| instance.dist(v, x) - instance.dist(p, x)).collect();
        let to_q = nb.iter().map(|&x| instance.dist(v, x) - instance.dist(q, x)).collect();
        Side {
            v,
            has_p: pairs.iter().map(|&(x, y)| x == p || y == p).collect(),
            has_q: pairs.iter().map(|&(x, y)| x == q || y == q).collect(),
            nb,
            to_p,
            to_q,
            pairs: idx,
        }
    }

    fn holds(&self, i: usize, vertex: usize) -> bool {
        let (x, y) = self.pairs[i];
        self.nb[x] == vertex || self.nb[y] == vertex
    }
}

/// Every combination of the given neighbour pairs is refuted, as decided by
/// [`combination_refuted`]. `None` when the product exceeds `cap`.
pub fn all_combinations_refuted(
    instance: &Instance,
    pq: (usize, usize),
    r: usize,
    pairs_r: &[(usize, usize)],
    s: usize,
    pairs_s: &[(usize, usize)],
    cap: usize,
) -> Option<bool> {
    if pairs_r.len().saturating_mul(pairs_s.len()) > cap {
        return None;
    }
    let (sr, ss) = (Side::new(instance, pq, r, pairs_r), Side::new(instance, pq, s, pairs_s));
    let width = ss.nb.len();
    let compat: Vec<bool> = sr
        .nb
        .iter()
        .flat_map(|&x| ss.nb.iter().map(move |&z| (x, z)))
        .map(|(x, z)| compatible(instance, (sr.v, x), (ss.v, z)))
        .collect();
    let k = instance.dist(pq.0, pq.1) - instance.dist(r, s);
    let n_big = instance.n() > 4;
    for (i, &(x, y)) in sr.pairs.iter().enumerate() {
        let s_next_to_r = sr.holds(i, s);
        for (j, &(z, w)) in ss.pairs.iter().enumerate() {
            let r_next_to_s = ss.holds(j, r);
            let refuted = if s_next_to_r || r_next_to_s {
                s_next_to_r != r_next_to_s
            } else {
                (sr.has_p[i] && ss.has_p[j])
                    || (sr.has_q[i] && ss.has_q[j])
                    || (n_big && ((sr.nb[x] == ss.nb[z] && sr.nb[y] == ss.nb[w]) || (sr.nb[x] == ss.nb[w] && sr.nb[y] == ss.nb[z])))
                    || [x, y].iter().any(|&a| [z, w].iter().any(|&b| !compat[a * width + b]))
                    || [(x, y), (y, x)].iter().any(|&(x1, y1)| {
                        [(z, w), (w, z)].iter().any(|&(z1, w1)| k + sr.to_p[x1] + ss.to_q[w1] > 0 && k + sr.to_q[y1] + ss.to_p[z1] > 0)
                    })
            };
            if !refuted {
                return Some(false);
            }
        }
    }
    Some(true)
}

/// Direct elimination of `pq` using the given candidate vertices, nearest
/// first.
pub fn direct_eliminate(
    instance: &Instance,
    edges: &SparseEdgeSet,
    index: &NeighborIndex,
    pq: (usize, usize),
    candidates: &[usize],
    cfg: &DirectConfig,
    cache: Option<&ShortcutCache>,
) -> Verdict {
    let mut pairs: Vec<(usize, Vec<(usize, usize)>)> = Vec::with_capacity(candidates.len());
    for &r in candidates.iter().take(cfg.candidates) {
        if r == pq.0 || r == pq.1 {
            continue;
        }
        let f = feasible_pairs(instance, edges, index, pq, r, cfg.witnesses, cache);
        if f.is_empty() {
            return Verdict::useless(pq, Method::ClosePoint, Witness::Single(r));
        }
        pairs.push((r, f));
    }
    let head = &pairs[..pairs.len().min(cfg.pair_candidates)];
    for (i, (r, fr)) in head.iter().enumerate() {
        for (s, fs) in &head[i + 1..] {
            if all_combinations_refuted(instance, pq, *r, fr, *s, fs, cfg.max_combinations) == Some(true) {
                return Verdict::useless(pq, Method::MainDirect, Witness::Pair(*r, *s));
            }
        }
    }
    Verdict::kept(pq)
}

/// Re-evaluates a direct verdict's witness against the same snapshot.
pub fn replay_direct(
    instance: &Instance,
    edges: &SparseEdgeSet,
    index: &NeighborIndex,
    verdict: &Verdict,
    cfg: &DirectConfig,
) -> bool {
    let pq = verdict.edge;
    match (verdict.method, verdict.witness) {
        (Method::ClosePoint, Some(Witness::Single(r))) => feasible_pairs(instance, edges, index, pq, r, cfg.witnesses, None).is_empty(),
        (Method::MainDirect, Some(Witness::Pair(r, s))) => {
            let fr = feasible_pairs(instance, edges, index, pq, r, cfg.witnesses, None);
            let fs = feasible_pairs(instance, edges, index, pq, s, cfg.witnesses, None);
            all_combinations_refuted(instance, pq, r, &fr, s, &fs, cfg.max_combinations) == Some(true)
        }
        _ => false,
    }
}
