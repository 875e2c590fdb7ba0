//! Bounded-depth refutation search over path systems.
//!
//! Starting from the single path `p-q`, the search repeatedly picks a branch
//! point (a path endpoint, or a vertex near `pq` not yet in the system) and
//! branches over every way an optimum tour could continue there. A branch
//! dies when its edges cannot all lie in one optimum tour. If every branch
//! dies before the depth limit, `pq` is useless.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use crate::compat::{compatible, ShortcutTable, DEFAULT_WITNESSES};
use crate::edges::SparseEdgeSet;
use crate::eliminate::{all_combinations_refuted, combination_refuted, feasible_pairs, midpoint_candidates};
use crate::kdtree::NeighborIndex;
use crate::oracle::{held_karp_value, MAX_HELD_KARP};
use crate::tsplib::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_depth: usize,
    /// Search nodes per edge before giving up.
    pub node_budget: usize,
    /// Optional wall-clock limit per edge. Makes results timing dependent.
    pub time_budget: Option<Duration>,
    /// Local minimality is only checked up to this many interior vertices.
    pub dp_max_interior: usize,
    /// Outside vertices nearest the midpoint of `pq` offered as branch points.
    pub branch_candidates: usize,
    /// Vertices near each system edge used to try eliminating it in the
    /// context of the system; 0 disables the check.
    pub context_candidates: usize,
    /// Branch points whose moves are fully checked before choosing one.
    pub lookahead: usize,
    pub witnesses: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_depth: 10,
            node_budget: 2_000,
            time_budget: None,
            dp_max_interior: 10,
            branch_candidates: 8,
            context_candidates: 5,
            lookahead: 1,
            witnesses: DEFAULT_WITNESSES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refutation {
    Useless,
    Unknown,
}

/// Vertex-disjoint paths, or a single closed tour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSystem {
    paths: Vec<Vec<usize>>,
    closed: bool,
    depth: usize,
    length: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// New edge from the endpoint `end` to `to`.
    Attach { end: usize, to: usize },
    /// Vertex `v`, not yet in the system, with neighbours `a` and `b`.
    Insert { v: usize, a: usize, b: usize },
}

impl Move {
    pub fn edges(self) -> Vec<(usize, usize)> {
        match self {
            Move::Attach { end, to } => vec![(end, to)],
            Move::Insert { v, a, b } => vec![(v, a), (v, b)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Outside,
    /// Endpoint of path `i`; `front` tells which end.
    End { path: usize, front: bool },
    Interior,
}

impl PathSystem {
    pub fn anchored(instance: &Instance, (p, q): (usize, usize)) -> Self {
        PathSystem {
            paths: vec![vec![p, q]],
            closed: false,
            depth: 0,
            length: instance.dist(p, q),
        }
    }

    /// Builds a system from explicit paths, each with at least two vertices.
    pub fn from_paths(instance: &Instance, paths: Vec<Vec<usize>>) -> Self {
        assert!(paths.iter().all(|p| p.len() >= 2));
        let length = paths
            .iter()
            .flat_map(|p| p.windows(2))
            .map(|w| instance.dist(w[0], w[1]))
            .sum();
        PathSystem {
            paths,
            closed: false,
            depth: 0,
            length,
        }
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn length(&self) -> i64 {
        self.length
    }

    pub fn vertex_count(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    pub fn endpoint_pairs(&self) -> Vec<(usize, usize)> {
        self.paths.iter().map(|p| (p[0], p[p.len() - 1])).collect()
    }

    pub fn interior(&self) -> Vec<usize> {
        self.paths.iter().flat_map(|p| p[1..p.len() - 1].iter().copied()).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.paths.iter().flat_map(|p| p.windows(2).map(|w| (w[0], w[1]))).collect();
        if self.closed {
            let p = &self.paths[0];
            out.push((p[p.len() - 1], p[0]));
        }
        out
    }

    fn slot(&self, v: usize) -> Slot {
        for (i, path) in self.paths.iter().enumerate() {
            if let Some(pos) = path.iter().position(|&u| u == v) {
                return if self.closed {
                    Slot::Interior
                } else if pos == 0 {
                    Slot::End { path: i, front: true }
                } else if pos == path.len() - 1 {
                    Slot::End { path: i, front: false }
                } else {
                    Slot::Interior
                };
            }
        }
        Slot::Outside
    }

    pub fn contains(&self, v: usize) -> bool {
        self.slot(v) != Slot::Outside
    }

    /// The two system neighbours of an interior vertex.
    fn neighbours(&self, v: usize) -> Option<(usize, usize)> {
        for path in &self.paths {
            if let Some(pos) = path.iter().position(|&u| u == v) {
                let len = path.len();
                return if pos > 0 && pos + 1 < len {
                    Some((path[pos - 1], path[pos + 1]))
                } else if self.closed {
                    Some((path[(pos + len - 1) % len], path[(pos + 1) % len]))
                } else {
                    None
                };
            }
        }
        None
    }

    /// The fixed system neighbours of `v`: none, one for an endpoint, two
    /// for an interior vertex.
    fn fixed_neighbours(&self, v: usize) -> Vec<usize> {
        match self.slot(v) {
            Slot::Outside => Vec::new(),
            Slot::Interior => {
                let (x, y) = self.neighbours(v).expect("interior");
                vec![x, y]
            }
            Slot::End { path, front } => {
                let p = &self.paths[path];
                vec![if front { p[1] } else { p[p.len() - 2] }]
            }
        }
    }

    /// Whether adding `u-v` keeps a disjoint union of paths, or closes a
    /// Hamiltonian cycle on `n` vertices.
    fn can_add(&self, n: usize, u: usize, v: usize) -> bool {
        match (self.slot(u), self.slot(v)) {
            (Slot::Interior, _) | (_, Slot::Interior) => false,
            (Slot::End { path: i, .. }, Slot::End { path: j, .. }) if i == j => self.paths[i].len() == n,
            _ => true,
        }
    }

    fn add_edge(&mut self, instance: &Instance, u: usize, v: usize) {
        match (self.slot(u), self.slot(v)) {
            (Slot::Outside, Slot::Outside) => self.paths.push(vec![u, v]),
            (Slot::End { path, front }, Slot::Outside) => self.extend(path, front, v),
            (Slot::Outside, Slot::End { path, front }) => self.extend(path, front, u),
            (Slot::End { path: i, front: fi }, Slot::End { path: j, front: fj }) => {
                if i == j {
                    self.closed = true;
                } else {
                    let mut a = std::mem::take(&mut self.paths[i]);
                    let mut b = std::mem::take(&mut self.paths[j]);
                    if fi {
                        a.reverse();
                    }
                    if !fj {
                        b.reverse();
                    }
                    a.extend(b);
                    self.paths[i] = a;
                    self.paths.remove(j);
                }
            }
            _ => unreachable!("edge at an interior vertex"),
        }
        self.length += instance.dist(u, v);
    }

    fn extend(&mut self, path: usize, front: bool, v: usize) {
        if front {
            self.paths[path].insert(0, v);
        } else {
            self.paths[path].push(v);
        }
    }

    /// Moves that keep the system a union of paths (or close a tour), before
    /// any optimality filter. `at` is an endpoint or an outside vertex.
    pub fn raw_moves(&self, instance: &Instance, edges: &SparseEdgeSet, at: usize) -> Vec<Move> {
        let n = instance.n();
        let mut out = Vec::new();
        match self.slot(at) {
            Slot::Interior => {}
            Slot::End { path, front } => {
                let p = &self.paths[path];
                let inner = if front { p[1] } else { p[p.len() - 2] };
                for &to in edges.neighbors(at) {
                    let to = to as usize;
                    if to != inner && self.can_add(n, at, to) {
                        out.push(Move::Attach { end: at, to });
                    }
                }
            }
            Slot::Outside => {
                let nb: Vec<usize> = edges
                    .neighbors(at)
                    .iter()
                    .map(|&v| v as usize)
                    .filter(|&v| !matches!(self.slot(v), Slot::Interior))
                    .collect();
                for (i, &a) in nb.iter().enumerate() {
                    for &b in &nb[i + 1..] {
                        let legal = match (self.slot(a), self.slot(b)) {
                            (Slot::End { path: i, .. }, Slot::End { path: j, .. }) if i == j => self.paths[i].len() + 1 == n,
                            _ => true,
                        };
                        if legal {
                            out.push(Move::Insert { v: at, a, b });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, instance: &Instance, mv: Move) -> PathSystem {
        let mut next = self.clone();
        for (u, v) in mv.edges() {
            next.add_edge(instance, u, v);
        }
        next.depth += 1;
        next
    }
}

/// No other collection of paths joining the same endpoint pairs through the
/// same interior vertices is strictly shorter. Competitor paths may use any
/// vertex pairs.
pub fn is_locally_minimal(instance: &Instance, state: &PathSystem) -> bool {
    min_path_system(instance, &state.endpoint_pairs(), &state.interior()) >= state.length()
}

/// Held-Karp over the interior vertices, filling the paths in order.
pub fn min_path_system(instance: &Instance, pairs: &[(usize, usize)], interior: &[usize]) -> i64 {
    const INF: i64 = i64::MAX / 4;
    let m = interior.len();
    assert!(m < 20, "interior too large");
    let full = (1usize << m) - 1;
    let width = m + 1;
    let mut done = vec![INF; 1 << m];
    done[0] = 0;
    let between: Vec<Vec<i64>> = interior.iter().map(|&u| interior.iter().map(|&v| instance.dist(u, v)).collect()).collect();
    let mut cur = vec![INF; (1 << m) * width];
    for &(a, b) in pairs {
        let from_a: Vec<i64> = interior.iter().map(|&v| instance.dist(a, v)).collect();
        let to_b: Vec<i64> = interior.iter().map(|&v| instance.dist(v, b)).collect();
        let direct = instance.dist(a, b);
        cur.fill(INF);
        let mut next_done = vec![INF; 1 << m];
        for mask in 0..=full {
            // slot m is "still at a"
            cur[mask * width + m] = done[mask];
            for v in 0..=m {
                let here = cur[mask * width + v];
                if here >= INF {
                    continue;
                }
                let close = if v == m { direct } else { to_b[v] };
                next_done[mask] = next_done[mask].min(here + close);
                for u in 0..m {
                    if mask & (1 << u) != 0 {
                        continue;
                    }
                    let step = if v == m { from_a[u] } else { between[v][u] };
                    let slot = &mut cur[(mask | 1 << u) * width + u];
                    *slot = (*slot).min(here + step);
                }
            }
        }
        done = next_done;
    }
    done[full]
}

type NearPairs = Arc<Vec<(usize, Vec<(usize, usize)>)>>;
type PairLists = (Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Feasible neighbour pairs of the vertices near an edge. They depend only
/// on the edge set and the search settings, so searches for different edges
/// against the same snapshot can share them.
#[derive(Debug, Default)]
pub struct PairCache {
    map: RwLock<HashMap<(usize, usize), NearPairs>>,
}

impl PairCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Refutation search for one edge.
pub struct Searcher<'a> {
    instance: &'a Instance,
    edges: &'a SparseEdgeSet,
    index: &'a NeighborIndex,
    cfg: SearchConfig,
    anchor: (usize, usize),
    candidates: Vec<usize>,
    tables: HashMap<(usize, usize), ShortcutTable>,
    /// Feasible neighbour pairs of vertices near a system edge, ignoring
    /// the system.
    near_pairs: HashMap<(usize, usize), NearPairs>,
    shared: Option<&'a PairCache>,
    /// Restricted pair lists of `(edge, r, s)` that were last seen not to
    /// eliminate the edge.
    survived: HashMap<((usize, usize), usize, usize), PairLists>,
    optimum: Option<Option<i64>>,
    nodes: usize,
    deadline: Option<Instant>,
}

impl<'a> Searcher<'a> {
    pub fn new(instance: &'a Instance, edges: &'a SparseEdgeSet, index: &'a NeighborIndex, pq: (usize, usize), cfg: SearchConfig) -> Self {
        let candidates = midpoint_candidates(instance, index, pq, cfg.branch_candidates + 2 * cfg.max_depth + 2);
        Searcher {
            instance,
            edges,
            index,
            cfg,
            anchor: pq,
            candidates,
            tables: HashMap::new(),
            near_pairs: HashMap::new(),
            shared: None,
            survived: HashMap::new(),
            optimum: None,
            nodes: 0,
            deadline: None,
        }
    }

    /// Shares neighbour pair lists with other searches on the same edge set.
    pub fn with_cache(mut self, cache: &'a PairCache) -> Self {
        self.shared = Some(cache);
        self
    }

    fn near_pairs(&mut self, key: (usize, usize)) -> NearPairs {
        if let Some(v) = self.near_pairs.get(&key) {
            return v.clone();
        }
        let shared = self.shared.and_then(|c| c.map.read().expect("poisoned").get(&key).cloned());
        let list = shared.unwrap_or_else(|| {
            let (instance, edges, index) = (self.instance, self.edges, self.index);
            let near = midpoint_candidates(instance, index, key, self.cfg.context_candidates);
            let list: NearPairs =
                Arc::new(near.into_iter().map(|r| (r, feasible_pairs(instance, edges, index, key, r, self.cfg.witnesses, None))).collect());
            if let Some(c) = self.shared {
                c.map.write().expect("poisoned").insert(key, list.clone());
            }
            list
        });
        self.near_pairs.insert(key, list.clone());
        list
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn run(&mut self) -> Refutation {
        assert!(self.cfg.max_depth >= 1);
        self.deadline = self.cfg.time_budget.map(|d| Instant::now() + d);
        let root = PathSystem::anchored(self.instance, self.anchor);
        let new = root.edges();
        match self.search(&root, &new, false) {
            Ok(true) => Refutation::Useless,
            _ => Refutation::Unknown,
        }
    }

    /// `Ok(true)`: every branch below `state` dies. `Ok(false)`: some branch
    /// survives. `Err(())`: budget exhausted.
    fn search(&mut self, state: &PathSystem, new: &[(usize, usize)], checked: bool) -> Result<bool, ()> {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget || self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(());
        }
        if state.is_closed() {
            // a closed tour has no extensions; it survives unless too long
            return Ok(self.closed_tour_refuted(state));
        }
        if !checked && self.dead(state, new) {
            return Ok(true);
        }
        if state.depth() >= self.cfg.max_depth {
            return Ok(false);
        }
        let moves = self.extensions(state);
        for mv in moves {
            let child = state.apply(self.instance, mv);
            if !self.search(&child, &mv.edges(), self.cfg.lookahead > 0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `state`, just extended by `new`, can be discarded.
    fn dead(&mut self, state: &PathSystem, new: &[(usize, usize)]) -> bool {
        if state.is_closed() {
            return self.closed_tour_refuted(state);
        }
        self.in_context_refuted(state, new)
            || self.system_edge_eliminated(state)
            || (state.interior().len() <= self.cfg.dp_max_interior && !is_locally_minimal(self.instance, state))
    }

    fn closed_tour_refuted(&mut self, state: &PathSystem) -> bool {
        let instance = self.instance;
        let opt = *self.optimum.get_or_insert_with(|| (instance.n() <= MAX_HELD_KARP).then(|| held_karp_value(instance).expect("size checked")));
        opt.is_some_and(|o| state.length() > o)
    }

    /// Filtered moves at the branch point with the fewest of them. The
    /// cheapest few points are compared after discarding dead children.
    pub fn extensions(&mut self, state: &PathSystem) -> Vec<Move> {
        let mut points: Vec<usize> = state.endpoint_pairs().into_iter().flat_map(|(a, b)| [a, b]).collect();
        points.extend(self.candidates.iter().copied().filter(|&v| !state.contains(v)).take(self.cfg.branch_candidates));
        let old = state.edges();
        let mut fits = HashMap::new();
        // Every point is filtered: one with no surviving move settles the node.
        let mut options: Vec<Vec<Move>> = Vec::with_capacity(points.len());
        for at in points {
            let raw = state.raw_moves(self.instance, self.edges, at);
            let kept: Vec<Move> = raw.into_iter().filter(|&mv| self.cheap_ok(state, &old, &mut fits, mv)).collect();
            if kept.is_empty() {
                return kept;
            }
            options.push(kept);
        }
        options.sort_by_key(Vec::len);
        options.truncate(self.cfg.lookahead.max(1));
        if self.cfg.lookahead == 0 {
            return options.into_iter().next().unwrap_or_default();
        }
        let mut best: Option<Vec<Move>> = None;
        for moves in options {
            if best.as_ref().is_some_and(|b| moves.len() >= b.len()) {
                continue;
            }
            let alive: Vec<Move> = moves.into_iter().filter(|&mv| !self.dead(&state.apply(self.instance, mv), &mv.edges())).collect();
            let empty = alive.is_empty();
            best = Some(alive);
            if empty {
                break;
            }
        }
        best.unwrap_or_default()
    }

    /// Compatibility, 3-incompatibility and close point tests for the
    /// edges a move adds.
    fn cheap_ok(&mut self, state: &PathSystem, old: &[(usize, usize)], fits: &mut HashMap<(usize, usize), bool>, mv: Move) -> bool {
        let instance = self.instance;
        let added = mv.edges();
        for (i, &e) in added.iter().enumerate() {
            let fits_old = *fits.entry(e).or_insert_with(|| old.iter().all(|&f| compatible(instance, e, f)));
            if !fits_old || added[..i].iter().any(|&f| !compatible(instance, e, f)) {
                return false;
            }
        }
        let next = state.apply(instance, mv);
        if next.is_closed() {
            return true;
        }
        // 3-edge windows through a new edge
        for path in next.paths() {
            for w in path.windows(4) {
                let touches = added.iter().any(|&(u, v)| w.windows(2).any(|e| (e[0] == u && e[1] == v) || (e[0] == v && e[1] == u)));
                if touches && self.three_incompatible(w[1], w[2], w[0], w[3]) {
                    return false;
                }
            }
        }
        !self.close_point_refuted(&next, &added)
    }

    fn three_incompatible(&mut self, p: usize, r: usize, q: usize, x: usize) -> bool {
        let (instance, edges, index, k) = (self.instance, self.edges, self.index, self.cfg.witnesses);
        self.tables
            .entry((p, r))
            .or_insert_with(|| ShortcutTable::new(instance, edges, index, p, r, k))
            .refutes(instance, q, x)
            .is_some()
    }

    /// Moving an interior vertex `r` from between `x` and `y` onto a system
    /// edge `uv` would shorten any tour containing the system.
    fn close_point_refuted(&self, state: &PathSystem, added: &[(usize, usize)]) -> bool {
        let l = |a, b| self.instance.dist(a, b);
        let touched = |v: usize| added.iter().any(|&(a, b)| a == v || b == v);
        let is_new = |(u, v): (usize, usize)| added.iter().any(|&(a, b)| (a == u && b == v) || (a == v && b == u));
        let edges = state.edges();
        for r in state.interior() {
            let (x, y) = state.neighbours(r).expect("interior");
            for &(u, v) in &edges {
                if u == r || v == r || !(touched(r) || is_new((u, v))) {
                    continue;
                }
                if (x == u && y == v) || (x == v && y == u) {
                    continue;
                }
                if l(x, y) + l(u, r) + l(v, r) < l(u, v) + l(x, r) + l(y, r) {
                    return true;
                }
            }
        }
        false
    }

    /// Direct elimination of some system edge `uv`, with the neighbour pairs
    /// of vertices near `uv` restricted to those the system still allows.
    fn system_edge_eliminated(&mut self, state: &PathSystem) -> bool {
        if self.cfg.context_candidates == 0 {
            return false;
        }
        let instance = self.instance;
        let edges = state.edges();
        for &(u, v) in &edges {
            let key = (u.min(v), u.max(v));
            let mut allowed: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
            for (r, pairs) in self.near_pairs(key).iter() {
                let r = *r;
                let fixed = state.fixed_neighbours(r);
                let mut verdicts: Vec<(usize, bool)> = Vec::new();
                let mut ok_edge = |x: usize| {
                    if let Some(&(_, ok)) = verdicts.iter().find(|e| e.0 == x) {
                        return ok;
                    }
                    let ok = fixed.contains(&x) || (state.fixed_neighbours(x).len() < 2 && edges.iter().all(|&f| compatible(instance, (r, x), f)));
                    verdicts.push((x, ok));
                    ok
                };
                let kept: Vec<(usize, usize)> = pairs
                    .iter()
                    .copied()
                    .filter(|&(x, y)| fixed.iter().all(|&f| f == x || f == y) && ok_edge(x) && ok_edge(y))
                    .collect();
                if kept.is_empty() {
                    return true;
                }
                allowed.push((r, kept));
            }
            for (i, (r, pr)) in allowed.iter().enumerate() {
                for (s, ps) in &allowed[i + 1..] {
                    let id = (key, *r, *s);
                    if self.survived.get(&id).is_some_and(|(a, b)| a == pr && b == ps) {
                        continue;
                    }
                    if all_combinations_refuted(instance, key, *r, pr, *s, ps, 4096) == Some(true) {
                        return true;
                    }
                    self.survived.insert(id, (pr.clone(), ps.clone()));
                }
            }
        }
        false
    }

    /// Combination test of the main elimination argument for every system
    /// edge and pair of interior vertices involving a new edge.
    fn in_context_refuted(&self, state: &PathSystem, added: &[(usize, usize)]) -> bool {
        let touched = |v: usize| added.iter().any(|&(a, b)| a == v || b == v);
        let is_new = |(u, v): (usize, usize)| added.iter().any(|&(a, b)| (a == u && b == v) || (a == v && b == u));
        let interior: Vec<(usize, (usize, usize))> = state.interior().into_iter().map(|r| (r, state.neighbours(r).expect("interior"))).collect();
        for (u, v) in state.edges() {
            let edge_new = is_new((u, v));
            for (i, &(r, xy)) in interior.iter().enumerate() {
                if r == u || r == v {
                    continue;
                }
                for &(s, zw) in &interior[i + 1..] {
                    if s == u || s == v || !(edge_new || touched(r) || touched(s)) {
                        continue;
                    }
                    if combination_refuted(self.instance, (u, v), r, xy, s, zw) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Tries to prove `pq` useless by exhausting all path systems around it.
pub fn refute_edge(instance: &Instance, edges: &SparseEdgeSet, index: &NeighborIndex, pq: (usize, usize), cfg: &SearchConfig) -> Refutation {
    Searcher::new(instance, edges, index, pq, *cfg).run()
}
