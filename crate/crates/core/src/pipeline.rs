//! The three elimination steps and their orchestration.
//!
//! Step 1 streams all vertex pairs and keeps a pair unless two strongly
//! potential points near its midpoint eliminate it. Steps 2 and 3 work in
//! rounds: every surviving edge is judged against a frozen snapshot of the
//! edge set, and removals are applied together at the end of the round.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtrack::{PairCache, Refutation, SearchConfig, Searcher};
use crate::certify::{certify_strong, PotentialPoint};
use crate::compat::ShortcutCache;
use crate::edges::SparseEdgeSet;
use crate::eliminate::{direct_eliminate, main_theorem_check, midpoint_candidates, DirectConfig, Method, Verdict};
use crate::error::{Error, Result};
use crate::geometry::{compute_deltas, DeltaRadii};
use crate::kdtree::{KnnScratch, NeighborIndex};
use crate::scalar::Scalar;
use crate::tsplib::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub step1: bool,
    pub step2: bool,
    pub step3: bool,
    /// Vertices nearest the midpoint examined per edge in Step 1. Every
    /// examined vertex counts, certified or not.
    pub candidates: usize,
    pub direct: DirectConfig,
    pub search: SearchConfig,
    pub step2_rounds: usize,
    pub step3_rounds: usize,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Strictness margin; `None` uses the scalar type's default.
    pub margin: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            step1: true,
            step2: true,
            step3: true,
            candidates: 10,
            direct: DirectConfig::default(),
            search: SearchConfig::default(),
            step2_rounds: 10,
            step3_rounds: 1,
            threads: None,
            margin: None,
        }
    }
}

impl PipelineConfig {
    /// Enables exactly the listed steps (1, 2, 3).
    pub fn with_steps(mut self, steps: &[u8]) -> Self {
        self.step1 = steps.contains(&1);
        self.step2 = steps.contains(&2);
        self.step3 = steps.contains(&3);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub name: String,
    pub n: usize,
    pub m_input: u64,
    pub step1_edges: Option<usize>,
    pub step1_seconds: Option<f64>,
    pub step2_edges: Option<usize>,
    pub step2_seconds: Option<f64>,
    pub step3_edges: Option<usize>,
    pub step3_seconds: Option<f64>,
    /// Final edge count divided by `n`.
    pub ratio: f64,
    /// Eliminated edges per method.
    pub methods: BTreeMap<Method, u64>,
    /// The nearest-neighbour distance of some vertex is at most 1, so its
    /// clearance radius gives no room for certificates.
    pub short_edges: bool,
}

impl RunStats {
    /// The same record with all timing fields cleared.
    pub fn without_timings(&self) -> RunStats {
        RunStats {
            step1_seconds: self.step1_seconds.map(|_| 0.0),
            step2_seconds: self.step2_seconds.map(|_| 0.0),
            step3_seconds: self.step3_seconds.map(|_| 0.0),
            ..self.clone()
        }
    }
}

/// Shared read-only state for one instance.
pub struct Prepared<'a, S> {
    pub instance: &'a Instance,
    pub index: NeighborIndex,
    pub deltas: DeltaRadii<S>,
    pub margin: S,
}

impl<'a, S: Scalar> Prepared<'a, S> {
    pub fn new(instance: &'a Instance, margin: Option<f64>) -> Result<Self> {
        let index = NeighborIndex::new(instance.coords());
        let deltas = compute_deltas(instance, &index)?;
        Ok(Prepared {
            instance,
            index,
            deltas,
            margin: S::of(margin.unwrap_or(S::DEFAULT_MARGIN)),
        })
    }
}

/// Step 1 on the implicit complete graph.
pub fn step1_fast<S: Scalar>(prep: &Prepared<'_, S>, candidates: usize) -> SparseEdgeSet {
    let n = prep.instance.n();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map_init(
            || (KnnScratch::default(), Vec::new(), Vec::new()),
            |(scratch, near, certified), p| {
                let mut row = Vec::new();
                for q in p + 1..n {
                    if !fast_eliminates(prep, (p, q), candidates, scratch, near, certified) {
                        row.push(q as u32);
                    }
                }
                row
            },
        )
        .collect();
    SparseEdgeSet::from_forward_rows(n, rows)
}

fn fast_eliminates<S: Scalar>(
    prep: &Prepared<'_, S>,
    (p, q): (usize, usize),
    candidates: usize,
    scratch: &mut KnnScratch,
    near: &mut Vec<usize>,
    certified: &mut Vec<PotentialPoint<S>>,
) -> bool {
    let inst = prep.instance;
    let (a, b) = (inst.point(p), inst.point(q));
    let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    prep.index.nearest(mid, candidates, |v| v == p || v == q, scratch, near);
    certified.clear();
    for &r in near.iter() {
        if let Ok(pr) = certify_strong(inst, &prep.deltas, (p, q), r, prep.margin) {
            if certified.iter().any(|s| main_theorem_check(inst, (p, q), s, &pr, prep.margin)) {
                return true;
            }
            certified.push(pr);
        }
    }
    false
}

/// Step 1 verdict for a single pair, with the witnessing vertices.
pub fn step1_verdict<S: Scalar>(prep: &Prepared<'_, S>, (p, q): (usize, usize), candidates: usize) -> Verdict {
    let inst = prep.instance;
    let near = midpoint_candidates(inst, &prep.index, (p, q), candidates);
    let mut certified: Vec<PotentialPoint<S>> = Vec::new();
    for r in near {
        if let Ok(pr) = certify_strong(inst, &prep.deltas, (p, q), r, prep.margin) {
            if let Some(s) = certified.iter().find(|s| main_theorem_check(inst, (p, q), s, &pr, prep.margin)) {
                return Verdict::useless((p, q), Method::MainFast, crate::eliminate::Witness::Pair(s.vertex, r));
            }
            certified.push(pr);
        }
    }
    Verdict::kept((p, q))
}

/// Rounds of direct elimination until nothing changes or `rounds` is hit.
pub fn step2_direct(
    instance: &Instance,
    index: &NeighborIndex,
    edges: &SparseEdgeSet,
    cfg: &DirectConfig,
    rounds: usize,
    methods: &mut BTreeMap<Method, u64>,
) -> SparseEdgeSet {
    let mut current = edges.clone();
    for _ in 0..rounds {
        let list = current.edge_vec();
        let near: Vec<Vec<usize>> = list.par_iter().map(|&e| midpoint_candidates(instance, index, e, cfg.candidates)).collect();
        let keys = list.iter().zip(&near).flat_map(|(&(p, q), rs)| rs.iter().flat_map(move |&r| [(p, r), (q, r)])).collect();
        let cache = ShortcutCache::build(instance, &current, index, keys, cfg.witnesses);
        let snap = &current;
        let removed: Vec<Verdict> = list
            .par_iter()
            .zip(&near)
            .map(|(&e, rs)| direct_eliminate(instance, snap, index, e, rs, cfg, Some(&cache)))
            .filter(|v| v.useless)
            .collect();
        if !apply_removals(&mut current, &removed, methods) {
            break;
        }
    }
    current
}

fn apply_removals(current: &mut SparseEdgeSet, removed: &[Verdict], methods: &mut BTreeMap<Method, u64>) -> bool {
    if removed.is_empty() {
        return false;
    }
    for v in removed {
        *methods.entry(v.method).or_default() += 1;
    }
    let gone: Vec<(usize, usize)> = removed.iter().map(|v| v.edge).collect();
    current.remove_all(&gone);
    true
}

/// Rounds of backtrack refutation.
pub fn step3_backtrack(
    instance: &Instance,
    index: &NeighborIndex,
    edges: &SparseEdgeSet,
    cfg: &SearchConfig,
    rounds: usize,
    methods: &mut BTreeMap<Method, u64>,
) -> SparseEdgeSet {
    let mut current = edges.clone();
    for _ in 0..rounds {
        let list = current.edge_vec();
        let cache = PairCache::new();
        let snap = &current;
        let removed: Vec<Verdict> = list
            .par_iter()
            .filter(|&&e| Searcher::new(instance, snap, index, e, *cfg).with_cache(&cache).run() == Refutation::Useless)
            .map(|&e| Verdict {
                edge: e,
                useless: true,
                method: Method::Backtrack,
                witness: None,
            })
            .collect();
        if !apply_removals(&mut current, &removed, methods) {
            break;
        }
    }
    current
}

/// Runs the enabled steps. Without Step 1 the complete graph is the input
/// of Step 2.
pub fn run<S: Scalar>(instance: &Instance, cfg: &PipelineConfig) -> Result<(SparseEdgeSet, RunStats)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| run_in_pool::<S>(instance, cfg))
}

fn run_in_pool<S: Scalar>(instance: &Instance, cfg: &PipelineConfig) -> Result<(SparseEdgeSet, RunStats)> {
    let prep = Prepared::<S>::new(instance, cfg.margin)?;
    let n = instance.n();
    let mut stats = RunStats {
        name: instance.name().to_string(),
        n,
        m_input: instance.complete_edge_count(),
        step1_edges: None,
        step1_seconds: None,
        step2_edges: None,
        step2_seconds: None,
        step3_edges: None,
        step3_seconds: None,
        ratio: 0.0,
        methods: BTreeMap::new(),
        short_edges: prep.deltas.min_len() <= 1,
    };
    let mut edges = if cfg.step1 {
        let t = Instant::now();
        let e = step1_fast(&prep, cfg.candidates);
        stats.step1_seconds = Some(t.elapsed().as_secs_f64());
        stats.step1_edges = Some(e.edge_count());
        let fast = stats.m_input - e.edge_count() as u64;
        if fast > 0 {
            stats.methods.insert(Method::MainFast, fast);
        }
        e
    } else {
        SparseEdgeSet::complete(n)
    };
    if cfg.step2 {
        let t = Instant::now();
        edges = step2_direct(instance, &prep.index, &edges, &cfg.direct, cfg.step2_rounds, &mut stats.methods);
        stats.step2_seconds = Some(t.elapsed().as_secs_f64());
        stats.step2_edges = Some(edges.edge_count());
    }
    if cfg.step3 {
        let t = Instant::now();
        edges = step3_backtrack(instance, &prep.index, &edges, &cfg.search, cfg.step3_rounds, &mut stats.methods);
        stats.step3_seconds = Some(t.elapsed().as_secs_f64());
        stats.step3_edges = Some(edges.edge_count());
    }
    stats.ratio = edges.edge_count() as f64 / n as f64;
    Ok((edges, stats))
}
