//! Every elimination is checked against exhaustive optimum-tour enumeration.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsify::backtrack::{refute_edge, Refutation, SearchConfig};
use sparsify::certify::{certify_quadratic, certify_strong};
use sparsify::compat::{compatible, three_incompatible};
use sparsify::eliminate::{close_point_check, direct_eliminate, main_theorem_check, midpoint_candidates, replay_direct, DirectConfig};
use sparsify::geometry::compute_deltas;
use sparsify::oracle::{enumerate_optimum_tours, held_karp_on_edges, held_karp_value, Tour};
use sparsify::pipeline::{run, PipelineConfig};
use sparsify::{DistanceMode, Instance, NeighborIndex, Scalar, SparseEdgeSet};

fn uniform(rng: &mut ChaCha8Rng, n: usize, side: i32, mode: DistanceMode) -> Option<Instance> {
    let pts = (0..n).map(|_| [rng.gen_range(0..=side) as f64, rng.gen_range(0..=side) as f64]).collect();
    let inst = Instance::new("rand", pts, mode).ok()?;
    // duplicates are rejected downstream
    compute_deltas::<f64>(&inst, &NeighborIndex::new(inst.coords())).ok()?;
    Some(inst)
}

/// A few tight clusters far apart, which is where constant-time
/// certificates succeed.
fn clustered(rng: &mut ChaCha8Rng, n: usize, mode: DistanceMode) -> Option<Instance> {
    let centres: Vec<[f64; 2]> = (0..rng.gen_range(2..=3)).map(|_| [rng.gen_range(0..1000) as f64, rng.gen_range(0..1000) as f64]).collect();
    let pts = (0..n)
        .map(|i| {
            let c = centres[i % centres.len()];
            [c[0] + rng.gen_range(-15..=15) as f64, c[1] + rng.gen_range(-15..=15) as f64]
        })
        .collect();
    let inst = Instance::new("clu", pts, mode).ok()?;
    compute_deltas::<f64>(&inst, &NeighborIndex::new(inst.coords())).ok()?;
    Some(inst)
}

struct Truth {
    tours: Vec<Tour>,
    used: BTreeSet<(usize, usize)>,
}

impl Truth {
    fn new(inst: &Instance) -> Self {
        let tours = enumerate_optimum_tours(inst).unwrap();
        let used = tours.iter().flat_map(|t| t.edges().collect::<Vec<_>>()).collect();
        Truth { tours, used }
    }

    fn in_some_tour(&self, (u, v): (usize, usize)) -> bool {
        self.used.contains(&(u.min(v), u.max(v)))
    }

    fn neighbours(t: &Tour, v: usize) -> (usize, usize) {
        let n = t.order.len();
        let i = t.order.iter().position(|&x| x == v).unwrap();
        (t.order[(i + n - 1) % n], t.order[(i + 1) % n])
    }
}

fn instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(6..=9);
        let mode = if rng.gen_bool(0.25) { DistanceMode::Ceil2d } else { DistanceMode::Euc2d };
        let inst = match rng.gen_range(0..3) {
            0 => clustered(&mut rng, n, mode),
            1 => uniform(&mut rng, n, 60, mode),
            _ => uniform(&mut rng, n, 1000, mode),
        };
        out.extend(inst);
    }
    out
}

#[test]
fn tour_edges_are_pairwise_compatible() {
    for inst in instances(1, 150) {
        let truth = Truth::new(&inst);
        for t in &truth.tours {
            for (e, f) in t.edges().collect::<Vec<_>>().into_iter().tuple_combinations() {
                assert!(compatible(&inst, e, f));
            }
        }
    }
}

#[test]
fn three_incompatible_paths_are_in_no_optimum_tour() {
    let mut fired = 0;
    for inst in instances(2, 150) {
        let truth = Truth::new(&inst);
        let idx = NeighborIndex::new(inst.coords());
        let k = SparseEdgeSet::complete(inst.n());
        for t in &truth.tours {
            let n = t.order.len();
            for i in 0..n {
                let w: Vec<usize> = (0..4).map(|j| t.order[(i + j) % n]).collect();
                for (q, p, r, x) in [(w[0], w[1], w[2], w[3]), (w[3], w[2], w[1], w[0])] {
                    assert!(!three_incompatible(&inst, &k, &idx, (p, q, r, x), 10), "{:?}", t.order);
                }
            }
        }
        for (p, q, r, x) in (0..inst.n()).permutations(4).map(|v| (v[0], v[1], v[2], v[3])).take(300) {
            fired += three_incompatible(&inst, &k, &idx, (p, q, r, x), 10) as usize;
        }
    }
    assert!(fired > 0);
}

#[test]
fn certificates_hold_in_every_optimum_tour() {
    let mut strong = 0;
    let mut quadratic = 0;
    for inst in instances(3, 250) {
        let truth = Truth::new(&inst);
        let idx = NeighborIndex::new(inst.coords());
        let d = compute_deltas::<f64>(&inst, &idx).unwrap();
        let k = SparseEdgeSet::complete(inst.n());
        for t in &truth.tours {
            for (p, q) in t.edges() {
                for r in (0..inst.n()).filter(|&r| r != p && r != q) {
                    let (x, y) = Truth::neighbours(t, r);
                    let certs = [certify_strong(&inst, &d, (p, q), r, 1e-6).ok(), certify_quadratic(&inst, &k, &d, (p, q), r, 1e-6).ok()];
                    for (i, c) in certs.into_iter().enumerate() {
                        let Some(c) = c else { continue };
                        if i == 0 {
                            strong += 1;
                            // the tour angle at r is at least γ_r
                            let (a, b, o) = (inst.point(x), inst.point(y), inst.point(r));
                            let (u, v) = ([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
                            let ang = ((u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]))).clamp(-1.0, 1.0).acos();
                            assert!(ang >= c.cover.gamma - 1e-9, "angle {ang} < gamma {}", c.cover.gamma);
                        } else {
                            quadratic += 1;
                        }
                        // Strong certificates speak about the exact cones, so
                        // test with slightly shrunk ones; quadratic ones define
                        // their cones with the widened classification.
                        let m = if i == 0 { -1e-6 } else { 1e-6 };
                        let (mx, my) = (c.cover.classify(&inst, x, m), c.cover.classify(&inst, y, m));
                        assert!(!(mx.in_p() && my.in_p()) && !(mx.in_q() && my.in_q()), "r {r} neighbours {x} {y} share a cone");
                        // tour neighbours respect the bounds
                        for (z, m) in [(x, mx), (y, my)] {
                            if m.in_p() {
                                assert!(c.bound_p <= (inst.dist(r, z) - inst.dist(p, z)) as f64 + 1e-9);
                            }
                            if m.in_q() {
                                assert!(c.bound_q <= (inst.dist(r, z) - inst.dist(q, z)) as f64 + 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(strong > 0 && quadratic > 0, "strong {strong}, quadratic {quadratic}");
}

fn check_eliminators<S: Scalar>(inst: &Instance, truth: &Truth, margin: S, fired: &mut [usize; 4]) {
    let idx = NeighborIndex::new(inst.coords());
    let d = compute_deltas::<S>(inst, &idx).unwrap();
    let k = SparseEdgeSet::complete(inst.n());
    let n = inst.n();
    for (p, q) in (0..n).tuple_combinations() {
        let tour_edge = truth.in_some_tour((p, q));
        for r in (0..n).filter(|&r| r != p && r != q) {
            if close_point_check(inst, &k, (p, q), r) {
                fired[0] += 1;
                assert!(!tour_edge, "close point removed tour edge {p}-{q} via {r}");
            }
        }
        let certs: Vec<_> = (0..n).filter(|&r| r != p && r != q).filter_map(|r| certify_strong(inst, &d, (p, q), r, margin).ok()).collect();
        let quad: Vec<_> = (0..n).filter(|&r| r != p && r != q).filter_map(|r| certify_quadratic(inst, &k, &d, (p, q), r, margin).ok()).collect();
        for set in [&certs, &quad] {
            for (a, b) in set.iter().tuple_combinations() {
                if main_theorem_check(inst, (p, q), a, b, margin) {
                    fired[1] += 1;
                    assert!(!tour_edge, "main check removed tour edge {p}-{q} via {} {}", a.vertex, b.vertex);
                }
            }
        }
        let near = midpoint_candidates(inst, &idx, (p, q), 10);
        let v = direct_eliminate(inst, &k, &idx, (p, q), &near, &DirectConfig::default(), None);
        if v.useless {
            fired[2] += 1;
            assert!(!tour_edge, "direct removed tour edge {p}-{q}: {v:?}");
            assert!(replay_direct(inst, &k, &idx, &v, &DirectConfig::default()));
        }
        let cfg = SearchConfig { max_depth: 6, ..SearchConfig::default() };
        if refute_edge(inst, &k, &idx, (p, q), &cfg) == Refutation::Useless {
            fired[3] += 1;
            assert!(!tour_edge, "backtrack removed tour edge {p}-{q}");
        }
    }
}

#[test]
fn individual_eliminators_are_sound_f64() {
    let mut fired = [0; 4];
    for inst in instances(4, 300) {
        let truth = Truth::new(&inst);
        check_eliminators::<f64>(&inst, &truth, 1e-6, &mut fired);
    }
    assert!(fired.iter().all(|&f| f > 0), "{fired:?}");
}

#[test]
fn individual_eliminators_are_sound_f32() {
    let mut fired = [0; 4];
    for inst in instances(5, 150) {
        let truth = Truth::new(&inst);
        check_eliminators::<f32>(&inst, &truth, f32::DEFAULT_MARGIN as f32, &mut fired);
    }
    assert!(fired[0] > 0 && fired[2] > 0, "{fired:?}");
}

#[test]
fn pipeline_preserves_optimum_on_ceil_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 150 {
        let n = rng.gen_range(6..=10);
        let inst = if done % 2 == 0 { clustered(&mut rng, n, DistanceMode::Ceil2d) } else { uniform(&mut rng, n, 200, DistanceMode::Ceil2d) };
        let Some(inst) = inst else { continue };
        done += 1;
        let cfg = PipelineConfig {
            search: SearchConfig { max_depth: 4, ..SearchConfig::default() },
            threads: Some(1),
            ..PipelineConfig::default()
        };
        let (e, _) = run::<f64>(&inst, &cfg).unwrap();
        let truth = Truth::new(&inst);
        for (u, v) in truth.used.iter().copied() {
            assert!(e.contains(u, v), "lost tour edge {u}-{v}");
        }
        assert_eq!(held_karp_on_edges(&inst, &e).unwrap(), Some(held_karp_value(&inst).unwrap()));
    }
}
