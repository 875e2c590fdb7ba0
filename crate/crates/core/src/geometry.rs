//! Rounded and real distances, clearance radii and triangle angles.
//!
//! The certification geometry needs a real "reference length" `l'` with
//! `l'(uv) - 1/2 <= |uv| <= l'(uv) + 1/2`. For EUC_2D that is the rounded
//! length itself. For CEIL_2D, `|uv|` lies in `(l - 1, l]`, so we use
//! `l' = l - 1/2`. Every inequality that compares equally many edge lengths
//! on both sides is unchanged by the shift; the only places it shows up are
//! the clearance radius and the lone `l(pq)` in the circle-intersection and
//! tour-angle bounds.

use crate::error::{Error, Result};
use crate::kdtree::NeighborIndex;
use crate::scalar::Scalar;
use crate::tsplib::{DistanceMode, Instance};

impl DistanceMode {
    /// Rounds a non-negative length. Truncating casts stand in for
    /// `floor`, which is a library call on baseline x86-64.
    #[inline]
    pub fn round(self, d: f64) -> i64 {
        debug_assert!(d >= 0.0);
        match self {
            DistanceMode::Euc2d => (d + 0.5) as i64,
            DistanceMode::Ceil2d => {
                let t = d as i64;
                t + ((t as f64) < d) as i64
            }
        }
    }

    /// `l - l'` for this mode.
    #[inline]
    pub fn reference_shift(self) -> f64 {
        match self {
            DistanceMode::Euc2d => 0.0,
            DistanceMode::Ceil2d => 0.5,
        }
    }
}

impl Instance {
    #[inline]
    pub fn euclid_f64(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.point(u), self.point(v));
        let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Rounded length `l(uv)`, bit-exact with the TSPLIB definition.
    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> i64 {
        if u == v {
            return 0;
        }
        self.mode().round(self.euclid_f64(u, v))
    }

    /// Real Euclidean distance `|uv|` in the scalar type `S`.
    #[inline]
    pub fn euclid<S: Scalar>(&self, u: usize, v: usize) -> S {
        let (a, b) = (self.point(u), self.point(v));
        let dx = S::of(a[0]) - S::of(b[0]);
        let dy = S::of(a[1]) - S::of(b[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Reference length `l'(uv)` used by the certification geometry.
    #[inline]
    pub fn reference_len<S: Scalar>(&self, u: usize, v: usize) -> S {
        S::of_len(self.dist(u, v)) - S::of(self.mode().reference_shift())
    }

    #[inline]
    pub fn point_s<S: Scalar>(&self, v: usize) -> [S; 2] {
        let p = self.point(v);
        [S::of(p[0]), S::of(p[1])]
    }
}

pub fn dist(instance: &Instance, u: usize, v: usize) -> i64 {
    instance.dist(u, v)
}

pub fn euclid<S: Scalar>(instance: &Instance, u: usize, v: usize) -> S {
    instance.euclid(u, v)
}

#[inline]
pub(crate) fn norm<S: Scalar>(a: [S; 2], b: [S; 2]) -> S {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Per-vertex clearance radius `δ_r`: the open disk of this radius around
/// `r` contains no other vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRadii<S> {
    values: Vec<S>,
    min_len: i64,
}

impl<S: Scalar> DeltaRadii<S> {
    #[inline]
    pub fn get(&self, r: usize) -> S {
        self.values[r]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    /// Smallest rounded length over all pairs.
    pub fn min_len(&self) -> i64 {
        self.min_len
    }

    /// Radii from known nearest rounded lengths.
    pub fn from_nearest_lengths(mode: DistanceMode, nearest: &[i64]) -> Self {
        let shift = mode.reference_shift();
        DeltaRadii {
            values: nearest
                .iter()
                .map(|&l| S::of(l as f64 - shift - 0.5))
                .collect(),
            min_len: nearest.iter().copied().min().unwrap_or(0),
        }
    }
}

/// `δ_r = l'_min(r) - 1/2` where `l'_min(r)` is the reference length to the
/// nearest other vertex. Rounded length is monotone in Euclidean distance,
/// so the Euclidean nearest neighbour attains the minimum.
pub fn compute_deltas<S: Scalar>(instance: &Instance, index: &NeighborIndex) -> Result<DeltaRadii<S>> {
    let mut nearest = Vec::with_capacity(instance.n());
    for r in 0..instance.n() {
        let s = index.nearest_other(r).expect("n >= 4");
        let l = instance.dist(r, s);
        if l == 0 {
            return Err(Error::DuplicatePoint(r.min(s) + 1, r.max(s) + 1));
        }
        nearest.push(l);
    }
    Ok(DeltaRadii::from_nearest_lengths(instance.mode(), &nearest))
}

/// Cosine of the angle opposite side `c` in a triangle with sides `a, b, c`.
#[inline]
pub fn triangle_angle_cos<S: Scalar>(a: S, b: S, c: S) -> S {
    ((a * a + b * b - c * c) / (S::of(2.0) * a * b)).clamp_unit()
}

/// The radii `(l_p, l_q)` of the circles around `p` and `q`:
/// `l_p = δ_r + l(pq) - l(qr) - 1`, `l_q = δ_r + l(pq) - l(pr) - 1`.
#[inline]
pub fn cone_radii<S: Scalar>(instance: &Instance, deltas: &DeltaRadii<S>, p: usize, q: usize, r: usize) -> (S, S) {
    let d = deltas.get(r);
    let lpq = instance.dist(p, q);
    let lp = d + S::of_len(lpq - instance.dist(q, r) - 1);
    let lq = d + S::of_len(lpq - instance.dist(p, r) - 1);
    (lp, lq)
}

/// Full opening angles `(α_p, α_q)` in radians of the cones `R_p`, `R_q`
/// around `r`.
pub fn cone_half_angles<S: Scalar>(
    instance: &Instance,
    deltas: &DeltaRadii<S>,
    p: usize,
    q: usize,
    r: usize,
) -> (S, S) {
    let (lp, lq) = cone_radii(instance, deltas, p, q, r);
    cone_angles_from(deltas.get(r), lp, lq, instance.euclid(r, p), instance.euclid(r, q))
}

#[inline]
pub(crate) fn cone_angles_from<S: Scalar>(delta: S, lp: S, lq: S, rp: S, rq: S) -> (S, S) {
    let two = S::of(2.0);
    let ap = two * ((lq * lq - delta * delta - rq * rq) / (two * delta * rq)).clamp_unit().acos();
    let aq = two * ((lp * lp - delta * delta - rp * rp) / (two * delta * rp)).clamp_unit().acos();
    (ap, aq)
}

/// `(cos ε_p, cos ε_q, cos θ_p, cos θ_q)`: `ε` are the angles of triangle
/// `pqr` at `p` and `q`; `θ_p` is the angle at `p` of the triangle `p r t`
/// with `|rt| = δ_r`, `|pt| = l_p` (likewise `θ_q`).
pub fn eps_theta_cosines<S: Scalar>(
    instance: &Instance,
    p: usize,
    q: usize,
    r: usize,
    lp: S,
    lq: S,
    delta: S,
) -> [S; 4] {
    eps_theta_from(instance.euclid(p, q), instance.euclid(p, r), instance.euclid(q, r), lp, lq, delta)
}

#[inline]
pub(crate) fn eps_theta_from<S: Scalar>(pq: S, pr: S, qr: S, lp: S, lq: S, delta: S) -> [S; 4] {
    [
        triangle_angle_cos(pq, pr, qr),
        triangle_angle_cos(pq, qr, pr),
        triangle_angle_cos(lp, pr, delta),
        triangle_angle_cos(lq, qr, delta),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn inst(pts: &[[f64; 2]], mode: DistanceMode) -> Instance {
        let mut v = pts.to_vec();
        while v.len() < 4 {
            v.push([1e6 + v.len() as f64 * 1e5, 1e6]);
        }
        Instance::new("t", v, mode).unwrap()
    }

    #[test]
    fn rounding_matches_floor_and_ceil() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut xs: Vec<f64> = (0..2000).flat_map(|i| [i as f64, i as f64 + 0.5, i as f64 - 1e-12, i as f64 + 0.5 - 1e-12]).collect();
        xs.extend((0..10_000).map(|_| rng.gen_range(0.0..1e7)));
        for d in xs.into_iter().filter(|&d| d >= 0.0) {
            assert_eq!(DistanceMode::Euc2d.round(d), (d + 0.5).floor() as i64, "{d}");
            assert_eq!(DistanceMode::Ceil2d.round(d), d.ceil() as i64, "{d}");
        }
    }

    #[test]
    fn rounded_distances() {
        let e = inst(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]], DistanceMode::Euc2d);
        assert_eq!(e.dist(0, 1), 5);
        assert_eq!(e.dist(0, 2), 1);
        assert_eq!(e.dist(2, 0), e.dist(0, 2));
        let c = inst(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]], DistanceMode::Ceil2d);
        assert_eq!(c.dist(0, 2), 2);
        assert_eq!(c.dist(0, 1), 5);
        // 0.5 rounds up under EUC_2D
        let h = inst(&[[0.0, 0.0], [2.5, 0.0]], DistanceMode::Euc2d);
        assert_eq!(h.dist(0, 1), 3);
    }

    #[test]
    fn euclid_direct_cases() {
        let e = inst(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0], [-2.0, 0.5]], DistanceMode::Euc2d);
        assert_relative_eq!(e.euclid::<f64>(0, 1), 5.0);
        assert_relative_eq!(e.euclid::<f64>(0, 2), 2f64.sqrt());
        assert_relative_eq!(e.euclid::<f32>(3, 0), 2.0615528f32, epsilon = 1e-6);
    }

    #[test]
    fn reference_length_sandwich_holds_for_both_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for mode in [DistanceMode::Euc2d, DistanceMode::Ceil2d] {
            let pts: Vec<[f64; 2]> = (0..60).map(|_| [rng.gen_range(0.0..500.0), rng.gen_range(0.0..500.0)]).collect();
            let i = Instance::new("r", pts, mode).unwrap();
            for u in 0..60 {
                for v in 0..60 {
                    if u == v {
                        continue;
                    }
                    let d: f64 = i.euclid(u, v);
                    let l: f64 = i.reference_len(u, v);
                    assert!(l - 0.5 <= d + 1e-9 && d <= l + 0.5 + 1e-9, "{mode:?} {u} {v} {d} {l}");
                    if mode == DistanceMode::Euc2d {
                        assert_eq!(l, i.dist(u, v) as f64);
                    }
                }
            }
        }
    }

    #[test]
    fn deltas_collinear_and_square() {
        let c = Instance::new(
            "c",
            vec![[0.0, 0.0], [10.0, 0.0], [30.0, 0.0], [30.0, 100.0]],
            DistanceMode::Euc2d,
        )
        .unwrap();
        let idx = NeighborIndex::new(c.coords());
        let d: DeltaRadii<f64> = compute_deltas(&c, &idx).unwrap();
        assert_eq!(&d.as_slice()[..3], &[9.5, 9.5, 19.5]);

        let sq = Instance::new(
            "sq",
            vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]],
            DistanceMode::Euc2d,
        )
        .unwrap();
        let d: DeltaRadii<f64> = compute_deltas(&sq, &NeighborIndex::new(sq.coords())).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 9.5));
        assert_eq!(d.min_len(), 10);

        let ceil = Instance::new("sq", sq.coords().to_vec(), DistanceMode::Ceil2d).unwrap();
        let d: DeltaRadii<f64> = compute_deltas(&ceil, &NeighborIndex::new(ceil.coords())).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 9.0));
    }

    #[test]
    fn deltas_reject_duplicates() {
        let i = Instance::new(
            "d",
            vec![[0.0, 0.0], [5.0, 5.0], [0.2, 0.1], [9.0, 1.0]],
            DistanceMode::Euc2d,
        )
        .unwrap();
        let err = compute_deltas::<f64>(&i, &NeighborIndex::new(i.coords())).unwrap_err();
        assert_eq!(err, Error::DuplicatePoint(1, 3));
    }

    #[test]
    fn deltas_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mode in [DistanceMode::Euc2d, DistanceMode::Ceil2d] {
            for _ in 0..5 {
                let pts: Vec<[f64; 2]> = (0..50).map(|_| [rng.gen_range(0..400) as f64, rng.gen_range(0..400) as f64]).collect();
                let i = Instance::new("r", pts, mode).unwrap();
                let Ok(d) = compute_deltas::<f64>(&i, &NeighborIndex::new(i.coords())) else {
                    continue;
                };
                for r in 0..50 {
                    let lmin = (0..50).filter(|&s| s != r).map(|s| i.dist(r, s)).min().unwrap();
                    assert_eq!(d.get(r), lmin as f64 - mode.reference_shift() - 0.5);
                    for s in (0..50).filter(|&s| s != r) {
                        assert!(i.euclid::<f64>(r, s) >= d.get(r));
                    }
                }
            }
        }
    }

    #[test]
    fn triangle_angles() {
        assert_relative_eq!(triangle_angle_cos(3.0f64, 4.0, 5.0), 0.0, epsilon = 1e-15);
        assert_eq!(triangle_angle_cos(1.0f64, 1.0, 2.0), -1.0);
        assert_relative_eq!(triangle_angle_cos(5.0f64, 5.0, 5.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(triangle_angle_cos(5.0f32, 5.0, 5.0), 0.5, epsilon = 1e-6);
        // slightly impossible triangle clamps
        assert_eq!(triangle_angle_cos(1.0f64, 1.0, 2.0000001), -1.0);
    }

    #[test]
    fn cone_angle_boundary_cases() {
        // l_q^2 = δ^2 + |rq|^2 gives arccos(0), so α_p = 180°.
        let (ap, _) = cone_angles_from(3.0f64, 1.0, 5.0, 10.0, 4.0);
        assert_relative_eq!(ap, PI, epsilon = 1e-12);
        // inner tangency l_q = |rq| - δ gives argument -1, so α_p = 360°.
        let (ap, _) = cone_angles_from(2.0f64, 1.0, 8.0, 10.0, 10.0);
        assert_relative_eq!(ap, 2.0 * PI, epsilon = 1e-12);
        // circle around q too large: empty cone
        let (ap, _) = cone_angles_from(2.0f64, 1.0, 30.0, 10.0, 10.0);
        assert_eq!(ap, 0.0);
    }

    /// Intersection points of two circles, used as an independent construction.
    fn circle_intersections(c0: [f64; 2], r0: f64, c1: [f64; 2], r1: f64) -> Option<([f64; 2], [f64; 2])> {
        let d = ((c1[0] - c0[0]).powi(2) + (c1[1] - c0[1]).powi(2)).sqrt();
        if d > r0 + r1 || d < (r0 - r1).abs() || d == 0.0 {
            return None;
        }
        let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
        let h = (r0 * r0 - a * a).max(0.0).sqrt();
        let ux = (c1[0] - c0[0]) / d;
        let uy = (c1[1] - c0[1]) / d;
        let mx = c0[0] + a * ux;
        let my = c0[1] + a * uy;
        Some(([mx - h * uy, my + h * ux], [mx + h * uy, my - h * ux]))
    }

    fn angle_between(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let (ax, ay) = (a[0] - o[0], a[1] - o[1]);
        let (bx, by) = (b[0] - o[0], b[1] - o[1]);
        ((ax * bx + ay * by) / ((ax * ax + ay * ay).sqrt() * (bx * bx + by * by).sqrt())).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn cone_angles_match_circle_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 200 {
            let r: [f64; 2] = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let q = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
            let delta = rng.gen_range(1.0..20.0);
            let lq = rng.gen_range(1.0..80.0);
            let rq = ((q[0] - r[0]).powi(2) + (q[1] - r[1]).powi(2)).sqrt();
            let Some((t1, t2)) = circle_intersections(r, delta, q, lq) else {
                continue;
            };
            // B_p is the arc far from q; its angle is 2π minus the near arc.
            let near = angle_between(r, t1, t2);
            let far_point = [r[0] + delta * (r[0] - q[0]) / rq, r[1] + delta * (r[1] - q[1]) / rq];
            let far_is_in = ((far_point[0] - q[0]).powi(2) + (far_point[1] - q[1]).powi(2)).sqrt() >= lq;
            assert!(far_is_in);
            // `near` is the smaller arc; it is B_p iff it contains the far point.
            let mid = [(t1[0] + t2[0]) / 2.0 - r[0], (t1[1] + t2[1]) / 2.0 - r[1]];
            let towards = (far_point[0] - r[0]) * mid[0] + (far_point[1] - r[1]) * mid[1];
            if towards.abs() < 1e-6 {
                continue;
            }
            let expected = if towards > 0.0 { near } else { 2.0 * PI - near };
            let (ap, _) = cone_angles_from(delta, 1.0, lq, 1.0, rq);
            assert_relative_eq!(ap, expected, epsilon = 1e-6);
            checked += 1;
        }
    }

    #[test]
    fn eps_theta_sanity_and_construction() {
        // Right angle at p: p=(0,0), q=(4,0), r=(0,3).
        let c = eps_theta_from(4.0f64, 3.0, 5.0, 3.0, 4.0, 5.0);
        assert_relative_eq!(c[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(c[1], 0.8, epsilon = 1e-15);
        // θ_p with l_p = 3, |pr| = 4, δ = 5 is a right angle.
        let c = eps_theta_from(5.0f64, 4.0, 3.0, 3.0, 5.0, 5.0);
        assert_relative_eq!(c[2], 0.0, epsilon = 1e-15);
        // Equilateral.
        let c = eps_theta_from(5.0f64, 5.0, 5.0, 5.0, 5.0, 5.0);
        for x in c {
            assert_relative_eq!(x, 0.5, epsilon = 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut done = 0;
        while done < 100 {
            let p = [0.0, 0.0];
            let q = [rng.gen_range(10.0..100.0), 0.0];
            let r: [f64; 2] = [rng.gen_range(-20.0..120.0), rng.gen_range(5.0..60.0)];
            let delta = rng.gen_range(1.0..8.0);
            let lp = rng.gen_range(1.0..120.0);
            let pr = ((r[0]).powi(2) + r[1].powi(2)).sqrt();
            let Some((t, _)) = circle_intersections(r, delta, p, lp) else {
                continue;
            };
            let pq = q[0];
            let qr = ((q[0] - r[0]).powi(2) + r[1].powi(2)).sqrt();
            let c = eps_theta_from(pq, pr, qr, lp, 1.0, delta);
            assert_relative_eq!(c[0], angle_between(p, q, r).cos(), epsilon = 1e-9);
            assert_relative_eq!(c[2], angle_between(p, r, t).cos(), epsilon = 1e-7);
            done += 1;
        }
    }
}
