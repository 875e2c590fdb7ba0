//! Certificates that a vertex `r` is potential with respect to an edge `pq`.
//!
//! Around `r` sits the circle `C_r` of radius `δ_r`; around `p` and `q` sit
//! circles of radii `l_p` and `l_q`. For a vertex `s` let `s_r` be the point
//! of segment `rs` at distance `δ_r` from `r`. The cones are
//! `R_p = {s : |q s_r| >= l_q}` and `R_q = {s : |p s_r| >= l_p}`; any edge
//! `rs` compatible with `pq` has `s` in one of them. A certificate shows
//! that in an optimum tour through `pq` the two tour neighbours of `r` are
//! not both in `R_p` and not both in `R_q`, and bounds
//! `min_{x in R_p} l(rx) - l(px)` and `min_{y in R_q} l(ry) - l(qy)` from
//! below.
//!
//! [`certify_strong`] does this in constant time from the geometry alone;
//! [`certify_quadratic`] enumerates the neighbours of `r` in the current
//! edge set and checks every same-cone pair.
//!
//! Floating-point comparisons that license an elimination are tightened by
//! the margin `τ`, so rounding error can only lose certificates.

use crate::compat::compatible_with_len;
use crate::edges::SparseEdgeSet;
use crate::geometry::{cone_angles_from, eps_theta_from, norm, DeltaRadii};
use crate::scalar::Scalar;
use crate::tsplib::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    POnly,
    QOnly,
    Both,
    Neither,
}

impl Membership {
    #[inline]
    pub fn in_p(self) -> bool {
        matches!(self, Membership::POnly | Membership::Both)
    }

    #[inline]
    pub fn in_q(self) -> bool {
        matches!(self, Membership::QOnly | Membership::Both)
    }

    fn from_flags(p: bool, q: bool) -> Self {
        match (p, q) {
            (true, true) => Membership::Both,
            (true, false) => Membership::POnly,
            (false, true) => Membership::QOnly,
            (false, false) => Membership::Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rejection {
    /// `δ_r <= 0`; only possible for CEIL_2D with a unit nearest distance.
    Degenerate,
    NoCircleIntersection,
    GammaTooSmall,
    TildeFailed,
    AngleSumFailed,
    /// A compatible neighbour of `r` fell in neither cone.
    NeitherCone,
    QuadraticViolation,
}

/// Geometric data for a fixed edge `pq` and vertex `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeCover<S> {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub delta: S,
    pub l_p: S,
    pub l_q: S,
    /// Opening angle of `R_p`, radians.
    pub alpha_p: S,
    pub alpha_q: S,
    /// Lower bound on the tour angle at `r`, radians.
    pub gamma: S,
    /// Upper bound on `max |p x_r|` over `x in R_p`, when derivable.
    pub max_px: Option<S>,
    pub max_qy: Option<S>,
    pub circle_intersection_ok: bool,
    pub tilde_ok: bool,
    pub angle_sum_ok: bool,
    pub strongly_potential: bool,
    pts: [[S; 2]; 3],
}

impl<S: Scalar> ConeCover<S> {
    /// Evaluates every quantity of the cover. Nothing is decided here beyond
    /// the flags; see [`certify_strong`].
    pub fn compute(instance: &Instance, deltas: &DeltaRadii<S>, (p, q): (usize, usize), r: usize, margin: S) -> Self {
        let delta = deltas.get(r);
        let lpq = instance.dist(p, q);
        let l_p = delta + S::of_len(lpq - instance.dist(q, r) - 1);
        let l_q = delta + S::of_len(lpq - instance.dist(p, r) - 1);
        let lpq_ref: S = instance.reference_len(p, q);
        let pts = [instance.point_s(p), instance.point_s(q), instance.point_s(r)];
        let mut cover = ConeCover {
            p,
            q,
            r,
            delta,
            l_p,
            l_q,
            alpha_p: S::zero(),
            alpha_q: S::zero(),
            gamma: S::zero(),
            max_px: None,
            max_qy: None,
            circle_intersection_ok: circle_intersection_ok(l_p, l_q, lpq_ref),
            tilde_ok: false,
            angle_sum_ok: false,
            strongly_potential: false,
            pts,
        };
        if delta <= S::zero() {
            return cover;
        }
        let (pq_e, pr_e, qr_e) = (norm(pts[0], pts[1]), norm(pts[0], pts[2]), norm(pts[1], pts[2]));
        let (ap, aq) = cone_angles_from(delta, l_p, l_q, pr_e, qr_e);
        cover.alpha_p = ap;
        cover.alpha_q = aq;
        if !cover.circle_intersection_ok || l_p <= S::zero() || l_q <= S::zero() {
            return cover;
        }
        cover.gamma = gamma_r(l_p, l_q, lpq_ref, delta);
        cover.strongly_potential = cover.gamma > ap.max(aq) + margin;

        let [ce_p, ce_q, ct_p, ct_q] = eps_theta_from(pq_e, pr_e, qr_e, l_p, l_q, delta);
        let two = S::of(2.0);
        // |p q~| <= l_p and |q p~| <= l_q via the law of cosines in the
        // triangles p q q~ and q p p~.
        let far_q = qr_e + delta;
        let far_p = pr_e + delta;
        let lhs_q = (far_q * far_q + pq_e * pq_e - l_p * l_p) / (two * far_q * pq_e);
        let lhs_p = (far_p * far_p + pq_e * pq_e - l_q * l_q) / (two * far_p * pq_e);
        cover.tilde_ok = lhs_q + margin <= ce_q && lhs_p + margin <= ce_p;
        // ε + θ <= 180° iff cos ε + cos θ >= 0.
        cover.angle_sum_ok = ce_p + ct_p >= margin && ce_q + ct_q >= margin;
        if cover.tilde_ok && cover.angle_sum_ok {
            let cos_sum = |ce: S, ct: S| ce * ct - (S::one() - ce * ce).max(S::zero()).sqrt() * (S::one() - ct * ct).max(S::zero()).sqrt();
            let far = |l: S, c: S| (pq_e * pq_e + l * l - two * pq_e * l * c).max(S::zero()).sqrt();
            cover.max_px = Some(far(l_q, cos_sum(ce_q, ct_q)));
            cover.max_qy = Some(far(l_p, cos_sum(ce_p, ct_p)));
        }
        cover
    }

    /// Cone membership of vertex `s` (with `s != r`). The cones are widened
    /// by the margin, so `Neither` is only reported when `rs` is certainly
    /// incompatible with `pq`.
    pub fn classify(&self, instance: &Instance, s: usize, margin: S) -> Membership {
        if self.delta <= S::zero() {
            return Membership::Both;
        }
        let [pp, qp, rp] = self.pts;
        let sp: [S; 2] = instance.point_s(s);
        let len = norm(sp, rp);
        let t = self.delta / len;
        let sr = [rp[0] + (sp[0] - rp[0]) * t, rp[1] + (sp[1] - rp[1]) * t];
        Membership::from_flags(norm(qp, sr) >= self.l_q - margin, norm(pp, sr) >= self.l_p - margin)
    }
}

/// A vertex together with its cover and lower bounds on the two minima of
/// the elimination inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPoint<S> {
    pub vertex: usize,
    pub cover: ConeCover<S>,
    /// Lower bound on `min_{x in R_p} l(rx) - l(px)`.
    pub bound_p: S,
    /// Lower bound on `min_{y in R_q} l(ry) - l(qy)`.
    pub bound_q: S,
    /// Bounds are exact minima over enumerated neighbours.
    pub exact: bool,
}

/// Cone membership of `s` for the cover of `(pq, r)`.
pub fn in_cone<S: Scalar>(
    instance: &Instance,
    deltas: &DeltaRadii<S>,
    pq: (usize, usize),
    r: usize,
    s: usize,
    margin: S,
) -> Membership {
    ConeCover::compute(instance, deltas, pq, r, margin).classify(instance, s, margin)
}

/// Both cone circles meet `C_r` when `l_p + l_q >= l(pq) - 1/2`.
#[inline]
pub fn circle_intersection_ok<S: Scalar>(l_p: S, l_q: S, l_pq: S) -> bool {
    l_p + l_q >= l_pq - S::half()
}

/// `γ_r = arccos(1 - (l_p + l_q - l(pq) + 1/2)² / (2 δ_r²))`.
#[inline]
pub fn gamma_r<S: Scalar>(l_p: S, l_q: S, l_pq: S, delta: S) -> S {
    let chord = l_p + l_q - l_pq + S::half();
    (S::one() - chord * chord / (S::of(2.0) * delta * delta)).clamp_unit().acos()
}

/// Constant-time certificate: `r` is strongly potential and the closed-form
/// arc maxima apply.
pub fn certify_strong<S: Scalar>(
    instance: &Instance,
    deltas: &DeltaRadii<S>,
    pq: (usize, usize),
    r: usize,
    margin: S,
) -> Result<PotentialPoint<S>, Rejection> {
    let cover = ConeCover::compute(instance, deltas, pq, r, margin);
    if cover.delta <= S::zero() {
        return Err(Rejection::Degenerate);
    }
    if !cover.circle_intersection_ok || cover.l_p <= S::zero() || cover.l_q <= S::zero() {
        return Err(Rejection::NoCircleIntersection);
    }
    if !cover.strongly_potential {
        return Err(Rejection::GammaTooSmall);
    }
    if !cover.tilde_ok {
        return Err(Rejection::TildeFailed);
    }
    if !cover.angle_sum_ok {
        return Err(Rejection::AngleSumFailed);
    }
    let base = cover.delta - S::one();
    let bound_p = base - cover.max_px.expect("set when tilde and angle sum hold");
    let bound_q = base - cover.max_qy.expect("set when tilde and angle sum hold");
    Ok(PotentialPoint {
        vertex: r,
        cover,
        bound_p,
        bound_q,
        exact: false,
    })
}

/// Compatible neighbours of `r` in `edges`: `R = {x : rx in E, pq ~ rx}`.
pub fn compatible_neighbors(instance: &Instance, edges: &SparseEdgeSet, (p, q): (usize, usize), r: usize) -> Vec<usize> {
    let lpq = instance.dist(p, q);
    edges
        .neighbors(r)
        .iter()
        .map(|&x| x as usize)
        .filter(|&x| compatible_with_len(instance, p, q, lpq, r, x))
        .collect()
}

/// Quadratic certificate: split `R` by cone membership and check
/// `l(pq) + l(rx) + l(ry) > l(pr) + l(rq) + l(xy)` for every same-cone pair.
/// Bounds are the exact minima over the enumerated cone members (`+∞` for an
/// empty cone).
pub fn certify_quadratic<S: Scalar>(
    instance: &Instance,
    edges: &SparseEdgeSet,
    deltas: &DeltaRadii<S>,
    (p, q): (usize, usize),
    r: usize,
    margin: S,
) -> Result<PotentialPoint<S>, Rejection> {
    let cover = ConeCover::compute(instance, deltas, (p, q), r, margin);
    let mut in_p = Vec::new();
    let mut in_q = Vec::new();
    for x in compatible_neighbors(instance, edges, (p, q), r) {
        match cover.classify(instance, x, margin) {
            Membership::Neither => return Err(Rejection::NeitherCone),
            m => {
                if m.in_p() {
                    in_p.push(x);
                }
                if m.in_q() {
                    in_q.push(x);
                }
            }
        }
    }
    let lhs_base = instance.dist(p, q);
    let rhs_base = instance.dist(p, r) + instance.dist(r, q);
    for group in [&in_p, &in_q] {
        for (i, &x) in group.iter().enumerate() {
            for &y in &group[i + 1..] {
                if (x == p && y == q) || (x == q && y == p) {
                    continue;
                }
                if lhs_base + instance.dist(r, x) + instance.dist(r, y) <= rhs_base + instance.dist(x, y) {
                    return Err(Rejection::QuadraticViolation);
                }
            }
        }
    }
    let min_over = |group: &[usize], anchor: usize| {
        group
            .iter()
            .map(|&x| instance.dist(r, x) - instance.dist(anchor, x))
            .min()
            .map_or(S::infinity(), S::of_len)
    };
    Ok(PotentialPoint {
        vertex: r,
        bound_p: min_over(&in_p, p),
        bound_q: min_over(&in_q, q),
        cover,
        exact: true,
    })
}
