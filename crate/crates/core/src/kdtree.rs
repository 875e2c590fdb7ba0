//! Balanced 2-d tree over the instance points.
//!
//! The tree is stored implicitly: `perm[lo..hi]` is a subtree whose root sits
//! at the middle position and splits on `depth % 2`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF: usize = 8;

#[derive(Debug, Clone)]
pub struct NeighborIndex {
    pts: Vec<[f64; 2]>,
    perm: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cand {
    d2: f64,
    id: u32,
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

/// Reusable scratch space for k-nearest queries.
#[derive(Debug, Default)]
pub struct KnnScratch {
    heap: BinaryHeap<Cand>,
}

impl NeighborIndex {
    pub fn new(points: &[[f64; 2]]) -> Self {
        let mut perm: Vec<u32> = (0..points.len() as u32).collect();
        build(points, &mut perm, 0);
        NeighborIndex {
            pts: points.to_vec(),
            perm,
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// The `k` points closest to `target` for which `skip` is false, sorted
    /// by distance and then by index.
    pub fn nearest(
        &self,
        target: [f64; 2],
        k: usize,
        skip: impl Fn(usize) -> bool,
        scratch: &mut KnnScratch,
        out: &mut Vec<usize>,
    ) {
        out.clear();
        if k == 0 {
            return;
        }
        scratch.heap.clear();
        self.search(0, self.perm.len(), 0, target, k, &skip, &mut scratch.heap);
        let mut found: Vec<Cand> = scratch.heap.drain().collect();
        found.sort_unstable();
        out.extend(found.into_iter().map(|c| c.id as usize));
    }

    pub fn nearest_vec(&self, target: [f64; 2], k: usize, skip: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        self.nearest(target, k, skip, &mut KnnScratch::default(), &mut out);
        out
    }

    /// Nearest other point to vertex `v`.
    pub fn nearest_other(&self, v: usize) -> Option<usize> {
        self.nearest_vec(self.pts[v], 1, |u| u == v).first().copied()
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        lo: usize,
        hi: usize,
        depth: usize,
        t: [f64; 2],
        k: usize,
        skip: &impl Fn(usize) -> bool,
        heap: &mut BinaryHeap<Cand>,
    ) {
        if hi - lo <= LEAF {
            for &id in &self.perm[lo..hi] {
                self.offer(id, t, k, skip, heap);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let id = self.perm[mid];
        let axis = depth & 1;
        let diff = t[axis] - self.pts[id as usize][axis];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, depth + 1, t, k, skip, heap);
        self.offer(id, t, k, skip, heap);
        // Equal-distance ties on the far side must still be visited for the
        // index tie-break to be exact.
        if heap.len() < k || diff * diff <= heap.peek().map_or(f64::INFINITY, |c| c.d2) {
            self.search(far.0, far.1, depth + 1, t, k, skip, heap);
        }
    }

    #[inline]
    fn offer(&self, id: u32, t: [f64; 2], k: usize, skip: &impl Fn(usize) -> bool, heap: &mut BinaryHeap<Cand>) {
        if skip(id as usize) {
            return;
        }
        let p = self.pts[id as usize];
        let (dx, dy) = (p[0] - t[0], p[1] - t[1]);
        let c = Cand {
            d2: dx * dx + dy * dy,
            id,
        };
        if heap.len() < k {
            heap.push(c);
        } else if c < *heap.peek().expect("heap is full") {
            heap.pop();
            heap.push(c);
        }
    }
}

fn build(points: &[[f64; 2]], perm: &mut [u32], depth: usize) {
    if perm.len() <= LEAF {
        return;
    }
    let axis = depth & 1;
    let mid = perm.len() / 2;
    perm.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (left, rest) = perm.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut rest[1..], depth + 1);
}
