//! Spatial indices over 3D points: a static kd-tree for k-NN and radius
//! queries, and a uniform hash grid for fixed-radius neighbourhoods.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::geom::Vec3;

/// Static kd-tree over a borrowed point slice.
///
/// The tree is stored implicitly: `order[lo..hi]` is a subtree whose root
/// sits at the middle position.
pub struct KdTree<'a> {
    points: &'a [Vec3],
    order: Vec<usize>,
    axes: Vec<u8>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axes = vec![0u8; points.len()];
        build(points, &mut order, &mut axes, 0);
        KdTree { points, order, axes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points as `(index, squared distance)`, nearest first.
    /// Ties are broken by lower index.
    pub fn nearest(&self, query: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, self.order.len(), query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2)).collect()
    }

    /// All indices within `radius` (inclusive) of `query`, ascending.
    pub fn within_radius(&self, query: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_rec(0, self.order.len(), query, radius * radius, &mut out);
        out.sort_unstable();
        out
    }

    fn knn_rec(&self, lo: usize, hi: usize, q: &Vec3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let p = &self.points[idx];
        let cand = Candidate {
            dist2: (p - q).norm_squared(),
            index: idx,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().unwrap() {
            heap.pop();
            heap.push(cand);
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_rec(near.0, near.1, q, k, heap);
        // `<=` keeps equal-distance candidates with lower indices reachable.
        if heap.len() < k || delta * delta <= heap.peek().unwrap().dist2 {
            self.knn_rec(far.0, far.1, q, k, heap);
        }
    }

    fn radius_rec(&self, lo: usize, hi: usize, q: &Vec3, r2: f64, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let p = &self.points[idx];
        if (p - q).norm_squared() <= r2 {
            out.push(idx);
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - p[axis];
        if delta <= 0.0 || delta * delta <= r2 {
            self.radius_rec(lo, mid, q, r2, out);
        }
        if delta >= 0.0 || delta * delta <= r2 {
            self.radius_rec(mid + 1, hi, q, r2, out);
        }
    }
}

fn build(points: &[Vec3], order: &mut [usize], axes: &mut [u8], offset: usize) {
    let n = order.len();
    if n <= 1 {
        return;
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in order.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    let axis = (hi - lo).imax();
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    axes[offset + mid] = axis as u8;
    let (left, right) = order.split_at_mut(mid);
    build(points, left, axes, offset);
    build(points, &mut right[1..], axes, offset + mid + 1);
}

/// Uniform hash grid with cubic cells of a fixed size.
pub struct UniformGrid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl UniformGrid {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i);
        }
        UniformGrid { cell, cells }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    /// Indices stored in the 27 cells around `q`, ascending. Every point
    /// within one cell size of `q` is included.
    pub fn neighbourhood(&self, q: &Vec3) -> Vec<usize> {
        let [cx, cy, cz] = Self::key(q, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(v) = self.cells.get(&[cx + dx, cy + dy, cz + dz]) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
