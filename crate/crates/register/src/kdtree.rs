//! Exact nearest-neighbor search over 3D point sets.
//!
//! A balanced k-d tree built by median splits on the widest axis of each
//! subset. Queries prune on the splitting plane, so results are exact, not
//! approximate. Clouds in this pipeline stay below ~10^5 points.

use nalgebra::Vector3;

struct Node {
    /// Index into the caller's point slice.
    point: u32,
    dim: u8,
    left: i32,
    right: i32,
}

const NONE: i32 = -1;

pub struct KdTree {
    points: Vec<Vector3<f64>>,
    nodes: Vec<Node>,
    root: i32,
}

impl KdTree {
    pub fn build(points: &[Vector3<f64>]) -> KdTree {
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: NONE,
        };
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        tree.root = tree.build_rec(&mut order);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build_rec(&mut self, order: &mut [u32]) -> i32 {
        if order.is_empty() {
            return NONE;
        }
        // Split on the widest axis of this subset; degenerate spreads still
        // terminate because the median element always leaves the recursion.
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for &i in order.iter() {
            let p = &self.points[i as usize];
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let spread = hi - lo;
        let dim = if spread.x >= spread.y && spread.x >= spread.z {
            0
        } else if spread.y >= spread.z {
            1
        } else {
            2
        };

        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            let ka = self.points[a as usize][dim];
            let kb = self.points[b as usize][dim];
            ka.partial_cmp(&kb).unwrap().then(a.cmp(&b))
        });
        let point = order[mid];

        let node_idx = self.nodes.len() as i32;
        self.nodes.push(Node {
            point,
            dim: dim as u8,
            left: NONE,
            right: NONE,
        });
        let (left_half, rest) = order.split_at_mut(mid);
        let right_half = &mut rest[1..];
        let left = self.build_rec(left_half);
        let right = self.build_rec(right_half);
        let node = &mut self.nodes[node_idx as usize];
        node.left = left;
        node.right = right;
        node_idx
    }

    /// Closest stored point to `query` with distance ≤ `cutoff`, as
    /// (point index, distance). `None` when nothing lies within the cutoff.
    pub fn nearest_within(&self, query: &Vector3<f64>, cutoff: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut limit2 = cutoff * cutoff;
        self.search(self.root, query, &mut limit2, &mut best);
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Closest stored point with no distance bound.
    pub fn nearest(&self, query: &Vector3<f64>) -> Option<(usize, f64)> {
        self.nearest_within(query, f64::INFINITY)
    }

    fn search(
        &self,
        node: i32,
        query: &Vector3<f64>,
        limit2: &mut f64,
        best: &mut Option<(usize, f64)>,
    ) {
        if node == NONE {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = &self.points[n.point as usize];
        let d2 = (query - p).norm_squared();
        if d2 <= *limit2 && best.map_or(true, |(_, bd2)| d2 < bd2) {
            *best = Some((n.point as usize, d2));
            *limit2 = d2;
        }
        let delta = query[n.dim as usize] - p[n.dim as usize];
        let (near, far) = if delta <= 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, query, limit2, best);
        if delta * delta <= *limit2 {
            self.search(far, query, limit2, best);
        }
    }
}
