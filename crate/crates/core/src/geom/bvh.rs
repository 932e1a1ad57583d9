//! Bounding-volume hierarchy over mesh triangles.

use nalgebra::{Point3, Vector3};

use super::distance::{triangle_distance, Triangle};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::from(Vector3::repeat(f64::INFINITY)),
            max: Point3::from(Vector3::repeat(f64::NEG_INFINITY)),
        }
    }

    pub fn of_triangle(t: &Triangle) -> Self {
        let mut b = Self::empty();
        for v in t.vertices() {
            b.grow(&v);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    /// Euclidean gap between boxes, 0 if they overlap.
    pub fn distance(&self, other: &Aabb) -> f64 {
        let mut sq = 0.0;
        for i in 0..3 {
            let gap = (other.min[i] - self.max[i]).max(self.min[i] - other.max[i]);
            if gap > 0.0 {
                sq += gap * gap;
            }
        }
        sq.sqrt()
    }

    /// Slab test for the segment `p→q`.
    pub fn hits_segment(&self, p: &Point3<f64>, q: &Point3<f64>) -> bool {
        let d = q - p;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for i in 0..3 {
            if d[i].abs() < 1e-300 {
                if p[i] < self.min[i] || p[i] > self.max[i] {
                    return false;
                }
            } else {
                let inv = 1.0 / d[i];
                let mut a = (self.min[i] - p[i]) * inv;
                let mut b = (self.max[i] - p[i]) * inv;
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                t0 = t0.max(a);
                t1 = t1.min(b);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, len: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Median-split BVH; leaves index into `order`, which permutes triangle ids.
#[derive(Debug, Clone, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(triangles: &[Triangle]) -> Self {
        if triangles.is_empty() {
            return Self::default();
        }
        let boxes: Vec<Aabb> = triangles.iter().map(Aabb::of_triangle).collect();
        let centers: Vec<Point3<f64>> = boxes.iter().map(Aabb::center).collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1),
            order: (0..triangles.len()).collect(),
        };
        bvh.build_node(&boxes, &centers, 0, triangles.len());
        bvh
    }

    fn build_node(&mut self, boxes: &[Aabb], centers: &[Point3<f64>], start: usize, end: usize) -> usize {
        let bounds = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &i| acc.merge(&boxes[i]));
        let id = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf {
                start,
                len: end - start,
            },
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let mut cb = Aabb::empty();
        for &i in &self.order[start..end] {
            cb.grow(&centers[i]);
        }
        let extent = cb.max - cb.min;
        let axis = extent.imax();
        if extent[axis] <= 0.0 {
            return id;
        }
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centers[a][axis].total_cmp(&centers[b][axis])
        });
        let left = self.build_node(boxes, centers, start, mid);
        let right = self.build_node(boxes, centers, mid, end);
        self.nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bounds)
    }

    fn leaf_items(&self, node: usize) -> Option<&[usize]> {
        match self.nodes[node].kind {
            NodeKind::Leaf { start, len } => Some(&self.order[start..start + len]),
            NodeKind::Inner { .. } => None,
        }
    }

    /// Branch-and-bound minimum triangle–triangle distance.
    /// Stops early once a pair at or below `stop_below` is found.
    pub fn min_distance(
        &self,
        tris_a: &[Triangle],
        other: &Bvh,
        tris_b: &[Triangle],
        stop_below: f64,
    ) -> f64 {
        if self.is_empty() || other.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((na, nb)) = stack.pop() {
            let gap = self.nodes[na].bounds.distance(&other.nodes[nb].bounds);
            if gap >= best {
                continue;
            }
            match (self.leaf_items(na), other.leaf_items(nb)) {
                (Some(ia), Some(ib)) => {
                    for &i in ia {
                        for &j in ib {
                            let d = triangle_distance(&tris_a[i], &tris_b[j]);
                            if d < best {
                                best = d;
                                if best <= stop_below {
                                    return best;
                                }
                            }
                        }
                    }
                }
                (leaf_a, leaf_b) => {
                    let split_a = match (leaf_a, leaf_b) {
                        (None, Some(_)) => true,
                        (Some(_), None) => false,
                        _ => half_area(&self.nodes[na].bounds) >= half_area(&other.nodes[nb].bounds),
                    };
                    let children = if split_a {
                        let (l, r) = self.children(na);
                        [(l, nb), (r, nb)]
                    } else {
                        let (l, r) = other.children(nb);
                        [(na, l), (na, r)]
                    };
                    // nearer child last so it is popped first
                    let d0 = self.nodes[children[0].0].bounds.distance(&other.nodes[children[0].1].bounds);
                    let d1 = self.nodes[children[1].0].bounds.distance(&other.nodes[children[1].1].bounds);
                    if d0 <= d1 {
                        stack.push(children[1]);
                        stack.push(children[0]);
                    } else {
                        stack.push(children[0]);
                        stack.push(children[1]);
                    }
                }
            }
        }
        best
    }

    /// Whether any of `query` lies within `margin` of a triangle in this tree.
    /// With `solid`, a tree vertex strictly inside that box also counts.
    pub fn any_within(
        &self,
        tris: &[Triangle],
        query: &[Triangle],
        margin: f64,
        solid: Option<&super::OrientedBox>,
    ) -> bool {
        if self.is_empty() || query.is_empty() {
            return false;
        }
        let boxes: Vec<Aabb> = query.iter().map(Aabb::of_triangle).collect();
        let all = boxes.iter().fold(Aabb::empty(), |acc, b| acc.merge(b));
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if self.nodes[n].bounds.distance(&all) > margin {
                continue;
            }
            match self.nodes[n].kind {
                NodeKind::Leaf { start, len } => {
                    for &i in &self.order[start..start + len] {
                        let tb = Aabb::of_triangle(&tris[i]);
                        if tb.distance(&all) > margin {
                            continue;
                        }
                        if let Some(s) = solid {
                            if tris[i].vertices().iter().any(|v| s.contains(v, 0.0)) {
                                return true;
                            }
                        }
                        for (q, qb) in query.iter().zip(&boxes) {
                            if tb.distance(qb) <= margin && triangle_distance(&tris[i], q) <= margin {
                                return true;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }

    fn children(&self, node: usize) -> (usize, usize) {
        match self.nodes[node].kind {
            NodeKind::Inner { left, right } => (left, right),
            NodeKind::Leaf { .. } => unreachable!("leaf has no children"),
        }
    }

    /// Whether segment `p→q` crosses any triangle other than `skip`.
    pub fn segment_hits(&self, tris: &[Triangle], p: &Point3<f64>, q: &Point3<f64>, skip: Option<usize>) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if !self.nodes[n].bounds.hits_segment(p, q) {
                continue;
            }
            match self.nodes[n].kind {
                NodeKind::Leaf { start, len } => {
                    for &i in &self.order[start..start + len] {
                        if Some(i) != skip && tris[i].segment_intersection(p, q).is_some() {
                            return true;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }
}

fn half_area(b: &Aabb) -> f64 {
    let e = b.max - b.min;
    e.x.max(0.0) * e.y.max(0.0) + e.y.max(0.0) * e.z.max(0.0) + e.z.max(0.0) * e.x.max(0.0)
}
