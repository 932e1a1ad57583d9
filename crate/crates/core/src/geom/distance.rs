//! Exact distance primitives between points, segments and triangles.

use nalgebra::{Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub c: Point3<f64>,
}

impl Triangle {
    pub fn new(a: Point3<f64>, b: Point3<f64>, c: Point3<f64>) -> Self {
        Self { a, b, c }
    }

    pub fn vertices(&self) -> [Point3<f64>; 3] {
        [self.a, self.b, self.c]
    }

    pub fn edges(&self) -> [(Point3<f64>, Point3<f64>); 3] {
        [(self.a, self.b), (self.b, self.c), (self.c, self.a)]
    }

    /// Unnormalized normal, length = 2·area.
    pub fn scaled_normal(&self) -> Vector3<f64> {
        (self.b - self.a).cross(&(self.c - self.a))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.scaled_normal().norm()
    }

    /// Closest point on the triangle to `p` (Voronoi-region walk).
    pub fn closest_point(&self, p: &Point3<f64>) -> Point3<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let ab = b - a;
        let ac = c - a;
        let ap = p - a;
        let d1 = ab.dot(&ap);
        let d2 = ac.dot(&ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return a;
        }
        let bp = p - b;
        let d3 = ab.dot(&bp);
        let d4 = ac.dot(&bp);
        if d3 >= 0.0 && d4 <= d3 {
            return b;
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let v = d1 / (d1 - d3);
            return a + ab * v;
        }
        let cp = p - c;
        let d5 = ab.dot(&cp);
        let d6 = ac.dot(&cp);
        if d6 >= 0.0 && d5 <= d6 {
            return c;
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let w = d2 / (d2 - d6);
            return a + ac * w;
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return b + (c - b) * w;
        }
        let denom = 1.0 / (va + vb + vc);
        let v = vb * denom;
        let w = vc * denom;
        a + ab * v + ac * w
    }

    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        (self.closest_point(p) - p).norm()
    }

    /// Parameter `t ∈ [0,1]` where segment `p→q` crosses the triangle, if any.
    /// Segments lying in the triangle's plane report no crossing.
    pub fn segment_intersection(&self, p: &Point3<f64>, q: &Point3<f64>) -> Option<f64> {
        let dir = q - p;
        let e1 = self.b - self.a;
        let e2 = self.c - self.a;
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        let scale = e1.norm() * e2.norm() * dir.norm();
        if det.abs() <= 1e-14 * scale {
            return None;
        }
        let inv = 1.0 / det;
        let s = p - self.a;
        let u = inv * s.dot(&h);
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let qv = s.cross(&e1);
        let v = inv * dir.dot(&qv);
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = inv * e2.dot(&qv);
        (0.0..=1.0).contains(&t).then_some(t)
    }
}

/// Closest points between segments `p1→q1` and `p2→q2`.
pub fn segment_segment_closest(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> (Point3<f64>, Point3<f64>) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    const EPS: f64 = 1e-30;

    let (s, t);
    if a <= EPS && e <= EPS {
        return (*p1, *p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 1e-14 * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

pub fn segment_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    let (a, b) = segment_segment_closest(p1, q1, p2, q2);
    (a - b).norm()
}

/// Exact triangle–triangle distance; 0 when the triangles touch or cross.
pub fn triangle_distance(t1: &Triangle, t2: &Triangle) -> f64 {
    for (p, q) in t1.edges() {
        if t2.segment_intersection(&p, &q).is_some() {
            return 0.0;
        }
    }
    for (p, q) in t2.edges() {
        if t1.segment_intersection(&p, &q).is_some() {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for v in t1.vertices() {
        best = best.min(t2.distance_to_point(&v));
    }
    for v in t2.vertices() {
        best = best.min(t1.distance_to_point(&v));
    }
    for (p1, q1) in t1.edges() {
        for (p2, q2) in t2.edges() {
            best = best.min(segment_segment_distance(&p1, &q1, &p2, &q2));
        }
    }
    best
}
