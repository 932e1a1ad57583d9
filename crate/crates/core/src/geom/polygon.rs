use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientation epsilon for the hull builder; turns within it count as collinear.
pub const COLLINEAR_EPS: f64 = 1e-12;

/// Boundary tolerance for [`point_in_polygon`], meters.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[inline]
pub(crate) fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2D {
    vertices: Vec<Point2<f64>>,
}

impl Polygon2D {
    /// Checks convexity and orientation; use [`convex_hull_2d`] for arbitrary input.
    pub fn new(vertices: Vec<Point2<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateHull { count: n });
        }
        for i in 0..n {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            let c = &vertices[(i + 2) % n];
            if (b - a).norm() <= 1e-9 {
                return Err(Error::geometry(format!("polygon repeats vertex {}", (i + 1) % n)));
            }
            if cross(a, b, c) < 0.0 {
                return Err(Error::geometry("polygon is not convex and counter-clockwise"));
            }
        }
        let poly = Self { vertices };
        if poly.area() <= 0.0 {
            return Err(Error::DegenerateHull { count: n });
        }
        Ok(poly)
    }

    pub fn rectangle(min: Point2<f64>, max: Point2<f64>) -> Result<Self> {
        Self::new(vec![
            min,
            Point2::new(max.x, min.y),
            max,
            Point2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Point2<f64>, &Point2<f64>)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self
            .edges()
            .map(|(a, b)| a.x * b.y - b.x * a.y)
            .sum::<f64>()
    }

    pub fn centroid(&self) -> Point2<f64> {
        let mut acc = Vector2::zeros();
        let mut twice_area = 0.0;
        for (a, b) in self.edges() {
            let w = a.x * b.y - b.x * a.y;
            acc += (a.coords + b.coords) * w;
            twice_area += w;
        }
        Point2::from(acc / (3.0 * twice_area))
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        point_in_polygon(p, self)
    }

    /// Intersection with another convex polygon; `None` when it has no area.
    pub fn intersection(&self, clip: &Polygon2D) -> Option<Polygon2D> {
        let mut output: Vec<Point2<f64>> = self.vertices.clone();
        for (a, b) in clip.edges() {
            if output.is_empty() {
                break;
            }
            let input = std::mem::take(&mut output);
            let inside = |p: &Point2<f64>| cross(a, b, p) >= 0.0;
            for i in 0..input.len() {
                let cur = &input[i];
                let prev = &input[(i + input.len() - 1) % input.len()];
                match (inside(prev), inside(cur)) {
                    (true, true) => output.push(*cur),
                    (true, false) => output.push(segment_line_hit(prev, cur, a, b)),
                    (false, true) => {
                        output.push(segment_line_hit(prev, cur, a, b));
                        output.push(*cur);
                    }
                    (false, false) => {}
                }
            }
        }
        convex_hull_2d(&output).ok()
    }

    /// Keeps the part on the side `p·direction ≤ offset`.
    pub fn clip_half_plane(&self, direction: &Vector2<f64>, offset: f64) -> Option<Polygon2D> {
        let mut output = Vec::with_capacity(self.vertices.len() + 1);
        let n = self.vertices.len();
        let side = |p: &Point2<f64>| p.coords.dot(direction) - offset;
        for i in 0..n {
            let cur = &self.vertices[i];
            let prev = &self.vertices[(i + n - 1) % n];
            let (sp, sc) = (side(prev), side(cur));
            if sp <= 0.0 && sc <= 0.0 {
                output.push(*cur);
            } else if sp <= 0.0 || sc <= 0.0 {
                let t = sp / (sp - sc);
                output.push(prev + (cur - prev) * t);
                if sc <= 0.0 {
                    output.push(*cur);
                }
            }
        }
        convex_hull_2d(&output).ok()
    }
}

fn segment_line_hit(p: &Point2<f64>, q: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> Point2<f64> {
    let dp = cross(a, b, p);
    let dq = cross(a, b, q);
    let t = dp / (dp - dq);
    p + (q - p) * t
}

/// Andrew's monotone chain; collinear boundary points are dropped.
pub fn convex_hull_2d(points: &[Point2<f64>]) -> Result<Polygon2D> {
    let count = points.len();
    if count < 3 {
        return Err(Error::DegenerateHull { count });
    }
    let mut sorted: Vec<Point2<f64>> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    sorted.dedup_by(|a, b| (*a - *b).norm() <= 1e-9);

    let mut hull: Vec<Point2<f64>> = Vec::with_capacity(sorted.len() * 2);
    for p in sorted.iter() {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= COLLINEAR_EPS {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in sorted.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= COLLINEAR_EPS
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(Error::DegenerateHull { count });
    }
    Polygon2D::new(hull).map_err(|_| Error::DegenerateHull { count })
}

/// Inclusive containment test: points on the boundary (within
/// [`BOUNDARY_TOLERANCE`]) count as inside.
pub fn point_in_polygon(p: &Point2<f64>, poly: &Polygon2D) -> bool {
    poly.edges().all(|(a, b)| {
        let edge = b - a;
        let len = edge.norm();
        cross(a, b, p) >= -BOUNDARY_TOLERANCE * len
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon2D {
        Polygon2D::rectangle(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn square_hull_is_itself() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert!(hull.area() > 0.0);
        for p in &pts {
            assert!(hull.vertices().contains(p));
        }
    }

    #[test]
    fn interior_point_excluded() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.5),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert!(!hull.vertices().contains(&Point2::new(0.5, 0.5)));
    }

    #[test]
    fn collinear_and_tiny_inputs_fail() {
        let line: Vec<_> = (0..5).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(convex_hull_2d(&line), Err(Error::DegenerateHull { count: 5 }));
        assert_eq!(
            convex_hull_2d(&line[..2]),
            Err(Error::DegenerateHull { count: 2 })
        );
    }

    #[test]
    fn collinear_boundary_points_dropped() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull_2d(&pts).unwrap().vertices().len(), 4);
    }

    #[test]
    fn containment_cases() {
        let sq = unit_square();
        assert!(point_in_polygon(&Point2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(&Point2::new(2.0, 0.0), &sq));
        assert!(point_in_polygon(&Point2::new(1.0, 0.5), &sq));
        assert!(point_in_polygon(&Point2::new(1.0 + 5e-10, 0.5), &sq));
        assert!(!point_in_polygon(&Point2::new(1.0 + 1e-6, 0.5), &sq));
    }

    #[test]
    fn rejects_clockwise() {
        let cw = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        assert!(Polygon2D::new(cw).is_err());
    }

    #[test]
    fn clipping() {
        let sq = unit_square();
        let half = sq.clip_half_plane(&Vector2::new(1.0, 0.0), 0.25).unwrap();
        assert!((half.area() - 0.25).abs() < 1e-12);
        assert!(sq.clip_half_plane(&Vector2::new(1.0, 0.0), -0.1).is_none());
        let other = Polygon2D::rectangle(Point2::new(0.5, 0.5), Point2::new(2.0, 2.0)).unwrap();
        let inter = sq.intersection(&other).unwrap();
        assert!((inter.area() - 0.25).abs() < 1e-12);
        assert!((inter.centroid() - Point2::new(0.75, 0.75)).norm() < 1e-12);
        let far = Polygon2D::rectangle(Point2::new(5.0, 5.0), Point2::new(6.0, 6.0)).unwrap();
        assert!(sq.intersection(&far).is_none());
    }
}
