//! Quickhull in 3D, producing an outward-oriented triangle mesh.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::TriMesh;
use crate::error::{Error, Result};

struct Face {
    v: [usize; 3],
    normal: Vector3<f64>,
    offset: f64,
    alive: bool,
    outside: Vec<usize>,
}

impl Face {
    fn new(points: &[Point3<f64>], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let normal = (b - a).cross(&(c - a)).normalize();
        Face {
            v,
            normal,
            offset: normal.dot(&a.coords),
            alive: true,
            outside: Vec::new(),
        }
    }

    fn height(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }
}

/// Convex hull of a 3D point set. Coplanar or collinear input fails with
/// [`Error::DegenerateHull`].
pub fn convex_hull_3d(points: &[Point3<f64>]) -> Result<TriMesh> {
    let count = points.len();
    if count < 4 {
        return Err(Error::DegenerateHull { count });
    }
    let (lo, hi) = points
        .iter()
        .fold((points[0], points[0]), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    let scale = (hi - lo).norm();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateHull { count });
    }
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(points, eps).ok_or(Error::DegenerateHull { count })?;
    let mut faces: Vec<Face> = Vec::new();
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();

    let interior = Point3::from(
        simplex
            .iter()
            .fold(Vector3::zeros(), |acc, &i| acc + points[i].coords)
            / 4.0,
    );
    for tri in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
        let mut v = [simplex[tri[0]], simplex[tri[1]], simplex[tri[2]]];
        if Face::new(points, v).height(&interior) > 0.0 {
            v.swap(1, 2);
        }
        add_face(&mut faces, &mut edge_map, Face::new(points, v));
    }

    let initial: Vec<usize> = (0..count).filter(|i| !simplex.contains(i)).collect();
    assign_outside(points, &mut faces, &[0, 1, 2, 3], initial, eps);

    let mut cursor = 0;
    while cursor < faces.len() {
        if !faces[cursor].alive || faces[cursor].outside.is_empty() {
            cursor += 1;
            continue;
        }
        let face = &faces[cursor];
        let apex = *face
            .outside
            .iter()
            .max_by(|&&a, &&b| face.height(&points[a]).total_cmp(&face.height(&points[b])))
            .expect("outside set is non-empty");
        let eye = points[apex];

        // visible region by flood fill over shared edges
        let mut visible = vec![cursor];
        let mut seen = std::collections::HashSet::from([cursor]);
        let mut i = 0;
        while i < visible.len() {
            let f = visible[i];
            for (a, b) in faces[f].edges() {
                if let Some(&nb) = edge_map.get(&(b, a)) {
                    if !seen.contains(&nb) && faces[nb].height(&eye) > eps {
                        seen.insert(nb);
                        visible.push(nb);
                    }
                }
            }
            i += 1;
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            for (a, b) in faces[f].edges() {
                let across = edge_map.get(&(b, a)).copied();
                if across.is_none_or(|nb| !seen.contains(&nb)) {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            for e in faces[f].edges() {
                edge_map.remove(&e);
            }
        }

        let mut created = Vec::with_capacity(horizon.len());
        for (a, b) in horizon {
            created.push(faces.len());
            add_face(&mut faces, &mut edge_map, Face::new(points, [a, b, apex]));
        }
        orphans.retain(|&p| p != apex);
        assign_outside(points, &mut faces, &created, orphans, eps);
    }

    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let mut t = [0usize; 3];
        for (k, &v) in f.v.iter().enumerate() {
            t[k] = *remap.entry(v).or_insert_with(|| {
                vertices.push(points[v]);
                vertices.len() - 1
            });
        }
        tris.push(t);
    }
    TriMesh::new(vertices, tris)
}

fn add_face(faces: &mut Vec<Face>, edge_map: &mut HashMap<(usize, usize), usize>, face: Face) {
    let id = faces.len();
    for e in face.edges() {
        edge_map.insert(e, id);
    }
    faces.push(face);
}

fn assign_outside(points: &[Point3<f64>], faces: &mut [Face], candidates: &[usize], pts: Vec<usize>, eps: f64) {
    for p in pts {
        if let Some(&f) = candidates
            .iter()
            .find(|&&f| faces[f].alive && faces[f].height(&points[p]) > eps)
        {
            faces[f].outside.push(p);
        }
    }
}

fn initial_simplex(points: &[Point3<f64>], eps: f64) -> Option<[usize; 4]> {
    let i0 = (0..points.len()).min_by(|&a, &b| points[a].x.total_cmp(&points[b].x))?;
    let i1 = (0..points.len()).max_by(|&a, &b| {
        (points[a] - points[i0])
            .norm_squared()
            .total_cmp(&(points[b] - points[i0]).norm_squared())
    })?;
    let axis = (points[i1] - points[i0]).normalize();
    let line_dist = |p: &Point3<f64>| {
        let d = p - points[i0];
        (d - axis * d.dot(&axis)).norm()
    };
    let i2 = (0..points.len()).max_by(|&a, &b| line_dist(&points[a]).total_cmp(&line_dist(&points[b])))?;
    if line_dist(&points[i2]) <= eps {
        return None;
    }
    let normal = (points[i1] - points[i0]).cross(&(points[i2] - points[i0])).normalize();
    let plane_dist = |p: &Point3<f64>| normal.dot(&(p - points[i0])).abs();
    let i3 = (0..points.len()).max_by(|&a, &b| plane_dist(&points[a]).total_cmp(&plane_dist(&points[b])))?;
    if plane_dist(&points[i3]) <= eps {
        return None;
    }
    Some([i0, i1, i2, i3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn is_closed_and_convex(mesh: &TriMesh, points: &[Point3<f64>]) {
        let mut edges = HashMap::new();
        for f in mesh.faces() {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *edges.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &edges {
            assert_eq!(n, 1);
            assert_eq!(edges.get(&(b, a)), Some(&1), "edge {a}-{b} has no twin");
        }
        for t in mesh.triangles() {
            let n = t.scaled_normal().normalize();
            for p in points {
                assert!(n.dot(&(p - t.a)) <= 1e-9, "point outside hull face");
            }
        }
    }

    #[test]
    fn cube_corners_and_interior() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(Point3::new(x, y, z));
                }
            }
        }
        pts.push(Point3::new(0.5, 0.5, 0.5));
        let hull = convex_hull_3d(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 8);
        assert!((hull.surface_area() - 6.0).abs() < 1e-12);
        is_closed_and_convex(&hull, &pts);
    }

    #[test]
    fn dense_box_surface_with_coplanar_points() {
        let mesh = TriMesh::cuboid(Point3::new(-0.05, -0.1, 0.0), Point3::new(0.05, 0.1, 0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = mesh.sample_surface(3000, &mut rng).unwrap().into_iter().map(|s| s.point).collect();
        let hull = convex_hull_3d(&pts).unwrap();
        is_closed_and_convex(&hull, &pts);
        assert!(hull.surface_area() <= mesh.surface_area() + 1e-12);
        assert!(hull.surface_area() > 0.95 * mesh.surface_area());
    }

    #[test]
    fn random_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<_> = (0..500)
            .map(|_| Point3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        is_closed_and_convex(&convex_hull_3d(&pts).unwrap(), &pts);
    }

    #[test]
    fn planar_input_is_degenerate() {
        let pts: Vec<_> = (0..10).map(|i| Point3::new(i as f64, (i * i) as f64, 0.0)).collect();
        assert_eq!(convex_hull_3d(&pts).unwrap_err(), Error::DegenerateHull { count: 10 });
    }
}
