use std::fmt;

use nalgebra::{Point3, Vector3};
use rand::Rng;

use super::bvh::{Aabb, Bvh};
use super::distance::{triangle_distance, Triangle};
use super::RigidPose;
use crate::error::{Error, Result};

/// Faces with less area than this are dropped at construction, m².
const DEGENERATE_AREA: f64 = 1e-18;

/// Indexed triangle mesh. Immutable once built; carries its own BVH.
#[derive(Clone)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    triangles: Vec<Triangle>,
    bvh: Bvh,
}

impl fmt::Debug for TriMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TriMesh")
            .field("vertices", &self.vertices.len())
            .field("faces", &self.faces.len())
            .finish()
    }
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.faces == other.faces
    }
}

impl Default for TriMesh {
    fn default() -> Self {
        Self::empty()
    }
}

/// A surface sample with the face normal it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Point3<f64>,
    pub normal: Vector3<f64>,
    pub face: usize,
}

impl TriMesh {
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            faces: Vec::new(),
            triangles: Vec::new(),
            bvh: Bvh::default(),
        }
    }

    /// Validates indices and drops zero-area faces.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::geometry(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        if let Some((fi, _)) = faces
            .iter()
            .enumerate()
            .find(|(_, f)| f.iter().any(|&i| i >= n))
        {
            return Err(Error::geometry(format!("face {fi} indexes past {n} vertices")));
        }
        let mut kept = Vec::with_capacity(faces.len());
        let mut triangles = Vec::with_capacity(faces.len());
        for f in faces {
            let t = Triangle::new(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
            if t.area() > DEGENERATE_AREA {
                kept.push(f);
                triangles.push(t);
            }
        }
        let bvh = Bvh::build(&triangles);
        Ok(Self {
            vertices,
            faces: kept,
            triangles,
            bvh,
        })
    }

    /// Closed box with outward-facing triangles.
    pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> Self {
        let v = |x: bool, y: bool, z: bool| {
            Point3::new(
                if x { max.x } else { min.x },
                if y { max.y } else { min.y },
                if z { max.z } else { min.z },
            )
        };
        let vertices = vec![
            v(false, false, false),
            v(true, false, false),
            v(true, true, false),
            v(false, true, false),
            v(false, false, true),
            v(true, false, true),
            v(true, true, true),
            v(false, true, true),
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Self::new(vertices, faces).expect("cuboid indices are valid")
    }

    pub fn centered_cuboid(half_extents: Vector3<f64>) -> Self {
        Self::cuboid(Point3::from(-half_extents), Point3::from(half_extents))
    }

    /// Closed cylinder along +z from `z0` to `z1`.
    pub fn cylinder(radius: f64, z0: f64, z1: f64, segments: usize) -> Self {
        let segments = segments.max(3);
        let mut vertices = Vec::with_capacity(2 * segments + 2);
        for z in [z0, z1] {
            for i in 0..segments {
                let a = std::f64::consts::TAU * i as f64 / segments as f64;
                vertices.push(Point3::new(radius * a.cos(), radius * a.sin(), z));
            }
        }
        let bottom_center = vertices.len();
        vertices.push(Point3::new(0.0, 0.0, z0));
        let top_center = vertices.len();
        vertices.push(Point3::new(0.0, 0.0, z1));
        let mut faces = Vec::with_capacity(4 * segments);
        for i in 0..segments {
            let j = (i + 1) % segments;
            let (b0, b1, t0, t1) = (i, j, i + segments, j + segments);
            faces.push([b0, b1, t1]);
            faces.push([b0, t1, t0]);
            faces.push([bottom_center, b1, b0]);
            faces.push([top_center, t0, t1]);
        }
        Self::new(vertices, faces).expect("cylinder indices are valid")
    }

    /// Upward-facing rectangle at height `z`.
    pub fn rectangle(min_xy: [f64; 2], max_xy: [f64; 2], z: f64) -> Self {
        let vertices = vec![
            Point3::new(min_xy[0], min_xy[1], z),
            Point3::new(max_xy[0], min_xy[1], z),
            Point3::new(max_xy[0], max_xy[1], z),
            Point3::new(min_xy[0], max_xy[1], z),
        ];
        Self::new(vertices, vec![[0, 1, 2], [0, 2, 3]]).expect("rectangle indices are valid")
    }

    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriMesh>) -> Self {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for m in meshes {
            let base = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        }
        Self::new(vertices, faces).expect("merged indices are valid")
    }

    pub fn transformed(&self, pose: &RigidPose) -> Self {
        let vertices = self.vertices.iter().map(|v| pose.transform_point(v)).collect();
        Self::new(vertices, self.faces.clone()).expect("transform preserves indices")
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles.iter().map(Triangle::area).sum()
    }

    pub fn face_normal(&self, face: usize) -> Vector3<f64> {
        self.triangles[face].scaled_normal().normalize()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.bvh.bounds()
    }

    pub(crate) fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    /// Area-uniform samples over the faces accepted by `keep`.
    pub fn sample_surface_filtered<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        keep: impl Fn(usize) -> bool,
    ) -> Result<Vec<SurfaceSample>> {
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut faces = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for (i, t) in self.triangles.iter().enumerate() {
            if keep(i) {
                total += t.area();
                cumulative.push(total);
                faces.push(i);
            }
        }
        if faces.is_empty() || total <= 0.0 {
            return Err(Error::EmptyGeometry("mesh has no sampleable faces"));
        }
        Ok((0..n)
            .map(|_| {
                let target = rng.random::<f64>() * total;
                let slot = cumulative.partition_point(|&c| c <= target).min(faces.len() - 1);
                let face = faces[slot];
                let t = &self.triangles[face];
                let r1: f64 = rng.random::<f64>().sqrt();
                let r2: f64 = rng.random();
                let point = Point3::from(
                    t.a.coords * (1.0 - r1) + t.b.coords * (r1 * (1.0 - r2)) + t.c.coords * (r1 * r2),
                );
                SurfaceSample {
                    point,
                    normal: self.face_normal(face),
                    face,
                }
            })
            .collect())
    }

    pub fn sample_surface<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<SurfaceSample>> {
        self.sample_surface_filtered(n, rng, |_| true)
    }

    /// Whether the solid box comes within `margin` of this mesh: a face
    /// within `margin` of the box surface, or a mesh vertex inside the box.
    /// A box buried entirely inside a thick closed mesh is not detected.
    pub fn box_within(&self, solid: &super::OrientedBox, margin: f64) -> bool {
        self.bvh.any_within(&self.triangles, &solid.triangles(), margin, Some(solid))
    }

    /// Whether segment `p→q` crosses a face other than `skip`.
    pub fn segment_hits(&self, p: &Point3<f64>, q: &Point3<f64>, skip: Option<usize>) -> bool {
        self.bvh.segment_hits(&self.triangles, p, q, skip)
    }
}

/// Minimum distance between two meshes via the BVH; 0 when they touch.
pub fn mesh_min_distance(a: &TriMesh, b: &TriMesh) -> Result<f64> {
    ensure_non_empty(a, b)?;
    Ok(a.bvh().min_distance(&a.triangles, b.bvh(), &b.triangles, 0.0))
}

/// All-pairs reference for [`mesh_min_distance`].
pub fn mesh_min_distance_brute(a: &TriMesh, b: &TriMesh) -> Result<f64> {
    ensure_non_empty(a, b)?;
    let mut best = f64::INFINITY;
    for ta in &a.triangles {
        for tb in &b.triangles {
            best = best.min(triangle_distance(ta, tb));
        }
    }
    Ok(best)
}

/// `mesh_min_distance(a, b) ≤ margin`, with early exit.
pub fn meshes_collide(a: &TriMesh, b: &TriMesh, margin: f64) -> Result<bool> {
    if !(margin >= 0.0) {
        return Err(Error::param(format!("collision margin must be >= 0, got {margin}")));
    }
    ensure_non_empty(a, b)?;
    if let (Some(ba), Some(bb)) = (a.bounds(), b.bounds()) {
        if ba.distance(&bb) > margin {
            return Ok(false);
        }
    }
    Ok(a.bvh().min_distance(&a.triangles, b.bvh(), &b.triangles, margin) <= margin)
}

fn ensure_non_empty(a: &TriMesh, b: &TriMesh) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyGeometry("mesh distance needs two non-empty meshes"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube_at(x: f64) -> TriMesh {
        TriMesh::cuboid(Point3::new(x, 0.0, 0.0), Point3::new(x + 1.0, 1.0, 1.0))
    }

    #[test]
    fn gap_between_cubes() {
        let (a, b) = (unit_cube_at(0.0), unit_cube_at(1.5));
        assert!((mesh_min_distance(&a, &b).unwrap() - 0.5).abs() < 1e-9);
        assert!((mesh_min_distance_brute(&a, &b).unwrap() - 0.5).abs() < 1e-9);
        assert!(!meshes_collide(&a, &b, 0.1).unwrap());
        assert!(meshes_collide(&a, &b, 0.6).unwrap());
    }

    #[test]
    fn overlapping_and_tangent_cubes() {
        assert_eq!(mesh_min_distance(&unit_cube_at(0.0), &unit_cube_at(0.5)).unwrap(), 0.0);
        let tangent = mesh_min_distance(&unit_cube_at(0.0), &unit_cube_at(1.0)).unwrap();
        assert_eq!(tangent, 0.0);
        assert!(meshes_collide(&unit_cube_at(0.0), &unit_cube_at(1.0), 0.0).unwrap());
    }

    #[test]
    fn empty_mesh_is_an_error() {
        let err = mesh_min_distance(&TriMesh::empty(), &unit_cube_at(0.0)).unwrap_err();
        assert!(matches!(err, Error::EmptyGeometry(_)));
        assert!(meshes_collide(&unit_cube_at(0.0), &unit_cube_at(0.0), -1.0).is_err());
    }

    #[test]
    fn construction_cleanup() {
        let verts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        let mesh = TriMesh::new(verts.clone(), vec![[0, 1, 2]]).unwrap();
        assert!(mesh.is_empty());
        assert!(TriMesh::new(verts, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn primitive_areas() {
        assert!((unit_cube_at(0.0).surface_area() - 6.0).abs() < 1e-12);
        let cyl = TriMesh::cylinder(1.0, 0.0, 1.0, 256);
        let exact = 2.0 * std::f64::consts::PI * 2.0;
        assert!((cyl.surface_area() - exact).abs() / exact < 1e-3);
        for f in 0..cyl.faces().len() {
            let t = &cyl.triangles()[f];
            let centroid = (t.a.coords + t.b.coords + t.c.coords) / 3.0;
            let outward = Vector3::new(centroid.x, centroid.y, centroid.z - 0.5);
            assert!(cyl.face_normal(f).dot(&outward) > 0.0);
        }
    }
}
