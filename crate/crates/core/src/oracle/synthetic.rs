use nalgebra::{Point2, Point3, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, PointCloud, Polygon2D, TriMesh};

/// Synthetic rigid object with a known center of mass. Built resting on
/// z = 0 with its footprint centered on the origin.
#[derive(Debug, Clone)]
pub struct SyntheticObject {
    pub mesh: TriMesh,
    pub center_of_mass: Point3<f64>,
    pub footprint_half_extents: Vector2<f64>,
    pub label: String,
}

impl SyntheticObject {
    pub fn new(mesh: TriMesh, center_of_mass: Point3<f64>, label: impl Into<String>) -> Result<Self> {
        let bounds = mesh.bounds().ok_or(Error::EmptyGeometry("synthetic object mesh"))?;
        if (0..3).any(|i| center_of_mass[i] < bounds.min[i] || center_of_mass[i] > bounds.max[i]) {
            return Err(Error::geometry("center of mass lies outside the mesh bounds"));
        }
        let footprint = bottom_polygon(&mesh)?;
        let (lo, hi) = footprint.vertices().iter().fold(
            (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(&v.coords), hi.sup(&v.coords)),
        );
        Ok(Self {
            mesh,
            center_of_mass,
            footprint_half_extents: (hi - lo) / 2.0,
            label: label.into(),
        })
    }

    /// Uniform-density box, `dims` = full extents.
    pub fn uniform_box(dims: Vector3<f64>) -> Self {
        Self::offset_mass_box(dims, 0.0)
    }

    /// Box whose center of mass is shifted along +x by `offset_fraction`
    /// of the footprint length (e.g. 0.25 tips at 25 % overhang on +x).
    pub fn offset_mass_box(dims: Vector3<f64>, offset_fraction: f64) -> Self {
        let half = Vector3::new(dims.x / 2.0, dims.y / 2.0, 0.0);
        let mesh = TriMesh::cuboid(Point3::from(-half), Point3::new(half.x, half.y, dims.z));
        let com = Point3::new(offset_fraction * dims.x, 0.0, dims.z / 2.0);
        let label = if offset_fraction == 0.0 {
            format!("box {:.3}x{:.3}x{:.3}", dims.x, dims.y, dims.z)
        } else {
            format!("offset-mass box {:.3}x{:.3}x{:.3} (+{offset_fraction} x)", dims.x, dims.y, dims.z)
        };
        Self::new(mesh, com, label).expect("box center of mass is inside")
    }

    pub fn cylinder(radius: f64, height: f64, segments: usize) -> Self {
        let mesh = TriMesh::cylinder(radius, 0.0, height, segments);
        Self::new(mesh, Point3::new(0.0, 0.0, height / 2.0), format!("cylinder r{radius:.3} h{height:.3}"))
            .expect("cylinder center of mass is inside")
    }

    /// A base slab with an upright block over its +x end, uniform density.
    pub fn l_shape(base: Vector3<f64>, upright_width: f64, upright_height: f64) -> Self {
        let (hx, hy) = (base.x / 2.0, base.y / 2.0);
        let slab = TriMesh::cuboid(Point3::new(-hx, -hy, 0.0), Point3::new(hx, hy, base.z));
        let post = TriMesh::cuboid(
            Point3::new(hx - upright_width, -hy, base.z),
            Point3::new(hx, hy, base.z + upright_height),
        );
        let v_slab = base.x * base.y * base.z;
        let v_post = upright_width * base.y * upright_height;
        let c_slab = Vector3::new(0.0, 0.0, base.z / 2.0);
        let c_post = Vector3::new(hx - upright_width / 2.0, 0.0, base.z + upright_height / 2.0);
        let com = Point3::from((c_slab * v_slab + c_post * v_post) / (v_slab + v_post));
        Self::new(TriMesh::merge([&slab, &post]), com, "L-shape").expect("L-shape center of mass is inside")
    }

    /// Exact support footprint (bottom vertices).
    pub fn footprint(&self) -> Polygon2D {
        bottom_polygon(&self.mesh).expect("validated at construction")
    }

    pub fn com_height(&self) -> f64 {
        self.center_of_mass.z
    }

    /// Dense full-coverage cloud: area-uniform surface samples with normals.
    pub fn dense_cloud(&self, n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = self.mesh.sample_surface(n, &mut rng).expect("mesh has area");
        PointCloud::with_normals(
            samples.iter().map(|s| s.point).collect(),
            samples.iter().map(|s| s.normal).collect(),
        )
        .expect("face normals are unit")
    }
}

fn bottom_polygon(mesh: &TriMesh) -> Result<Polygon2D> {
    let z_min = mesh
        .vertices()
        .iter()
        .map(|v| v.z)
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyGeometry("mesh has no vertices"))?;
    let bottom: Vec<Point2<f64>> = mesh
        .vertices()
        .iter()
        .filter(|v| v.z - z_min <= 1e-9)
        .map(|v| v.xy())
        .collect();
    convex_hull_2d(&bottom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_hold_their_center_of_mass() {
        let b = SyntheticObject::uniform_box(Vector3::new(0.1, 0.2, 0.3));
        assert_eq!(b.center_of_mass, Point3::new(0.0, 0.0, 0.15));
        assert_eq!(b.footprint_half_extents, Vector2::new(0.05, 0.1));
        let o = SyntheticObject::offset_mass_box(Vector3::new(0.2, 0.1, 0.1), 0.25);
        assert!((o.center_of_mass.x - 0.05).abs() < 1e-15);
        let c = SyntheticObject::cylinder(0.04, 0.12, 48);
        assert!((c.footprint_half_extents.x - 0.04).abs() < 1e-12);
        let l = SyntheticObject::l_shape(Vector3::new(0.2, 0.1, 0.02), 0.04, 0.1);
        assert!(l.center_of_mass.x > 0.0 && l.center_of_mass.x < 0.1);
    }

    #[test]
    fn rejects_center_of_mass_outside() {
        let mesh = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        assert!(SyntheticObject::new(mesh, Point3::new(2.0, 0.5, 0.5), "bad").is_err());
    }
}
