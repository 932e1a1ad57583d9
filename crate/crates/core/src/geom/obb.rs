use nalgebra::{Point3, Vector3};

use super::bvh::Aabb;
use super::distance::Triangle;
use super::RigidPose;

/// Solid box given by a pose (center and axes) and half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub pose: RigidPose,
    pub half_extents: Vector3<f64>,
}

const CORNER_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Outward-wound faces over [`CORNER_SIGNS`].
pub(crate) const BOX_FACES: [[usize; 3]; 12] = [
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

impl OrientedBox {
    pub fn new(pose: RigidPose, half_extents: Vector3<f64>) -> Self {
        Self { pose, half_extents }
    }

    /// Axis-aligned box in its own frame, spanning `min..max`.
    pub fn from_bounds(min: Point3<f64>, max: Point3<f64>) -> Self {
        Self {
            pose: RigidPose::from_translation(nalgebra::center(&min, &max).coords),
            half_extents: (max - min) / 2.0,
        }
    }

    /// Same box moved by `pose`.
    pub fn transformed(&self, pose: &RigidPose) -> Self {
        Self {
            pose: pose.compose(&self.pose),
            half_extents: self.half_extents,
        }
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        CORNER_SIGNS.map(|s| {
            self.pose
                .transform_point(&Point3::from(self.half_extents.component_mul(&Vector3::from(s))))
        })
    }

    pub fn triangles(&self) -> [Triangle; 12] {
        let c = self.corners();
        BOX_FACES.map(|f| Triangle::new(c[f[0]], c[f[1]], c[f[2]]))
    }

    pub fn aabb(&self) -> Aabb {
        let mut b = Aabb::empty();
        for c in self.corners() {
            b.grow(&c);
        }
        b
    }

    /// Whether `p` lies strictly deeper than `inset` inside the box.
    pub fn contains(&self, p: &Point3<f64>, inset: f64) -> bool {
        let local = self.pose.rotation().transpose() * (p.coords - self.pose.translation());
        (0..3).all(|i| local[i].abs() < self.half_extents[i] - inset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::TriMesh;

    #[test]
    fn faces_match_cuboid_mesh() {
        let b = OrientedBox::from_bounds(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 2.0, 3.0));
        let area: f64 = b.triangles().iter().map(Triangle::area).sum();
        assert!((area - 22.0).abs() < 1e-12);
        let center = Point3::new(0.5, 1.0, 1.5);
        for t in b.triangles() {
            assert!(t.scaled_normal().dot(&(t.a - center)) > 0.0);
        }
        let mesh = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 2.0, 3.0));
        assert!((mesh.surface_area() - area).abs() < 1e-12);
    }

    #[test]
    fn containment_follows_the_pose() {
        let b = OrientedBox::new(RigidPose::rot_z(std::f64::consts::FRAC_PI_4), Vector3::new(1.0, 0.1, 0.1));
        assert!(b.contains(&Point3::new(0.6, 0.6, 0.0), 0.0));
        assert!(!b.contains(&Point3::new(0.6, -0.6, 0.0), 0.0));
        assert!(!b.contains(&Point3::new(0.0, 0.0, 0.1), 0.0));
    }
}
