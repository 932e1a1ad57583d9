use nalgebra::{Matrix3, Matrix4, Point3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `RᵀR = I` and `det R = 1` for validated rotations.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// A rigid transform in SE(3): `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PoseRows", try_from = "PoseRows")]
pub struct RigidPose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Serialized form: rotation rows and translation.
#[derive(Serialize, Deserialize)]
struct PoseRows {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

/// Orthonormality tolerance when reading serialized poses.
const SERIALIZED_TOLERANCE: f64 = 1e-6;

impl From<RigidPose> for PoseRows {
    fn from(p: RigidPose) -> Self {
        let r = &p.rotation;
        Self {
            rotation: [0, 1, 2].map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]),
            translation: p.translation.into(),
        }
    }
}

impl TryFrom<PoseRows> for RigidPose {
    type Error = Error;

    fn try_from(rows: PoseRows) -> Result<Self> {
        let flat: Vec<f64> = rows.rotation.iter().flatten().copied().collect();
        Self::with_tolerance(Matrix3::from_row_slice(&flat), Vector3::from(rows.translation), SERIALIZED_TOLERANCE)
    }
}

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Validates orthonormality and handedness within [`ROTATION_TOLERANCE`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        Self::with_tolerance(rotation, translation, ROTATION_TOLERANCE)
    }

    pub fn with_tolerance(
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::geometry("pose has non-finite entries"));
        }
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        let det = rotation.determinant();
        if ortho > tolerance || (det - 1.0).abs() > tolerance {
            return Err(Error::geometry(format!(
                "rotation is not proper orthonormal (|RᵀR-I|={ortho:.3e}, det={det:.12})"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_rotation(rotation: Rotation3<f64>) -> Self {
        Self {
            rotation: *rotation.matrix(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        Self::from_rotation(Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle))
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vector3::z(), angle)
    }

    /// Rotation taking +z onto `normal`, using the shortest arc.
    pub fn align_z_to(normal: &Vector3<f64>) -> Self {
        let n = normal.normalize();
        let rotation = Rotation3::rotation_between(&Vector3::z(), &n)
            .unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI));
        Self::from_rotation(rotation)
    }

    pub fn with_translation(mut self, translation: Vector3<f64>) -> Self {
        self.translation = translation;
        self
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let rt = self.rotation.transpose();
        RigidPose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Row-major rotation followed by translation (the grasp file layout).
    pub fn to_row_major(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.x,
            t.y,
            t.z,
        ]
    }

    pub fn from_row_major(values: &[f64; 12], tolerance: f64) -> Result<Self> {
        let rotation = Matrix3::from_row_slice(&values[..9]);
        let translation = Vector3::new(values[9], values[10], values[11]);
        Self::with_tolerance(rotation, translation, tolerance)
    }

    /// Geodesic angle between the two rotations, radians in `[0, π]`.
    pub fn rotation_angle_to(&self, other: &RigidPose) -> f64 {
        let relative = self.rotation.transpose() * other.rotation;
        ((relative.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    pub fn approx_eq(&self, other: &RigidPose, tolerance: f64) -> bool {
        (self.rotation - other.rotation).amax() <= tolerance
            && (self.translation - other.translation).amax() <= tolerance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let p = RigidPose::rot_z(FRAC_PI_2).transform_point(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let a = RigidPose::from_axis_angle(&Vector3::new(1.0, 2.0, -0.5), 1.1)
            .with_translation(Vector3::new(0.3, -2.0, 5.0));
        assert!(a.compose(&a.inverse()).approx_eq(&RigidPose::identity(), 1e-9));
        assert!(a.inverse().compose(&a).approx_eq(&RigidPose::identity(), 1e-9));
    }

    #[test]
    fn rejects_reflection_and_shear() {
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidPose::new(reflect, Vector3::zeros()).is_err());
        let mut shear = Matrix3::identity();
        shear[(0, 1)] = 0.1;
        assert!(RigidPose::new(shear, Vector3::zeros()).is_err());
    }

    #[test]
    fn row_major_layout() {
        let pose = RigidPose::rot_x(0.3).with_translation(Vector3::new(1.0, 2.0, 3.0));
        let back = RigidPose::from_row_major(&pose.to_row_major(), 1e-9).unwrap();
        assert!(back.approx_eq(&pose, 0.0));
        assert_eq!(&pose.to_row_major()[9..], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn align_z_handles_antiparallel() {
        let down = RigidPose::align_z_to(&-Vector3::z());
        assert!((down.transform_vector(&Vector3::z()) + Vector3::z()).norm() < 1e-12);
        assert!((down.rotation().determinant() - 1.0).abs() < 1e-12);
    }
}
