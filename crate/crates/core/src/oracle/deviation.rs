use serde::{Deserialize, Serialize};

use crate::geom::RigidPose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseDeviation {
    /// Geodesic angle between the two orientations, degrees.
    pub rotation_deg: f64,
    /// Distance between the two origins, centimeters.
    pub translation_cm: f64,
    /// Frobenius norm of the difference of the 4×4 homogeneous matrices
    /// (translation in meters).
    pub combined_l2: f64,
}

pub fn pose_deviation(before: &RigidPose, after: &RigidPose) -> PoseDeviation {
    PoseDeviation {
        rotation_deg: before.rotation_angle_to(after).to_degrees(),
        translation_cm: (after.translation() - before.translation()).norm() * 100.0,
        combined_l2: (after.to_homogeneous() - before.to_homogeneous()).norm(),
    }
}
