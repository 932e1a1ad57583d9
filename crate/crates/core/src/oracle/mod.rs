//! Ground truth for the stability term: synthetic objects with known mass
//! distribution, a quasi-static tipping test, overhang and incline sweeps,
//! partial-view cloud synthesis and pose-deviation metrics.

mod deviation;
mod sweep;
mod synthetic;
mod visibility;

pub use deviation::{pose_deviation, PoseDeviation};
pub use sweep::{analytic_tipping_angle_deg, edge_sweep, first_half_crossing, incline_sweep, sig9, SweepKind, SweepResult};
pub use synthetic::SyntheticObject;
pub use visibility::{ring_viewpoints, synthesize_partial_cloud, PartialCloud};

use crate::geom::{point_in_polygon, Polygon2D, RigidPose};

/// Static equilibrium without friction limits: the posed true center of
/// mass projects into the support polygon (boundary inclusive).
pub fn quasi_static_stable(obj: &SyntheticObject, pose: &RigidPose, support: &Polygon2D) -> bool {
    point_in_polygon(&pose.transform_point(&obj.center_of_mass).xy(), support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector2, Vector3};

    #[test]
    fn box_tipping_cases() {
        let b = SyntheticObject::uniform_box(Vector3::new(0.2, 0.1, 0.1));
        let full = b.footprint();
        assert!(quasi_static_stable(&b, &RigidPose::identity(), &full));
        // 51 % of the footprint past an edge on +x
        let edge = 0.1 - 0.51 * 0.2;
        let clipped = full.clip_half_plane(&Vector2::x(), edge).unwrap();
        assert!(!quasi_static_stable(&b, &RigidPose::identity(), &clipped));
    }

    #[test]
    fn offset_mass_box_tips_asymmetrically() {
        let b = SyntheticObject::offset_mass_box(Vector3::new(0.2, 0.1, 0.1), 0.25);
        let full = b.footprint();
        let stable_at = |dir: Vector2<f64>, f: f64| {
            let support = full.clip_half_plane(&dir, 0.1 - f * 0.2);
            support.is_some_and(|s| quasi_static_stable(&b, &RigidPose::identity(), &s))
        };
        assert!(stable_at(Vector2::x(), 0.24) && !stable_at(Vector2::x(), 0.26));
        assert!(stable_at(-Vector2::x(), 0.74) && !stable_at(-Vector2::x(), 0.76));
    }
}
