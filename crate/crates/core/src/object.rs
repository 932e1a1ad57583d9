//! The observed object: its cloud in the world, the observation pose `m_o`
//! and the convex hull used for collision checks.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{convex_hull_3d, estimate_normals, PointCloud, RigidPose, TriMesh};

/// Neighbors used when the observation carries no normals.
pub const NORMAL_NEIGHBORS: usize = 16;

/// The object frame is the observed cloud's centroid with world axes, so
/// `m_o` is a pure translation and the local cloud is centered on the origin.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    world: PointCloud,
    observed_pose: RigidPose,
    local: PointCloud,
    hull: TriMesh,
}

impl ObjectModel {
    pub fn from_observation(cloud: PointCloud) -> Result<Self> {
        let centroid = cloud
            .centroid()
            .ok_or(Error::EmptyGeometry("object cloud is empty"))?;
        let world = if cloud.normals().is_some() {
            cloud
        } else {
            estimate_normals(&cloud, NORMAL_NEIGHBORS)?
        };
        let observed_pose = RigidPose::from_translation(centroid.coords);
        let local = world.transformed(&observed_pose.inverse());
        let hull = convex_hull_3d(local.points())?;
        Ok(Self {
            world,
            observed_pose,
            local,
            hull,
        })
    }

    /// Cloud as observed, with normals.
    pub fn world_cloud(&self) -> &PointCloud {
        &self.world
    }

    /// `m_o`: object frame to world at observation time.
    pub fn observed_pose(&self) -> &RigidPose {
        &self.observed_pose
    }

    /// Cloud in the object frame.
    pub fn local_cloud(&self) -> &PointCloud {
        &self.local
    }

    /// Convex hull in the object frame.
    pub fn hull(&self) -> &TriMesh {
        &self.hull
    }

    pub fn cloud_at(&self, pose: &RigidPose) -> PointCloud {
        self.local.transformed(pose)
    }

    pub fn hull_at(&self, pose: &RigidPose) -> TriMesh {
        self.hull.transformed(pose)
    }

    /// Smallest `n · p` over the object-frame points rotated by `rotation`,
    /// i.e. how far the object reaches below its origin along `n`.
    pub fn lowest_along(&self, rotation: &nalgebra::Matrix3<f64>, n: &Vector3<f64>) -> f64 {
        self.hull
            .vertices()
            .iter()
            .map(|p| n.dot(&(rotation * p.coords)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SyntheticObject;
    use approx::assert_relative_eq;
    use nalgebra::Point3;

    #[test]
    fn frame_is_the_centroid() {
        let obj = SyntheticObject::uniform_box(Vector3::new(0.1, 0.1, 0.2));
        let cloud = obj.dense_cloud(3000, 2).transformed(&RigidPose::from_translation(Vector3::new(0.4, 0.1, 0.0)));
        let model = ObjectModel::from_observation(cloud.clone()).unwrap();
        let c = cloud.centroid().unwrap();
        assert_relative_eq!(model.observed_pose().translation(), &c.coords, epsilon = 1e-15);
        assert_relative_eq!(model.local_cloud().centroid().unwrap(), Point3::origin(), epsilon = 1e-12);
        let back = model.cloud_at(model.observed_pose());
        for (a, b) in back.points().iter().zip(cloud.points()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let low = model.lowest_along(&nalgebra::Matrix3::identity(), &Vector3::z());
        assert_relative_eq!(low, -c.z, epsilon = 1e-9);
    }

    #[test]
    fn normals_are_estimated_when_missing() {
        let obj = SyntheticObject::uniform_box(Vector3::new(0.1, 0.1, 0.1));
        let bare = PointCloud::new(obj.dense_cloud(1500, 4).points().to_vec()).unwrap();
        let model = ObjectModel::from_observation(bare).unwrap();
        assert!(model.world_cloud().normals().is_some());
        assert!(ObjectModel::from_observation(PointCloud::default()).is_err());
    }
}
