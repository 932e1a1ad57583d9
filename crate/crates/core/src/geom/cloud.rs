use nalgebra::{Point3, Vector3};

use super::RigidPose;
use crate::error::{Error, Result};

/// Unit-norm tolerance for normals attached to a cloud.
pub const NORMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self> {
        Self::build(points, None)
    }

    pub fn with_normals(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Result<Self> {
        Self::build(points, Some(normals))
    }

    fn build(points: Vec<Point3<f64>>, normals: Option<Vec<Vector3<f64>>>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::geometry(format!("point {i} has non-finite coordinates")));
        }
        if let Some(normals) = &normals {
            if normals.len() != points.len() {
                return Err(Error::geometry(format!(
                    "{} normals for {} points",
                    normals.len(),
                    points.len()
                )));
            }
            if let Some(i) = normals
                .iter()
                .position(|n| !((n.norm() - 1.0).abs() <= NORMAL_TOLERANCE))
            {
                return Err(Error::geometry(format!("normal {i} is not unit length")));
            }
        }
        Ok(Self { points, normals })
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, pose: &RigidPose) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| pose.transform_point(p)).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| pose.transform_vector(n)).collect()),
        }
    }

    pub fn centroid(&self) -> Option<Point3<f64>> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(sum / self.points.len() as f64))
    }

    pub fn min_z(&self) -> Option<f64> {
        self.points.iter().map(|p| p.z).min_by(f64::total_cmp)
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }
}

/// Transforms points by `pose`; normals are rotated only.
pub fn transform_points(pose: &RigidPose, cloud: &PointCloud) -> PointCloud {
    cloud.transformed(pose)
}
