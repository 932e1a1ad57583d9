//! Rigid transforms, point clouds, meshes, hulls and distance queries.

mod bvh;
mod cloud;
pub mod distance;
mod hull3d;
mod mesh;
mod normals;
mod obb;
mod polygon;
mod pose;

pub use bvh::Aabb;
pub use cloud::{transform_points, PointCloud, NORMAL_TOLERANCE};
pub use hull3d::convex_hull_3d;
pub use mesh::{mesh_min_distance, mesh_min_distance_brute, meshes_collide, SurfaceSample, TriMesh};
pub use normals::estimate_normals;
pub use obb::OrientedBox;
pub(crate) use obb::BOX_FACES;
pub use polygon::{convex_hull_2d, point_in_polygon, Polygon2D, BOUNDARY_TOLERANCE, COLLINEAR_EPS};
pub use pose::{RigidPose, ROTATION_TOLERANCE};
