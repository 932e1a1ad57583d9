//! Grasp candidates, a synthetic antipodal sampler, grasp transport between
//! object poses, reachability predicates and the three-box gripper model.
//!
//! Gripper frame: the origin is the grasp center between the finger pads,
//! the fingers close along ±x and the gripper approaches along −z, so the
//! palm sits on +z.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{OrientedBox, PointCloud, RigidPose, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pose: RigidPose,
    pub width: f64,
    pub quality: f64,
}

impl GraspCandidate {
    pub fn new(pose: RigidPose, width: f64, quality: f64, gripper: &GripperModel) -> Result<Self> {
        if !(0.0..=1.0).contains(&quality) {
            return Err(Error::param(format!("grasp quality {quality} outside [0, 1]")));
        }
        if !(width > 0.0 && width <= gripper.max_opening) {
            return Err(Error::param(format!(
                "grasp width {width} outside (0, {}]",
                gripper.max_opening
            )));
        }
        Ok(Self { pose, width, quality })
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(*self.pose.translation())
    }

    /// Direction the gripper travels toward the object (gripper −z).
    pub fn approach(&self) -> Vector3<f64> {
        -self.pose.rotation().column(2).into_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    /// Palm extents along gripper x, y, z.
    pub palm: Vector3<f64>,
    /// Extents of each finger along gripper x, y, z.
    pub finger: Vector3<f64>,
    pub max_opening: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            palm: Vector3::new(0.09, 0.09, 0.05),
            finger: Vector3::new(0.02, 0.01, 0.06),
            max_opening: 0.085,
        }
    }
}

/// Fraction of the finger length that reaches past the grasp center.
const FINGER_REACH: f64 = 0.25;

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: &Vector3<f64>| v.iter().all(|&x| x > 0.0 && x.is_finite());
        if !positive(&self.palm) || !positive(&self.finger) || !(self.max_opening > 0.0) {
            return Err(Error::param("gripper extents and opening must be > 0"));
        }
        Ok(())
    }

    /// Palm and the two fingers in the gripper frame, fingers set `width` apart.
    pub fn boxes(&self, width: f64) -> [OrientedBox; 3] {
        let f = self.finger;
        let z_lo = -FINGER_REACH * f.z;
        let z_hi = z_lo + f.z;
        let finger = |side: f64| {
            let x_in = side * width / 2.0;
            let x_out = side * (width / 2.0 + f.x);
            OrientedBox::from_bounds(
                Point3::new(x_in.min(x_out), -f.y / 2.0, z_lo),
                Point3::new(x_in.max(x_out), f.y / 2.0, z_hi),
            )
        };
        let palm = OrientedBox::from_bounds(
            Point3::new(-self.palm.x / 2.0, -self.palm.y / 2.0, z_hi),
            Point3::new(self.palm.x / 2.0, self.palm.y / 2.0, z_hi + self.palm.z),
        );
        [palm, finger(-1.0), finger(1.0)]
    }

    /// The three boxes placed at a grasp.
    pub fn posed_boxes(&self, grasp: &GraspCandidate) -> [OrientedBox; 3] {
        self.boxes(grasp.width).map(|b| b.transformed(&grasp.pose))
    }

    /// The posed gripper as one mesh (for export and inspection).
    pub fn mesh(&self, grasp: &GraspCandidate) -> TriMesh {
        let boxes = self.posed_boxes(grasp);
        let mut vertices = Vec::with_capacity(24);
        let mut faces = Vec::with_capacity(36);
        for b in &boxes {
            let base = vertices.len();
            vertices.extend(b.corners());
            faces.extend(crate::geom::BOX_FACES.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        }
        TriMesh::new(vertices, faces).expect("box faces are valid")
    }
}

/// Kinematic feasibility of a gripper pose.
pub trait Reachability: Send + Sync {
    fn accepts(&self, pose: &RigidPose) -> bool;
}

/// Accepts grasp centers inside an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBox {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Default for WorkspaceBox {
    fn default() -> Self {
        Self {
            min: Point3::new(-1.0, -1.0, -0.5),
            max: Point3::new(1.0, 1.0, 1.5),
        }
    }
}

impl WorkspaceBox {
    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }
}

impl Reachability for WorkspaceBox {
    fn accepts(&self, pose: &RigidPose) -> bool {
        let t = pose.translation();
        (0..3).all(|i| t[i] >= self.min[i] && t[i] <= self.max[i])
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysReachable;

impl Reachability for AlwaysReachable {
    fn accepts(&self, _: &RigidPose) -> bool {
        true
    }
}

pub fn reachable(pred: &dyn Reachability, g: &GraspCandidate) -> bool {
    pred.accepts(&g.pose)
}

/// Re-express a grasp sampled with the object at `m_o` for the object at `m_p`.
pub fn transform_grasp(g: &GraspCandidate, m_o: &RigidPose, m_p: &RigidPose) -> GraspCandidate {
    GraspCandidate {
        pose: m_p.compose(&m_o.inverse()).compose(&g.pose),
        ..*g
    }
}

/// Whether any posed gripper box comes within `margin` of `env`.
pub fn gripper_collides(g: &GraspCandidate, gripper: &GripperModel, env: &TriMesh, margin: f64) -> Result<bool> {
    if !(margin >= 0.0) {
        return Err(Error::param(format!("collision margin must be >= 0, got {margin}")));
    }
    if env.is_empty() {
        return Err(Error::EmptyGeometry("gripper collision needs a non-empty environment"));
    }
    Ok(posed_boxes_collide(&gripper.posed_boxes(g), env, margin))
}

pub(crate) fn posed_boxes_collide(boxes: &[OrientedBox], env: &TriMesh, margin: f64) -> bool {
    let Some(bounds) = env.bounds() else {
        return false;
    };
    boxes
        .iter()
        .any(|b| b.aabb().distance(&bounds) <= margin && env.box_within(b, margin))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntipodalParams {
    /// Perpendicular tolerance around the inward normal ray, meters.
    pub ray_tolerance: f64,
    /// Narrowest accepted contact separation, meters.
    pub min_width: f64,
    /// Points may sit this far inside the palm or fingers, meters.
    pub penetration_tolerance: f64,
    /// Seed contacts tried per requested grasp before giving up.
    pub attempts_per_grasp: usize,
}

impl Default for AntipodalParams {
    fn default() -> Self {
        Self {
            ray_tolerance: 0.002,
            min_width: 0.005,
            penetration_tolerance: 0.002,
            attempts_per_grasp: 20,
        }
    }
}

/// Antipodality damped by how close the width comes to the gripper limit.
pub fn antipodal_quality(n1: &Vector3<f64>, n2: &Vector3<f64>, width: f64, max_opening: f64) -> f64 {
    let antipodality = (-n1.dot(n2)).max(0.0);
    let slack = ((max_opening - width) / (0.1 * max_opening)).clamp(0.0, 1.0);
    (antipodality * slack).clamp(0.0, 1.0)
}

/// Up to `n` grasps from contact pairs found along inward normals. Each
/// grasp closes across its two contacts, approaches from a random direction
/// perpendicular to the closing axis and keeps the cloud out of its palm
/// and fingers.
pub fn sample_antipodal_grasps(
    cloud: &PointCloud,
    gripper: &GripperModel,
    n: usize,
    seed: u64,
    params: &AntipodalParams,
) -> Result<Vec<GraspCandidate>> {
    if n == 0 {
        return Err(Error::param("grasp count must be >= 1"));
    }
    gripper.validate()?;
    let normals = cloud.normals().ok_or(Error::MissingNormals)?;
    let points = cloud.points();
    if points.is_empty() {
        return Err(Error::EmptyGeometry("grasp sampling needs a non-empty cloud"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n * params.attempts_per_grasp {
        if out.len() == n {
            break;
        }
        let i = rng.random_range(0..points.len());
        let roll: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (p1, n1) = (points[i], normals[i]);
        let Some(j) = opposite_contact(points, normals, i, gripper.max_opening, params) else {
            continue;
        };
        let (p2, n2) = (points[j], normals[j]);
        let width = (p2 - p1).norm();
        let quality = antipodal_quality(&n1, &n2, width, gripper.max_opening);
        if quality <= 0.0 {
            continue;
        }
        let x = (p2 - p1) / width;
        let helper = if x.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = x.cross(&helper).normalize();
        let v = x.cross(&u);
        let z = u * roll.cos() + v * roll.sin();
        let y = z.cross(&x);
        let rotation = nalgebra::Matrix3::from_columns(&[x, y, z]);
        let center = nalgebra::center(&p1, &p2);
        let pose = RigidPose::with_tolerance(rotation, center.coords, 1e-6)?;
        let grasp = GraspCandidate { pose, width, quality };
        let boxes = gripper.posed_boxes(&grasp);
        if points
            .iter()
            .any(|p| boxes.iter().any(|b| b.contains(p, params.penetration_tolerance)))
        {
            continue;
        }
        out.push(grasp);
    }
    Ok(out)
}

/// Nearest point along the inward normal ray of `i` that faces back at it.
fn opposite_contact(
    points: &[Point3<f64>],
    normals: &[Vector3<f64>],
    i: usize,
    max_opening: f64,
    params: &AntipodalParams,
) -> Option<usize> {
    let (p1, inward) = (points[i], -normals[i]);
    let mut best: Option<(usize, f64)> = None;
    for (j, (p, nj)) in points.iter().zip(normals).enumerate() {
        if j == i || nj.dot(&inward) <= 0.0 {
            continue;
        }
        let d = p - p1;
        let t = d.dot(&inward);
        if t < params.min_width || t > max_opening {
            continue;
        }
        if (d - inward * t).norm() > params.ray_tolerance || d.norm() > max_opening {
            continue;
        }
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((j, t));
        }
    }
    best.map(|(j, _)| j)
}
