//! Bundled demo scenes: an open tabletop, a shelf with a low ceiling and a
//! cubby too low for any grasp to fit.

use nalgebra::{Matrix3, Point3, Vector3};
use placeability::geom::{PointCloud, RigidPose, TriMesh};
use placeability::grasp::GraspCandidate;
use placeability::oracle::{ring_viewpoints, synthesize_partial_cloud};
use placeability::Result;

pub const DEMO_NAMES: [&str; 3] = ["tabletop", "shelf", "low_shelf"];

/// Where the object stands when observed, on the source table.
pub const OBJECT_BASE: Point3<f64> = Point3::new(-0.5, 0.0, 0.0);

/// Scene geometry before it is written to disk.
#[derive(Debug, Clone)]
pub struct DemoScene {
    pub name: &'static str,
    pub object_cloud: PointCloud,
    pub source_support: TriMesh,
    pub target_support: TriMesh,
    pub target_environment: TriMesh,
    pub target_objects: Vec<TriMesh>,
    /// Named grasp sets shipped with the scene; the first is the default.
    pub grasps: Vec<(&'static str, Vec<GraspCandidate>)>,
    /// Config overrides shipped as `config.txt`, empty for none.
    pub config: &'static str,
}

fn slab(min: [f64; 3], max: [f64; 3]) -> TriMesh {
    TriMesh::cuboid(Point3::from(min), Point3::from(max))
}

fn source_table() -> TriMesh {
    slab([-0.8, -0.3, -0.04], [-0.2, 0.3, 0.0])
}

/// Partial, noisy observation from three raised viewpoints.
fn observe(mesh: &TriMesh, seed: u64) -> Result<PointCloud> {
    let center = OBJECT_BASE + Vector3::new(0.0, 0.0, 0.05);
    let views = ring_viewpoints(center, 0.5, 0.35, 3, 0.3);
    Ok(synthesize_partial_cloud(mesh, &views, 0.0005, 6000, seed)?.cloud)
}

fn box_at_base(dims: Vector3<f64>) -> TriMesh {
    let half = Vector3::new(dims.x / 2.0, dims.y / 2.0, 0.0);
    TriMesh::cuboid(OBJECT_BASE - half, OBJECT_BASE + half + Vector3::z() * dims.z)
}

fn grasp(rotation: Matrix3<f64>, center: Point3<f64>, width: f64, quality: f64) -> GraspCandidate {
    GraspCandidate {
        pose: RigidPose::new(rotation, center.coords).expect("axis-aligned frame"),
        width,
        quality,
    }
}

/// Top-down grasps closing across x, just below the top of a box with `dims`.
pub fn top_grasps(dims: Vector3<f64>) -> Vec<GraspCandidate> {
    let mut out = Vec::new();
    for (i, depth) in [0.02, 0.025, 0.03].into_iter().enumerate() {
        for (j, dy) in [0.0, 0.01, -0.01].into_iter().enumerate() {
            let c = OBJECT_BASE + Vector3::new(0.0, dy, dims.z - depth);
            out.push(grasp(Matrix3::identity(), c, dims.x, 0.9 - 0.05 * i as f64 - 0.02 * j as f64));
        }
    }
    out
}

/// Horizontal grasps closing across x, from the front and the back of a box
/// with `dims`, at the given heights.
pub fn side_grasps(dims: Vector3<f64>, heights: &[f64]) -> Vec<GraspCandidate> {
    let mut out = Vec::new();
    for (i, h) in heights.iter().enumerate() {
        for (j, back) in [-Vector3::y(), Vector3::y()].into_iter().enumerate() {
            let c = OBJECT_BASE + Vector3::z() * *h + back * (dims.y / 2.0 - 0.02);
            let closing = Vector3::z().cross(&back);
            let rotation = Matrix3::from_columns(&[closing, back.cross(&closing), back]);
            out.push(grasp(rotation, c, dims.x, 0.9 - 0.05 * i as f64 - 0.02 * j as f64));
        }
    }
    out
}

/// Box used on the shelves: too wide across y for the gripper.
pub const SHELF_OBJECT: Vector3<f64> = Vector3::new(0.06, 0.1, 0.15);

pub fn tabletop() -> Result<DemoScene> {
    let dims = Vector3::new(0.06, 0.08, 0.12);
    let object = box_at_base(dims);
    Ok(DemoScene {
        name: "tabletop",
        object_cloud: observe(&object, 11)?,
        source_support: source_table(),
        target_support: slab([0.1, -0.3, -0.04], [0.7, 0.3, 0.0]),
        target_environment: TriMesh::empty(),
        target_objects: vec![
            slab([0.2, 0.1, 0.0], [0.3, 0.2, 0.1]),
            TriMesh::cylinder(0.04, 0.0, 0.15, 24)
                .transformed(&RigidPose::from_translation(Vector3::new(0.5, -0.15, 0.0))),
        ],
        grasps: vec![
            ("grasps_top.txt", top_grasps(dims)),
            ("grasps_side.txt", side_grasps(dims, &[0.06, 0.07])),
        ],
        config: "heuristic.mode = dense\n",
    })
}

/// A board with a ceiling 16.5 cm above it and a back wall. The box only
/// fits upright or lying on its widest side.
pub fn shelf() -> Result<DemoScene> {
    let object = box_at_base(SHELF_OBJECT);
    Ok(DemoScene {
        name: "shelf",
        object_cloud: observe(&object, 12)?,
        source_support: source_table(),
        target_support: slab([0.2, -0.1, 0.28], [0.8, 0.1, 0.30]),
        target_environment: TriMesh::merge([
            &slab([0.2, -0.1, 0.465], [0.8, 0.1, 0.485]),
            &slab([0.2, 0.1, 0.28], [0.8, 0.12, 0.485]),
        ]),
        target_objects: vec![],
        grasps: vec![
            ("grasps_top.txt", top_grasps(SHELF_OBJECT)),
            ("grasps_side.txt", side_grasps(SHELF_OBJECT, &[0.08, 0.09])),
        ],
        config: "",
    })
}

/// A closed cubby 9 cm high with a front rail: the box only fits lying on
/// its narrow side, where every grasp runs into the board or the walls.
pub fn low_shelf() -> Result<DemoScene> {
    let object = box_at_base(SHELF_OBJECT);
    Ok(DemoScene {
        name: "low_shelf",
        object_cloud: observe(&object, 13)?,
        source_support: source_table(),
        target_support: slab([0.2, -0.1, 0.28], [0.8, 0.1, 0.30]),
        target_environment: TriMesh::merge([
            &slab([0.18, -0.1, 0.39], [0.82, 0.12, 0.41]),
            &slab([0.2, 0.1, 0.28], [0.8, 0.12, 0.39]),
            &slab([0.18, -0.1, 0.28], [0.2, 0.12, 0.39]),
            &slab([0.8, -0.1, 0.28], [0.82, 0.12, 0.39]),
            &slab([0.2, -0.1, 0.30], [0.8, -0.07, 0.32]),
        ]),
        target_objects: vec![],
        grasps: vec![("grasps_top.txt", top_grasps(SHELF_OBJECT))],
        config: "",
    })
}

pub fn build(name: &str) -> Result<DemoScene> {
    match name {
        "tabletop" => tabletop(),
        "shelf" => shelf(),
        "low_shelf" => low_shelf(),
        other => Err(placeability::Error::InvalidParameter(format!(
            "unknown demo scene {other:?}, expected one of {DEMO_NAMES:?}"
        ))),
    }
}
