//! Placement candidates in a target region: area-uniform surface samples
//! with random yaw, the six-orientation expansion, collision filtering and
//! the clearance-based packing heuristics.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, mesh_min_distance, meshes_collide, Polygon2D, RigidPose, TriMesh};
use crate::object::ObjectModel;
use crate::stability::SupportSurface;

#[derive(Debug, Clone)]
pub struct TargetRegion {
    pub support: TriMesh,
    pub environment: TriMesh,
    pub others: Vec<TriMesh>,
}

impl TargetRegion {
    pub fn new(support: TriMesh, environment: TriMesh, others: Vec<TriMesh>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyGeometry("target region needs a support mesh"));
        }
        Ok(Self {
            support,
            environment,
            others,
        })
    }

    /// Everything a gripper can hit: support, environment and other objects.
    pub fn obstacles(&self) -> TriMesh {
        TriMesh::merge(std::iter::once(&self.support).chain(std::iter::once(&self.environment)).chain(&self.others))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrientationLabel {
    #[serde(rename = "observed")]
    Observed,
    #[serde(rename = "+pitch90")]
    PlusPitch90,
    #[serde(rename = "-pitch90")]
    MinusPitch90,
    #[serde(rename = "+roll90")]
    PlusRoll90,
    #[serde(rename = "-roll90")]
    MinusRoll90,
    #[serde(rename = "flip")]
    Flip,
}

impl OrientationLabel {
    pub const ALL: [OrientationLabel; 6] = [
        Self::Observed,
        Self::PlusPitch90,
        Self::MinusPitch90,
        Self::PlusRoll90,
        Self::MinusRoll90,
        Self::Flip,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Observed => "observed",
            Self::PlusPitch90 => "+pitch90",
            Self::MinusPitch90 => "-pitch90",
            Self::PlusRoll90 => "+roll90",
            Self::MinusRoll90 => "-roll90",
            Self::Flip => "flip",
        }
    }

    /// Pitch turns about x, roll about y, flip is a half turn about x.
    pub fn rotation(&self) -> Matrix3<f64> {
        let pose = match self {
            Self::Observed => RigidPose::identity(),
            Self::PlusPitch90 => RigidPose::rot_x(FRAC_PI_2),
            Self::MinusPitch90 => RigidPose::rot_x(-FRAC_PI_2),
            Self::PlusRoll90 => RigidPose::rot_y(FRAC_PI_2),
            Self::MinusRoll90 => RigidPose::rot_y(-FRAC_PI_2),
            Self::Flip => RigidPose::rot_x(PI),
        };
        *pose.rotation()
    }
}

impl fmt::Display for OrientationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The observed orientation of `m` and its five quarter/half turns; the
/// translation is kept.
pub fn orientation_set(m: &RigidPose) -> [(OrientationLabel, RigidPose); 6] {
    OrientationLabel::ALL.map(|label| {
        let rotation = label.rotation() * m.rotation();
        (
            label,
            RigidPose::with_tolerance(rotation, *m.translation(), 1e-6).expect("product of rotations"),
        )
    })
}

/// A planar piece of the support with its vertical-projection footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPatch {
    pub normal: Vector3<f64>,
    pub offset: f64,
    pub footprint: Polygon2D,
}

impl SupportPatch {
    pub fn surface(&self) -> SupportSurface {
        SupportSurface::new(self.normal, Some(self.footprint.clone()))
    }

    /// Height of the patch plane above `(x, y)`.
    pub fn height_at(&self, p: &Point2<f64>) -> f64 {
        (self.offset - self.normal.x * p.x - self.normal.y * p.y) / self.normal.z
    }
}

/// Upward faces of the support, grouped into connected coplanar patches.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    patches: Vec<SupportPatch>,
    face_patch: Vec<Option<usize>>,
}

const PLANE_NORMAL_TOL: f64 = 1e-6;
const PLANE_OFFSET_TOL: f64 = 1e-6;

impl SupportIndex {
    /// Faces whose normal is within `max_tilt` radians of +z. A patch's
    /// footprint is the convex hull of its vertices, so non-convex patches
    /// are treated as their hull.
    pub fn new(support: &TriMesh, max_tilt: f64) -> Self {
        let cos_max = max_tilt.cos();
        let faces = support.faces();
        let verts = support.vertices();
        let mut parent: Vec<usize> = (0..faces.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let upward: Vec<bool> = (0..faces.len()).map(|f| support.face_normal(f).z >= cos_max).collect();
        let quantize = |p: &Point3<f64>| [p.x, p.y, p.z].map(|c| (c * 1e7).round() as i64);
        let mut by_vertex: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (f, face) in faces.iter().enumerate() {
            if upward[f] {
                for &v in face {
                    by_vertex.entry(quantize(&verts[v])).or_default().push(f);
                }
            }
        }
        let mut keys: Vec<_> = by_vertex.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let shared = &by_vertex[&key];
            for w in shared.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (na, nb) = (support.face_normal(a), support.face_normal(b));
                let coplanar = (na.dot(&nb) - 1.0).abs() < PLANE_NORMAL_TOL
                    && (na.dot(&verts[faces[b][0]].coords) - na.dot(&verts[faces[a][0]].coords)).abs() < PLANE_OFFSET_TOL;
                if coplanar {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }

        let mut root_patch: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut face_patch = vec![None; faces.len()];
        for f in 0..faces.len() {
            if !upward[f] {
                continue;
            }
            let r = find(&mut parent, f);
            let id = *root_patch.entry(r).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            members[id].push(f);
            face_patch[f] = Some(id);
        }

        let mut patches = Vec::with_capacity(members.len());
        let mut remap = vec![None; members.len()];
        for (id, group) in members.iter().enumerate() {
            let area: f64 = group.iter().map(|&f| support.triangles()[f].area()).sum();
            let normal = group
                .iter()
                .fold(Vector3::zeros(), |acc, &f| acc + support.triangles()[f].scaled_normal())
                .normalize();
            let pts: Vec<Point2<f64>> = group
                .iter()
                .flat_map(|&f| faces[f].iter().map(|&v| verts[v].xy()))
                .collect();
            if let (true, Ok(footprint)) = (area > 0.0, convex_hull_2d(&pts)) {
                let offset = normal.dot(&verts[faces[group[0]][0]].coords);
                remap[id] = Some(patches.len());
                patches.push(SupportPatch {
                    normal,
                    offset,
                    footprint,
                });
            }
        }
        for slot in &mut face_patch {
            *slot = slot.and_then(|id| remap[id]);
        }
        Self { patches, face_patch }
    }

    pub fn patches(&self) -> &[SupportPatch] {
        &self.patches
    }

    pub fn patch_of_face(&self, face: usize) -> Option<usize> {
        self.face_patch.get(face).copied().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementCandidate {
    /// `m_p`: object frame to world.
    pub pose: RigidPose,
    pub label: OrientationLabel,
    pub surface_point: Point3<f64>,
    pub surface_normal: Vector3<f64>,
    pub yaw: f64,
    pub patch: usize,
}

impl PlacementCandidate {
    /// Object frame turned by `label`, yawed about the surface normal and
    /// lowered until its lowest point touches the surface.
    pub fn resting(
        object: &ObjectModel,
        surface_point: Point3<f64>,
        surface_normal: Vector3<f64>,
        yaw: f64,
        label: OrientationLabel,
        patch: usize,
    ) -> Self {
        let align = RigidPose::align_z_to(&surface_normal);
        let rotation = align.rotation() * RigidPose::rot_z(yaw).rotation() * label.rotation();
        let lowest = object.lowest_along(&rotation, &surface_normal);
        let translation = surface_point.coords - surface_normal * lowest;
        let pose = RigidPose::with_tolerance(rotation, translation, 1e-6).expect("product of rotations");
        Self {
            pose,
            label,
            surface_point,
            surface_normal,
            yaw,
            patch,
        }
    }

    /// The same surface point and yaw in each of the six orientations.
    pub fn orientations(&self, object: &ObjectModel) -> [PlacementCandidate; 6] {
        OrientationLabel::ALL
            .map(|label| Self::resting(object, self.surface_point, self.surface_normal, self.yaw, label, self.patch))
    }
}

/// `n` observed-orientation candidates: surface points drawn area-uniformly
/// from the support faces tilted at most `max_tilt` radians, uniform yaw.
pub fn sample_placement_poses(
    region: &TargetRegion,
    index: &SupportIndex,
    object: &ObjectModel,
    n: usize,
    seed: u64,
) -> Result<Vec<PlacementCandidate>> {
    if n == 0 {
        return Err(Error::param("placement count must be >= 1"));
    }
    if region.support.is_empty() {
        return Err(Error::EmptyGeometry("target region needs a support mesh"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = region
        .support
        .sample_surface_filtered(n, &mut rng, |f| index.patch_of_face(f).is_some())?;
    Ok(samples
        .iter()
        .map(|s| {
            let yaw = rng.random_range(0.0..TAU);
            let patch = index.patch_of_face(s.face).expect("sampled faces have a patch");
            PlacementCandidate::resting(object, s.point, s.normal, yaw, OrientationLabel::Observed, patch)
        })
        .collect())
}

/// Why a placement was dropped by [`filter_colliding_placements`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementCollision {
    Support,
    Environment,
    OtherObject,
}

/// Collision status of the object hull (object frame) at `pose`. The support
/// is tested after lifting the hull by `allowance` along the surface normal,
/// so resting contact passes; environment and other objects use `margin`.
pub fn placement_collision(
    hull: &TriMesh,
    candidate: &PlacementCandidate,
    region: &TargetRegion,
    margin: f64,
    allowance: f64,
) -> Result<Option<PlacementCollision>> {
    let posed = hull.transformed(&candidate.pose);
    let lift = RigidPose::from_translation(candidate.surface_normal * allowance);
    if meshes_collide(&posed.transformed(&lift), &region.support, 0.0)? {
        return Ok(Some(PlacementCollision::Support));
    }
    if !region.environment.is_empty() && meshes_collide(&posed, &region.environment, margin)? {
        return Ok(Some(PlacementCollision::Environment));
    }
    for other in &region.others {
        if !other.is_empty() && meshes_collide(&posed, other, margin)? {
            return Ok(Some(PlacementCollision::OtherObject));
        }
    }
    Ok(None)
}

pub fn filter_colliding_placements(
    candidates: &[PlacementCandidate],
    hull: &TriMesh,
    region: &TargetRegion,
    margin: f64,
    allowance: f64,
) -> Result<Vec<PlacementCandidate>> {
    let mut kept = Vec::with_capacity(candidates.len());
    for c in candidates {
        if placement_collision(hull, c, region, margin, allowance)?.is_none() {
            kept.push(*c);
        }
    }
    Ok(kept)
}

/// Distance from the posed hull to the nearest other object, `+∞` if none.
pub fn nearest_object_clearance(posed_hull: &TriMesh, region: &TargetRegion) -> Result<f64> {
    let mut best = f64::INFINITY;
    for other in region.others.iter().filter(|m| !m.is_empty()) {
        best = best.min(mesh_min_distance(posed_hull, other)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PackingMode {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingHeuristicParams {
    /// Closeness threshold `τ`, meters.
    pub tau: f64,
    /// Decay rate `k`, 1/m.
    pub decay: f64,
    /// Below this clearance the candidate is rejected, meters.
    pub margin: f64,
    pub mode: PackingMode,
}

impl Default for PackingHeuristicParams {
    fn default() -> Self {
        Self {
            tau: 0.05,
            decay: 40.0,
            margin: 0.005,
            mode: PackingMode::Dense,
        }
    }
}

impl PackingHeuristicParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0 && self.tau > self.margin) {
            return Err(Error::param("packing heuristic needs tau > margin >= 0"));
        }
        if !(self.decay > 0.0 && self.decay.is_finite()) {
            return Err(Error::param("packing heuristic decay must be > 0"));
        }
        Ok(())
    }
}

/// Dense packing rewards clearances up to `τ` and decays beyond it; sparse
/// packing decays below `τ` and saturates beyond it. Both reject clearances
/// under the margin.
pub fn packing_heuristic(d: f64, params: &PackingHeuristicParams) -> f64 {
    if d < params.margin {
        return 0.0;
    }
    match params.mode {
        PackingMode::Dense if d <= params.tau => 1.0,
        PackingMode::Dense => (-params.decay * (d - params.tau)).exp(),
        PackingMode::Sparse if d < params.tau => (-params.decay * (params.tau - d)).exp(),
        PackingMode::Sparse => 1.0,
    }
}

/// One cell of a heuristic map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicSample {
    pub patch: usize,
    pub position: Point3<f64>,
    pub clearance: f64,
    pub value: f64,
}

/// Heuristic value of the object, observed orientation and zero yaw,
/// placed at every grid node (spacing `step`) inside each support patch.
pub fn heuristic_map(
    region: &TargetRegion,
    index: &SupportIndex,
    object: &ObjectModel,
    params: &PackingHeuristicParams,
    step: f64,
) -> Result<Vec<HeuristicSample>> {
    params.validate()?;
    if !(step > 0.0) {
        return Err(Error::param("heuristic map step must be > 0"));
    }
    let mut out = Vec::new();
    for (id, patch) in index.patches().iter().enumerate() {
        let (lo, hi) = patch.footprint.vertices().iter().fold(
            (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(v), hi.sup(v)),
        );
        let nx = ((hi.x - lo.x) / step).floor() as usize;
        let ny = ((hi.y - lo.y) / step).floor() as usize;
        for j in 0..=ny {
            for i in 0..=nx {
                let xy = Point2::new(lo.x + i as f64 * step, lo.y + j as f64 * step);
                if !patch.footprint.contains(&xy) {
                    continue;
                }
                let surface = Point3::new(xy.x, xy.y, patch.height_at(&xy));
                let c = PlacementCandidate::resting(object, surface, patch.normal, 0.0, OrientationLabel::Observed, id);
                let clearance = nearest_object_clearance(&object.hull_at(&c.pose), region)?;
                out.push(HeuristicSample {
                    patch: id,
                    position: surface,
                    clearance,
                    value: packing_heuristic(clearance, params),
                });
            }
        }
    }
    Ok(out)
}
