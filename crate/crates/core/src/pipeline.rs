//! End-to-end grasp–place reasoning: acquire grasps, sample and filter
//! placements, score every grasp at every placement, fuse into the unified
//! matrix and rank the pairs.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{
    posed_boxes_collide, sample_antipodal_grasps, transform_grasp, AntipodalParams, GraspCandidate, GripperModel,
    Reachability, WorkspaceBox,
};
use crate::object::ObjectModel;
use crate::placement::{
    nearest_object_clearance, packing_heuristic, placement_collision, sample_placement_poses, OrientationLabel,
    PackingHeuristicParams, PlacementCandidate, PlacementCollision, SupportIndex, TargetRegion,
};
use crate::scoring::{
    altitude_weight, normalize_grid, normalize_scores, pcg_score, placeability_score, select_best_pair,
    unified_scores, AltitudeParams, Grid, UnifiedWeights,
};
use crate::stability::{StabilityParams, StabilityProbe};

#[derive(Debug, Clone)]
pub struct SceneDescription {
    /// Where the object is picked from; grasps colliding here are dropped.
    pub source: Option<TargetRegion>,
    pub target: TargetRegion,
    pub object: ObjectModel,
}

#[derive(Debug, Clone)]
pub enum GraspSource {
    /// Grasps from an external predictor, in the world frame at `m_o`.
    Provided(Vec<GraspCandidate>),
    Synthetic(AntipodalParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReasoningParams {
    pub stability: StabilityParams,
    pub altitude: AltitudeParams,
    pub heuristic: Option<PackingHeuristicParams>,
    pub weights: UnifiedWeights,
    pub gripper: GripperModel,
    pub workspace: WorkspaceBox,
    /// Gripper-vs-scene collision margin, meters.
    pub gripper_margin: f64,
    /// Object-vs-environment collision margin, meters.
    pub placement_margin: f64,
    /// Penetration tolerated between object and support, meters.
    pub support_allowance: f64,
    /// Steepest support face that receives placements, radians.
    pub max_support_tilt: f64,
    pub n_grasps: usize,
    /// Surface samples; each is expanded to six orientations.
    pub n_placements: usize,
    pub seed: u64,
    /// Ranked pairs kept in the report.
    pub top_k: usize,
}

impl Default for ReasoningParams {
    fn default() -> Self {
        Self {
            stability: StabilityParams::default(),
            altitude: AltitudeParams::default(),
            heuristic: None,
            weights: UnifiedWeights::default(),
            gripper: GripperModel::default(),
            workspace: WorkspaceBox::default(),
            gripper_margin: 0.002,
            placement_margin: 0.002,
            support_allowance: 0.002,
            max_support_tilt: 30f64.to_radians(),
            n_grasps: 100,
            n_placements: 100,
            seed: 0,
            top_k: 10,
        }
    }
}

impl ReasoningParams {
    pub fn validate(&self) -> Result<()> {
        self.stability.validate()?;
        self.altitude.validate()?;
        self.weights.validate()?;
        self.gripper.validate()?;
        if let Some(h) = &self.heuristic {
            h.validate()?;
        }
        for (name, v) in [
            ("gripper margin", self.gripper_margin),
            ("placement margin", self.placement_margin),
            ("support allowance", self.support_allowance),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be >= 0")));
            }
        }
        if !(self.max_support_tilt >= 0.0 && self.max_support_tilt < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param("max support tilt must lie in [0, 90) degrees"));
        }
        if self.n_grasps == 0 || self.n_placements == 0 || self.top_k == 0 {
            return Err(Error::param("grasp, placement and top-k counts must be >= 1"));
        }
        Ok(())
    }

    fn grasp_seed(&self) -> u64 {
        self.seed
    }

    fn placement_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
}

/// How many candidates each stage saw and eliminated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub grasps_acquired: usize,
    pub grasps_colliding_at_source: usize,
    pub grasps_used: usize,
    pub placement_samples: usize,
    pub placement_candidates: usize,
    pub placements_hitting_support: usize,
    pub placements_hitting_environment: usize,
    pub placements_hitting_objects: usize,
    pub placements_used: usize,
    pub placements_unstable: usize,
    pub placements_rejected_by_heuristic: usize,
    pub pairs_total: usize,
    pub pairs_unreachable: usize,
    pub pairs_colliding: usize,
    pub pairs_feasible: usize,
}

impl fmt::Display for StageDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grasps {}/{} (source collisions {}), placements {}/{} (support {}, environment {}, objects {}, \
             unstable {}, heuristic {}), pairs {}/{} (unreachable {}, colliding {})",
            self.grasps_used,
            self.grasps_acquired,
            self.grasps_colliding_at_source,
            self.placements_used,
            self.placement_candidates,
            self.placements_hitting_support,
            self.placements_hitting_environment,
            self.placements_hitting_objects,
            self.placements_unstable,
            self.placements_rejected_by_heuristic,
            self.pairs_feasible,
            self.pairs_total,
            self.pairs_unreachable,
            self.pairs_colliding
        )
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    /// Filled in by callers that load the scene.
    pub ingestion: f64,
    pub grasps: f64,
    pub placements: f64,
    pub placeability: f64,
    pub collision: f64,
    pub reasoning: f64,
}

impl StageTiming {
    pub fn total(&self) -> f64 {
        self.ingestion + self.grasps + self.placements + self.placeability + self.collision + self.reasoning
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub grasp_quality: f64,
    pub reachable: bool,
    pub collision_free: bool,
    pub f_pcg: f64,
    pub inlier_fraction: f64,
    pub f_st: f64,
    /// Grasp height above the object's lowest point at the placement.
    pub altitude_clearance: f64,
    pub f_alt: f64,
    /// Distance to the nearest other object, `None` when there is none.
    pub object_clearance: Option<f64>,
    pub f_h: f64,
    pub placeability: f64,
    pub v_g: f64,
    pub v_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPairReport {
    pub rank: usize,
    pub grasp_index: usize,
    pub placement_index: usize,
    pub score: f64,
    pub orientation: OrientationLabel,
    pub grasp: GraspCandidate,
    /// The grasp carried to the placement.
    pub placed_grasp: GraspCandidate,
    pub placement: PlacementCandidate,
    pub breakdown: ScoreBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningReport {
    pub pairs: Vec<RankedPairReport>,
    /// Number of positive-score pairs before truncation to `top_k`.
    pub feasible_pairs: usize,
    pub diagnostics: StageDiagnostics,
    pub timing: StageTiming,
    pub params: ReasoningParams,
}

impl ReasoningReport {
    pub fn best(&self) -> Option<&RankedPairReport> {
        self.pairs.first()
    }
}

/// A collision-free placement with its grasp-independent scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPlacement {
    pub candidate: PlacementCandidate,
    pub inlier_fraction: f64,
    pub f_st: f64,
    /// Distance to the nearest other object, `None` without a heuristic or
    /// without other objects.
    pub clearance: Option<f64>,
    pub f_h: f64,
    /// Lowest point of the posed cloud.
    pub low_z: f64,
}

/// Placement stage output. Only the placement counters of `diagnostics`
/// and the placement timings are filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementScoring {
    pub placements: Vec<ScoredPlacement>,
    pub diagnostics: StageDiagnostics,
    pub timing: StageTiming,
}

/// Sample placements on the target, expand each to the six orientations,
/// drop colliding ones and score the rest. An empty result is not an error.
pub fn score_placements(target: &TargetRegion, object: &ObjectModel, params: &ReasoningParams) -> Result<PlacementScoring> {
    params.validate()?;
    let mut diag = StageDiagnostics::default();
    let mut timing = StageTiming::default();

    let clock = Instant::now();
    let index = SupportIndex::new(&target.support, params.max_support_tilt);
    let samples = sample_placement_poses(target, &index, object, params.n_placements, params.placement_seed())?;
    diag.placement_samples = samples.len();
    let candidates: Vec<PlacementCandidate> = samples.iter().flat_map(|s| s.orientations(object)).collect();
    diag.placement_candidates = candidates.len();
    let verdicts: Vec<Option<PlacementCollision>> = candidates
        .par_iter()
        .map(|c| placement_collision(object.hull(), c, target, params.placement_margin, params.support_allowance))
        .collect::<Result<_>>()?;
    let mut free = Vec::with_capacity(candidates.len());
    for (c, v) in candidates.iter().zip(&verdicts) {
        match v {
            None => free.push(*c),
            Some(PlacementCollision::Support) => diag.placements_hitting_support += 1,
            Some(PlacementCollision::Environment) => diag.placements_hitting_environment += 1,
            Some(PlacementCollision::OtherObject) => diag.placements_hitting_objects += 1,
        }
    }
    diag.placements_used = free.len();
    timing.placements = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let placements: Vec<ScoredPlacement> = free
        .par_iter()
        .map(|c| {
            let posed = object.cloud_at(&c.pose);
            let surface = index.patches()[c.patch].surface();
            let probe = StabilityProbe::new(&posed, surface.normal, &params.stability)?;
            let (inlier_fraction, f_st) = probe.score_with(surface.footprint.as_ref(), &params.stability);
            let (clearance, f_h) = match &params.heuristic {
                Some(h) => {
                    let d = nearest_object_clearance(&object.hull_at(&c.pose), target)?;
                    (d.is_finite().then_some(d), packing_heuristic(d, h))
                }
                None => (None, 1.0),
            };
            Ok(ScoredPlacement {
                candidate: *c,
                inlier_fraction,
                f_st,
                clearance,
                f_h,
                low_z: posed.min_z().expect("non-empty"),
            })
        })
        .collect::<Result<_>>()?;
    diag.placements_unstable = placements.iter().filter(|s| s.f_st == 0.0).count();
    diag.placements_rejected_by_heuristic = placements.iter().filter(|s| s.f_h == 0.0).count();
    timing.placeability = clock.elapsed().as_secs_f64();
    Ok(PlacementScoring {
        placements,
        diagnostics: diag,
        timing,
    })
}

struct PairScores {
    reachable: bool,
    collision_free: bool,
    altitude_clearance: f64,
    f_alt: f64,
    placeability: f64,
}

pub fn run_unified_reasoning(
    scene: &SceneDescription,
    grasps: &GraspSource,
    params: &ReasoningParams,
) -> Result<ReasoningReport> {
    run_unified_reasoning_with(scene, grasps, params, &params.workspace)
}

/// [`run_unified_reasoning`] with a custom reachability predicate.
pub fn run_unified_reasoning_with(
    scene: &SceneDescription,
    grasps: &GraspSource,
    params: &ReasoningParams,
    reach: &dyn Reachability,
) -> Result<ReasoningReport> {
    params.validate()?;
    let mut diag = StageDiagnostics::default();
    let mut timing = StageTiming::default();
    let object = &scene.object;
    let m_o = *object.observed_pose();
    let fail = |diag: &StageDiagnostics| Error::NoFeasiblePair(Box::new(diag.clone()));

    let clock = Instant::now();
    let acquired = match grasps {
        GraspSource::Provided(list) => {
            for g in list {
                GraspCandidate::new(g.pose, g.width, g.quality, &params.gripper)?;
            }
            list.clone()
        }
        GraspSource::Synthetic(antipodal) => sample_antipodal_grasps(
            object.world_cloud(),
            &params.gripper,
            params.n_grasps,
            params.grasp_seed(),
            antipodal,
        )?,
    };
    diag.grasps_acquired = acquired.len();
    let grasps: Vec<GraspCandidate> = match &scene.source {
        Some(source) => {
            let obstacles = source.obstacles();
            acquired
                .into_iter()
                .filter(|g| !posed_boxes_collide(&params.gripper.posed_boxes(g), &obstacles, params.gripper_margin))
                .collect()
        }
        None => acquired,
    };
    diag.grasps_colliding_at_source = diag.grasps_acquired - grasps.len();
    diag.grasps_used = grasps.len();
    timing.grasps = clock.elapsed().as_secs_f64();
    if grasps.is_empty() {
        return Err(fail(&diag));
    }

    let scored = score_placements(&scene.target, object, params)?;
    let d = &scored.diagnostics;
    diag.placement_samples = d.placement_samples;
    diag.placement_candidates = d.placement_candidates;
    diag.placements_hitting_support = d.placements_hitting_support;
    diag.placements_hitting_environment = d.placements_hitting_environment;
    diag.placements_hitting_objects = d.placements_hitting_objects;
    diag.placements_used = d.placements_used;
    diag.placements_unstable = d.placements_unstable;
    diag.placements_rejected_by_heuristic = d.placements_rejected_by_heuristic;
    timing.placements = scored.timing.placements;
    timing.placeability = scored.timing.placeability;
    if scored.placements.is_empty() {
        return Err(fail(&diag));
    }
    let per_placement = &scored.placements;

    let clock = Instant::now();
    let obstacles = scene.target.obstacles();
    let cols = per_placement.len();
    let pairs: Vec<PairScores> = (0..grasps.len() * cols)
        .into_par_iter()
        .map(|i| {
            let (g, s) = (&grasps[i / cols], &per_placement[i % cols]);
            let c = &s.candidate;
            let placed = transform_grasp(g, &m_o, &c.pose);
            let reachable = reach.accepts(&placed.pose);
            let collision_free =
                !posed_boxes_collide(&params.gripper.posed_boxes(&placed), &obstacles, params.gripper_margin);
            let altitude_clearance = placed.pose.translation().z - s.low_z;
            let f_alt = altitude_weight(altitude_clearance, &params.altitude);
            let f_pcg = pcg_score(g.quality, reachable, collision_free);
            PairScores {
                reachable,
                collision_free,
                altitude_clearance,
                f_alt,
                placeability: placeability_score(f_pcg, s.f_st, f_alt, s.f_h),
            }
        })
        .collect();
    diag.pairs_total = pairs.len();
    diag.pairs_unreachable = pairs.iter().filter(|p| !p.reachable).count();
    diag.pairs_colliding = pairs.iter().filter(|p| !p.collision_free).count();
    timing.collision = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let quality: Vec<f64> = grasps.iter().map(|g| g.quality).collect();
    let v_g = normalize_scores(&quality)?;
    let q_gp = Grid::from_vec(grasps.len(), cols, pairs.iter().map(|p| p.placeability).collect())?;
    let (v_p, _) = normalize_grid(&q_gp)?;
    let collision_free = Grid::from_vec(grasps.len(), cols, pairs.iter().map(|p| p.collision_free).collect())?;
    let unified = unified_scores(&v_g.values, &v_p, &collision_free, &params.weights)?;
    let ranked = match select_best_pair(&unified) {
        Ok(r) => r,
        Err(Error::NoFeasiblePair(_)) => return Err(fail(&diag)),
        Err(e) => return Err(e),
    };
    diag.pairs_feasible = ranked.len();
    timing.reasoning = clock.elapsed().as_secs_f64();

    let reports = ranked
        .iter()
        .take(params.top_k)
        .enumerate()
        .map(|(rank, r)| {
            let (g, s) = (&grasps[r.grasp], &per_placement[r.placement]);
            let c = &s.candidate;
            let pair = &pairs[r.grasp * cols + r.placement];
            RankedPairReport {
                rank,
                grasp_index: r.grasp,
                placement_index: r.placement,
                score: r.score,
                orientation: c.label,
                grasp: *g,
                placed_grasp: transform_grasp(g, &m_o, &c.pose),
                placement: *c,
                breakdown: ScoreBreakdown {
                    grasp_quality: g.quality,
                    reachable: pair.reachable,
                    collision_free: pair.collision_free,
                    f_pcg: pcg_score(g.quality, pair.reachable, pair.collision_free),
                    inlier_fraction: s.inlier_fraction,
                    f_st: s.f_st,
                    altitude_clearance: pair.altitude_clearance,
                    f_alt: pair.f_alt,
                    object_clearance: s.clearance,
                    f_h: s.f_h,
                    placeability: pair.placeability,
                    v_g: v_g.values[r.grasp],
                    v_p: v_p.get(r.grasp, r.placement),
                },
            }
        })
        .collect();

    Ok(ReasoningReport {
        pairs: reports,
        feasible_pairs: ranked.len(),
        diagnostics: diag,
        timing,
        params: *params,
    })
}

