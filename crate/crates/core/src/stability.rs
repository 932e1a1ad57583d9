//! Point-cloud stability: support polygon from the lowest contacts, an
//! ellipsoidal Gaussian of center-of-mass hypotheses fitted to the cloud, and
//! a logistic score of the fraction of hypotheses that project inside the
//! support polygon.
//!
//! The score is normalized so that an inlier fraction of 0.5 maps to 0 and
//! 1.0 maps to 1; values below 0.5 are clamped to 0.

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, point_in_polygon, PointCloud, Polygon2D, RigidPose};

/// Minimum cloud size for an ellipsoid fit.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    /// Logistic steepness `k > 0`.
    pub steepness: f64,
    /// Logistic center `c ∈ (0.5, 1)`.
    pub center: f64,
    /// Contact band above the lowest point along the support normal, meters.
    pub contact_band: f64,
    /// Number of CoM hypotheses.
    pub samples: usize,
    /// Per-axis standard deviation as a fraction of the ellipsoid semi-axis.
    pub sigma_scale: f64,
    /// Radius for the vertical extent, as a fraction of the mean lateral extent.
    pub vertical_radius_fraction: f64,
    pub seed: u64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            steepness: 12.0,
            center: 0.75,
            contact_band: 0.003,
            samples: 2000,
            sigma_scale: 0.08,
            vertical_radius_fraction: 0.25,
            seed: 0,
        }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return Err(Error::param("stability steepness must be > 0"));
        }
        if !(self.center > 0.5 && self.center < 1.0) {
            return Err(Error::param("stability center must lie in (0.5, 1.0)"));
        }
        if !(self.contact_band > 0.0) {
            return Err(Error::param("contact band must be > 0"));
        }
        if self.samples < 100 {
            return Err(Error::param("stability needs at least 100 CoM samples"));
        }
        if !(self.sigma_scale > 0.0) {
            return Err(Error::param("sigma scale must be > 0"));
        }
        if !(self.vertical_radius_fraction > 0.0) {
            return Err(Error::param("vertical radius fraction must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidFit {
    pub mean: Point3<f64>,
    pub semi_axes: Vector3<f64>,
    /// Columns are the ellipsoid axes in the frame the cloud was given in.
    pub frame: Matrix3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComHypothesisSet {
    samples: Vec<Point3<f64>>,
    seed: u64,
}

impl ComHypothesisSet {
    pub fn new(samples: Vec<Point3<f64>>, seed: u64) -> Self {
        Self { samples, seed }
    }

    pub fn samples(&self) -> &[Point3<f64>] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    fn transformed(&self, rotation: &Matrix3<f64>) -> Self {
        Self {
            samples: self.samples.iter().map(|p| Point3::from(rotation * p.coords)).collect(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityResult {
    /// `None` marks degenerate support (fewer than 3 non-collinear contacts,
    /// or nothing left after clipping to the supporting surface).
    pub support_polygon: Option<Polygon2D>,
    pub com_samples: ComHypothesisSet,
    pub contact_count: usize,
    pub inlier_fraction: f64,
    pub score: f64,
}

/// The surface an object rests on: its upward normal and, optionally, the
/// region of the horizontal plane it covers (e.g. a table top with an edge).
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSurface {
    pub normal: Vector3<f64>,
    pub footprint: Option<Polygon2D>,
}

impl Default for SupportSurface {
    fn default() -> Self {
        Self::flat()
    }
}

impl SupportSurface {
    pub fn flat() -> Self {
        Self {
            normal: Vector3::z(),
            footprint: None,
        }
    }

    pub fn new(normal: Vector3<f64>, footprint: Option<Polygon2D>) -> Self {
        Self {
            normal: normal.normalize(),
            footprint,
        }
    }

    /// Rotation from the support frame (z along the normal) to the world.
    fn frame(&self) -> Matrix3<f64> {
        if self.normal == Vector3::z() {
            Matrix3::identity()
        } else {
            *RigidPose::align_z_to(&self.normal).rotation()
        }
    }
}

/// Points within `band` of the lowest `z`.
pub fn extract_support_contacts(cloud: &PointCloud, band: f64) -> Result<Vec<Point3<f64>>> {
    let z_min = cloud
        .min_z()
        .ok_or(Error::EmptyGeometry("support contacts need a non-empty cloud"))?;
    Ok(cloud
        .points()
        .iter()
        .filter(|p| p.z - z_min <= band)
        .copied()
        .collect())
}

/// Convex hull of the contacts' xy projections.
pub fn support_polygon(contacts: &[Point3<f64>]) -> Result<Polygon2D> {
    let projected: Vec<Point2<f64>> = contacts.iter().map(|p| p.xy()).collect();
    convex_hull_2d(&projected).map_err(|_| Error::DegenerateSupport {
        count: contacts.len(),
    })
}

/// Mean of the points; lateral semi-axes from the bounding extents, vertical
/// semi-axis from the points near the vertical line through the mean.
pub fn fit_com_ellipsoid(cloud: &PointCloud, vertical_radius_fraction: f64) -> Result<EllipsoidFit> {
    let pts = cloud.points();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            got: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let mean = cloud.centroid().expect("non-empty");
    let (lo, hi) = cloud.bounds().expect("non-empty");
    let extent = hi - lo;
    let radius = vertical_radius_fraction * 0.5 * (extent.x + extent.y);

    let (mut z_lo, mut z_hi, mut near) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for p in pts {
        if (p.xy() - mean.xy()).norm() <= radius {
            z_lo = z_lo.min(p.z);
            z_hi = z_hi.max(p.z);
            near += 1;
        }
    }
    if near < 2 {
        z_lo = lo.z;
        z_hi = hi.z;
    }
    let semi_axes = Vector3::new(extent.x / 2.0, extent.y / 2.0, (z_hi - z_lo) / 2.0);
    if !semi_axes.iter().all(|&s| s > 0.0) {
        return Err(Error::DegenerateEllipsoid([semi_axes.x, semi_axes.y, semi_axes.z]));
    }
    Ok(EllipsoidFit {
        mean,
        semi_axes,
        frame: Matrix3::identity(),
    })
}

/// Gaussian CoM hypotheses with per-axis `σ = sigma_scale · semi_axis`.
pub fn sample_com_hypotheses(fit: &EllipsoidFit, n: usize, seed: u64, sigma_scale: f64) -> ComHypothesisSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = fit.semi_axes * sigma_scale;
    let samples = (0..n)
        .map(|_| {
            let z = Vector3::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            fit.mean + fit.frame * sigma.component_mul(&z)
        })
        .collect();
    ComHypothesisSet::new(samples, seed)
}

/// Fraction of hypotheses whose vertical projection lies in the polygon.
pub fn inlier_fraction(samples: &ComHypothesisSet, polygon: &Polygon2D) -> f64 {
    if samples.count() == 0 {
        return 0.0;
    }
    let inside = samples
        .samples()
        .iter()
        .filter(|p| point_in_polygon(&p.xy(), polygon))
        .count();
    inside as f64 / samples.count() as f64
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Normalized logistic of the inlier fraction, clamped to `[0, 1]`.
pub fn stability_score(p_in: f64, params: &StabilityParams) -> f64 {
    let (k, c) = (params.steepness, params.center);
    let floor = logistic(k * (0.5 - c));
    let top = logistic(k * (1.0 - c));
    let value = (logistic(k * (p_in - c)) - floor) / (top - floor);
    value.clamp(0.0, 1.0)
}

/// Stability of `object` placed at `pose` on a flat, unbounded support.
pub fn evaluate_placement_stability(
    object: &PointCloud,
    pose: &RigidPose,
    params: &StabilityParams,
) -> Result<StabilityResult> {
    evaluate_on_support(&object.transformed(pose), &SupportSurface::flat(), params)
}

/// Stability of an already-posed cloud resting on `support`.
pub fn evaluate_on_support(
    posed: &PointCloud,
    support: &SupportSurface,
    params: &StabilityParams,
) -> Result<StabilityResult> {
    let probe = StabilityProbe::new(posed, support.normal, params)?;
    Ok(probe.evaluate(support.footprint.as_ref(), params))
}

/// Stability quantities that do not depend on the supporting surface's
/// footprint, so that sweeps can re-clip without re-sampling.
#[derive(Debug, Clone)]
pub struct StabilityProbe {
    contact_polygon: Option<Polygon2D>,
    contact_count: usize,
    samples: ComHypothesisSet,
}

impl StabilityProbe {
    pub fn new(posed: &PointCloud, normal: Vector3<f64>, params: &StabilityParams) -> Result<Self> {
        if posed.is_empty() {
            return Err(Error::EmptyGeometry("stability needs a non-empty cloud"));
        }
        let support = SupportSurface::new(normal, None);
        let frame = support.frame();
        let local = if frame == Matrix3::identity() {
            posed.clone()
        } else {
            PointCloud::new(posed.points().iter().map(|p| Point3::from(frame.transpose() * p.coords)).collect())?
        };
        let contacts = extract_support_contacts(&local, params.contact_band)?;
        let world_contacts: Vec<Point3<f64>> = contacts.iter().map(|c| Point3::from(frame * c.coords)).collect();
        let contact_polygon = support_polygon(&world_contacts).ok();

        let fit = fit_com_ellipsoid(&local, params.vertical_radius_fraction)?;
        let samples = sample_com_hypotheses(&fit, params.samples, params.seed, params.sigma_scale).transformed(&frame);
        Ok(Self {
            contact_polygon,
            contact_count: contacts.len(),
            samples,
        })
    }

    pub fn contact_polygon(&self) -> Option<&Polygon2D> {
        self.contact_polygon.as_ref()
    }

    pub fn evaluate(&self, footprint: Option<&Polygon2D>, params: &StabilityParams) -> StabilityResult {
        let polygon = match (&self.contact_polygon, footprint) {
            (Some(p), Some(f)) => p.intersection(f),
            (p, None) => p.clone(),
            (None, Some(_)) => None,
        };
        let inlier = polygon.as_ref().map_or(0.0, |p| inlier_fraction(&self.samples, p));
        let score = if polygon.is_some() {
            stability_score(inlier, params)
        } else {
            0.0
        };
        StabilityResult {
            support_polygon: polygon,
            com_samples: self.samples.clone(),
            contact_count: self.contact_count,
            inlier_fraction: inlier,
            score,
        }
    }

    /// `(p_in, f_st)` against a footprint without cloning the samples.
    pub fn score_with(&self, footprint: Option<&Polygon2D>, params: &StabilityParams) -> (f64, f64) {
        let polygon = match (&self.contact_polygon, footprint) {
            (Some(p), Some(f)) => p.intersection(f),
            (p, None) => p.clone(),
            (None, Some(_)) => None,
        };
        match polygon {
            Some(p) => {
                let inlier = inlier_fraction(&self.samples, &p);
                (inlier, stability_score(inlier, params))
            }
            None => (0.0, 0.0),
        }
    }
}
