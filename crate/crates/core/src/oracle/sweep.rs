use std::fmt::Write as _;

use nalgebra::{Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{quasi_static_stable, SyntheticObject};
use crate::error::{Error, Result};
use crate::geom::{PointCloud, Polygon2D, RigidPose};
use crate::stability::{StabilityParams, StabilityProbe};

/// Half-width of the table top used for edge sweeps, meters.
const TABLE_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKind {
    /// Fraction of the footprint extent past the table edge.
    Overhang,
    /// Support inclination in degrees.
    InclineDegrees,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub abscissa: Vec<f64>,
    pub scores: Vec<f64>,
    pub inlier_fractions: Vec<f64>,
    pub oracle_stable: Vec<bool>,
    pub estimated_threshold: f64,
    pub oracle_threshold: f64,
}

impl SweepResult {
    pub fn threshold_error(&self) -> f64 {
        (self.estimated_threshold - self.oracle_threshold).abs()
    }

    /// Header, one row per abscissa value, then a comment footer with both
    /// thresholds. Numbers carry 9 significant digits.
    pub fn to_csv(&self) -> String {
        let name = match self.kind {
            SweepKind::Overhang => "overhang_fraction",
            SweepKind::InclineDegrees => "incline_deg",
        };
        let mut out = format!("{name},score,inlier_fraction,oracle_stable\n");
        for i in 0..self.abscissa.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig9(self.abscissa[i]),
                sig9(self.scores[i]),
                sig9(self.inlier_fractions[i]),
                u8::from(self.oracle_stable[i])
            );
        }
        let _ = writeln!(
            out,
            "# estimated_threshold={},oracle_threshold={}",
            sig9(self.estimated_threshold),
            sig9(self.oracle_threshold)
        );
        out
    }
}

/// Nine significant digits, scientific notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.8e}")
}

/// Linear interpolation of the first downward 0.5-crossing. A curve that
/// starts below 0.5 yields the first abscissa; one that never drops below
/// 0.5 yields the last.
pub fn first_half_crossing(abscissa: &[f64], scores: &[f64]) -> f64 {
    if scores[0] < 0.5 {
        return abscissa[0];
    }
    for i in 0..scores.len() - 1 {
        let (s0, s1) = (scores[i], scores[i + 1]);
        if s0 >= 0.5 && s1 < 0.5 {
            let t = (s0 - 0.5) / (s0 - s1);
            return abscissa[i] + t * (abscissa[i + 1] - abscissa[i]);
        }
    }
    *abscissa.last().expect("non-empty")
}

fn table_edge(direction: &Vector2<f64>, offset: f64) -> Polygon2D {
    let w = TABLE_HALF_WIDTH;
    Polygon2D::rectangle(Point2::new(-w, -w), Point2::new(w, w))
        .expect("table is a square")
        .clip_half_plane(direction, offset)
        .unwrap_or_else(|| panic!("edge offset {offset} leaves no table"))
}

/// Footprint extent `(lo, hi)` along a unit direction.
fn extent_along(poly: &Polygon2D, direction: &Vector2<f64>) -> (f64, f64) {
    poly.vertices().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let s = v.coords.dot(direction);
        (lo.min(s), hi.max(s))
    })
}

/// Overhang sweep toward a table edge whose outward normal is `direction`.
/// `cloud` is the object's observation in its resting frame.
pub fn edge_sweep(
    obj: &SyntheticObject,
    cloud: &PointCloud,
    steps: usize,
    direction: Vector2<f64>,
    params: &StabilityParams,
) -> Result<SweepResult> {
    if steps < 10 {
        return Err(Error::param("edge sweep needs at least 10 steps"));
    }
    let direction = direction.normalize();
    let footprint = obj.footprint();
    let (lo, hi) = extent_along(&footprint, &direction);
    let edge_at = |f: f64| hi - f * (hi - lo);

    let probe = StabilityProbe::new(cloud, Vector3::z(), params)?;
    let mut abscissa = Vec::with_capacity(steps);
    let mut scores = Vec::with_capacity(steps);
    let mut inliers = Vec::with_capacity(steps);
    let mut oracle = Vec::with_capacity(steps);
    for i in 0..steps {
        let f = i as f64 / (steps - 1) as f64;
        let table = table_edge(&direction, edge_at(f));
        let (p_in, score) = probe.score_with(Some(&table), params);
        abscissa.push(f);
        scores.push(score);
        inliers.push(p_in);
        oracle.push(oracle_edge_stable(obj, &footprint, &table));
    }

    // bisection on the oracle's stable/unstable boundary
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if oracle_edge_stable(obj, &footprint, &table_edge(&direction, edge_at(m))) {
            a = m;
        } else {
            b = m;
        }
    }

    Ok(SweepResult {
        kind: SweepKind::Overhang,
        estimated_threshold: first_half_crossing(&abscissa, &scores),
        abscissa,
        scores,
        inlier_fractions: inliers,
        oracle_stable: oracle,
        oracle_threshold: 0.5 * (a + b),
    })
}

fn oracle_edge_stable(obj: &SyntheticObject, footprint: &Polygon2D, table: &Polygon2D) -> bool {
    footprint
        .intersection(table)
        .is_some_and(|support| quasi_static_stable(obj, &RigidPose::identity(), &support))
}

/// Analytic tipping angle (degrees) when the support tilts so that +x
/// runs downhill.
pub fn analytic_tipping_angle_deg(obj: &SyntheticObject) -> f64 {
    ((obj.footprint_half_extents.x - obj.center_of_mass.x) / obj.com_height())
        .atan()
        .to_degrees()
}

/// Stability versus support inclination. The object rests on a plane tilted
/// about the y axis so that +x runs downhill.
pub fn incline_sweep(
    obj: &SyntheticObject,
    cloud: &PointCloud,
    angles_deg: &[f64],
    params: &StabilityParams,
) -> Result<SweepResult> {
    if angles_deg.len() < 2 {
        return Err(Error::param("incline sweep needs at least two angles"));
    }
    if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("incline angles must be strictly increasing"));
    }
    if angles_deg.iter().any(|a| !(0.0..=60.0).contains(a)) {
        return Err(Error::param("incline angles must lie in [0, 60] degrees"));
    }
    let footprint = obj.footprint();
    let mut scores = Vec::with_capacity(angles_deg.len());
    let mut inliers = Vec::with_capacity(angles_deg.len());
    let mut oracle = Vec::with_capacity(angles_deg.len());
    for &deg in angles_deg {
        let tilt = RigidPose::rot_y(deg.to_radians());
        let posed = cloud.transformed(&tilt);
        let normal = tilt.transform_vector(&Vector3::z());
        let probe = StabilityProbe::new(&posed, normal, params)?;
        let (p_in, score) = probe.score_with(None, params);
        scores.push(score);
        inliers.push(p_in);

        let projected: Vec<Point2<f64>> = footprint
            .vertices()
            .iter()
            .map(|v| tilt.transform_point(&nalgebra::Point3::new(v.x, v.y, 0.0)).xy())
            .collect();
        let support = crate::geom::convex_hull_2d(&projected)?;
        oracle.push(quasi_static_stable(obj, &tilt, &support));
    }
    Ok(SweepResult {
        kind: SweepKind::InclineDegrees,
        abscissa: angles_deg.to_vec(),
        estimated_threshold: first_half_crossing(angles_deg, &scores),
        scores,
        inlier_fractions: inliers,
        oracle_stable: oracle,
        oracle_threshold: analytic_tipping_angle_deg(obj),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolation() {
        let x = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(first_half_crossing(&x, &[1.0, 0.8, 0.2, 0.0]), 1.5);
        assert_eq!(first_half_crossing(&x, &[0.4, 0.8, 0.2, 0.0]), 0.0);
        assert_eq!(first_half_crossing(&x, &[1.0, 0.9, 0.8, 0.7]), 3.0);
        assert_eq!(first_half_crossing(&x, &[1.0, 0.5, 0.5, 0.0]), 2.0);
    }

    #[test]
    fn csv_layout() {
        let r = SweepResult {
            kind: SweepKind::Overhang,
            abscissa: vec![0.0, 1.0],
            scores: vec![1.0, 0.0],
            inlier_fractions: vec![1.0, 0.0],
            oracle_stable: vec![true, false],
            estimated_threshold: 0.5,
            oracle_threshold: 0.5,
        };
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "overhang_fraction,score,inlier_fraction,oracle_stable");
        assert_eq!(lines[1], "0,1.00000000e0,1.00000000e0,1");
        assert_eq!(lines[3], "# estimated_threshold=5.00000000e-1,oracle_threshold=5.00000000e-1");
    }

    #[test]
    fn oracle_thresholds_are_analytic() {
        let params = StabilityParams::default();
        let b = SyntheticObject::offset_mass_box(Vector3::new(0.2, 0.1, 0.1), 0.25);
        let cloud = b.dense_cloud(2000, 1);
        let toward_heavy = edge_sweep(&b, &cloud, 11, Vector2::x(), &params).unwrap();
        let away = edge_sweep(&b, &cloud, 11, -Vector2::x(), &params).unwrap();
        assert!((toward_heavy.oracle_threshold - 0.25).abs() < 1e-7, "{}", toward_heavy.oracle_threshold);
        assert!((away.oracle_threshold - 0.75).abs() < 1e-7, "{}", away.oracle_threshold);
        let cube = SyntheticObject::uniform_box(Vector3::new(0.1, 0.1, 0.1));
        assert!((analytic_tipping_angle_deg(&cube) - 45.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_preconditions() {
        let b = SyntheticObject::uniform_box(Vector3::new(0.1, 0.1, 0.1));
        let cloud = b.dense_cloud(500, 1);
        let p = StabilityParams::default();
        assert!(edge_sweep(&b, &cloud, 9, Vector2::x(), &p).is_err());
        assert!(incline_sweep(&b, &cloud, &[0.0, 10.0, 5.0], &p).is_err());
        assert!(incline_sweep(&b, &cloud, &[0.0, 70.0], &p).is_err());
    }
}
