//! Flat `key = value` run configuration. Unknown keys are rejected, missing
//! keys take the documented defaults, and the effective table is echoed into
//! every artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use placeability::grasp::{AntipodalParams, GripperModel, WorkspaceBox};
use placeability::pipeline::ReasoningParams;
use placeability::placement::{PackingHeuristicParams, PackingMode};
use placeability::scoring::{AltitudeParams, UnifiedWeights};
use placeability::stability::StabilityParams;

use crate::error::{CliError, Result};
use crate::io::read_text;

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("seed", "0", "seed for grasp sampling (seed) and placement sampling (seed + 1)"),
    ("stability.steepness", "12", "logistic steepness k"),
    ("stability.center", "0.75", "logistic center c, in (0.5, 1)"),
    ("stability.contact_band", "0.003", "contact band above the lowest point, m"),
    ("stability.samples", "2000", "center-of-mass hypotheses per placement"),
    ("stability.sigma_scale", "0.08", "hypothesis spread as a fraction of each ellipsoid semi-axis"),
    ("stability.vertical_radius_fraction", "0.25", "vertical semi-axis as a fraction of the lateral extent"),
    ("stability.seed", "0", "seed for center-of-mass hypotheses"),
    ("altitude.z_start", "0.01", "clearance where the altitude weight starts rising, m"),
    ("altitude.z_end", "0.05", "clearance where it saturates, m"),
    ("altitude.steepness", "200", "logistic steepness, 1/m"),
    ("altitude.w_min", "0.1", "weight at zero clearance"),
    ("altitude.w_max", "1", "weight at full clearance"),
    ("heuristic.mode", "none", "packing heuristic: none, dense or sparse"),
    ("heuristic.tau", "0.05", "closeness threshold, m"),
    ("heuristic.decay", "40", "decay rate, 1/m"),
    ("heuristic.margin", "0.005", "clearance below which a placement is rejected, m"),
    ("heuristic.map_step", "0.02", "grid spacing for heuristic-map, m"),
    ("weights.grasp", "1", "grasp weight in the unified score"),
    ("weights.place", "1", "placement weight in the unified score"),
    ("gripper.palm_x", "0.09", "palm extent along the closing axis, m"),
    ("gripper.palm_y", "0.09", "palm extent across the closing axis, m"),
    ("gripper.palm_z", "0.05", "palm extent along the approach axis, m"),
    ("gripper.finger_x", "0.02", "finger thickness along the closing axis, m"),
    ("gripper.finger_y", "0.01", "finger width, m"),
    ("gripper.finger_z", "0.06", "finger length, m"),
    ("gripper.max_opening", "0.085", "widest grasp, m"),
    ("collision.gripper_margin", "0.002", "gripper-vs-scene margin, m"),
    ("collision.placement_margin", "0.002", "object-vs-environment margin, m"),
    ("collision.support_allowance", "0.002", "object-vs-support penetration allowance, m"),
    ("placement.count", "100", "surface samples, each expanded to six orientations"),
    ("placement.max_tilt_deg", "30", "steepest support face that receives placements, degrees"),
    ("grasp.count", "100", "synthetic grasps when no grasp file is given"),
    ("grasp.ray_tolerance", "0.002", "antipodal ray tolerance, m"),
    ("grasp.min_width", "0.005", "narrowest synthetic grasp, m"),
    ("grasp.penetration_tolerance", "0.002", "cloud points allowed inside the gripper, m"),
    ("grasp.attempts", "20", "sampling attempts per requested grasp"),
    ("reach.min_x", "-1", "reachable workspace box, m"),
    ("reach.min_y", "-1", "reachable workspace box, m"),
    ("reach.min_z", "-0.5", "reachable workspace box, m"),
    ("reach.max_x", "1", "reachable workspace box, m"),
    ("reach.max_y", "1", "reachable workspace box, m"),
    ("reach.max_z", "1.5", "reachable workspace box, m"),
    ("report.top_k", "10", "ranked pairs kept in the unify report"),
    ("sweep.object", "box", "synthetic object: box, offset_box or cylinder"),
    ("sweep.size_x", "0.1", "box extent along x, or cylinder diameter, m"),
    ("sweep.size_y", "0.1", "box extent along y, m"),
    ("sweep.size_z", "0.2", "object height, m"),
    ("sweep.mass_offset", "0.25", "offset_box: center-of-mass shift along +x as a fraction of size_x"),
    ("sweep.cloud_points", "3000", "points in the synthetic cloud"),
    ("sweep.views", "0", "viewpoints for a partial cloud; 0 samples the full surface"),
    ("sweep.view_noise", "0.001", "range noise of partial clouds, m"),
    ("sweep.steps", "101", "edge sweep: overhang steps from 0 to 1"),
    ("sweep.direction_deg", "0", "edge sweep: direction of the table edge normal in the xy plane, degrees"),
    ("sweep.incline_max_deg", "60", "incline sweep: largest angle, degrees"),
    ("sweep.incline_step_deg", "0.5", "incline sweep: angle step, degrees"),
    ("bench.grasp_counts", "100,250,500", "synthetic grasp counts timed by bench"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| ((*k).to_string(), (*v).to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::default();
        config.merge_text(path, &read_text(path)?)?;
        Ok(config)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, path: &Path, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::parse(path, i + 1, format!("expected key = value, got {content:?}")))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::parse(path, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key {key:?}"))),
        }
    }

    /// `key=value` override as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got {pair:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("key listed in KEYS")
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("{key} = {raw:?} is not a valid value")))
    }

    fn finite(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("{key} must be finite")));
        }
        Ok(v)
    }

    fn vec3(&self, prefix: &str, suffixes: [&str; 3]) -> Result<Vector3<f64>> {
        Ok(Vector3::new(
            self.finite(&format!("{prefix}{}", suffixes[0]))?,
            self.finite(&format!("{prefix}{}", suffixes[1]))?,
            self.finite(&format!("{prefix}{}", suffixes[2]))?,
        ))
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The effective table in loadable form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// The effective table as CSV comment lines.
    pub fn to_csv_comment(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    pub fn seed(&self) -> Result<u64> {
        self.parse("seed")
    }

    pub fn stability(&self) -> Result<StabilityParams> {
        let p = StabilityParams {
            steepness: self.finite("stability.steepness")?,
            center: self.finite("stability.center")?,
            contact_band: self.finite("stability.contact_band")?,
            samples: self.parse("stability.samples")?,
            sigma_scale: self.finite("stability.sigma_scale")?,
            vertical_radius_fraction: self.finite("stability.vertical_radius_fraction")?,
            seed: self.parse("stability.seed")?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn heuristic(&self) -> Result<Option<PackingHeuristicParams>> {
        let mode = match self.get("heuristic.mode") {
            "none" => return Ok(None),
            "dense" => PackingMode::Dense,
            "sparse" => PackingMode::Sparse,
            other => {
                return Err(CliError::Config(format!(
                    "heuristic.mode = {other:?}, expected none, dense or sparse"
                )))
            }
        };
        let p = PackingHeuristicParams {
            tau: self.finite("heuristic.tau")?,
            decay: self.finite("heuristic.decay")?,
            margin: self.finite("heuristic.margin")?,
            mode,
        };
        p.validate()?;
        Ok(Some(p))
    }

    pub fn gripper(&self) -> Result<GripperModel> {
        let g = GripperModel {
            palm: self.vec3("gripper.palm_", ["x", "y", "z"])?,
            finger: self.vec3("gripper.finger_", ["x", "y", "z"])?,
            max_opening: self.finite("gripper.max_opening")?,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn antipodal(&self) -> Result<AntipodalParams> {
        Ok(AntipodalParams {
            ray_tolerance: self.finite("grasp.ray_tolerance")?,
            min_width: self.finite("grasp.min_width")?,
            penetration_tolerance: self.finite("grasp.penetration_tolerance")?,
            attempts_per_grasp: self.parse("grasp.attempts")?,
        })
    }

    pub fn reasoning(&self) -> Result<ReasoningParams> {
        let min = self.vec3("reach.min_", ["x", "y", "z"])?;
        let max = self.vec3("reach.max_", ["x", "y", "z"])?;
        if (0..3).any(|i| min[i] > max[i]) {
            return Err(CliError::Config("reach.min_* must not exceed reach.max_*".into()));
        }
        let p = ReasoningParams {
            stability: self.stability()?,
            altitude: AltitudeParams {
                z_start: self.finite("altitude.z_start")?,
                z_end: self.finite("altitude.z_end")?,
                steepness: self.finite("altitude.steepness")?,
                w_min: self.finite("altitude.w_min")?,
                w_max: self.finite("altitude.w_max")?,
            },
            heuristic: self.heuristic()?,
            weights: UnifiedWeights {
                grasp: self.finite("weights.grasp")?,
                place: self.finite("weights.place")?,
            },
            gripper: self.gripper()?,
            workspace: WorkspaceBox {
                min: Point3::from(min),
                max: Point3::from(max),
            },
            gripper_margin: self.finite("collision.gripper_margin")?,
            placement_margin: self.finite("collision.placement_margin")?,
            support_allowance: self.finite("collision.support_allowance")?,
            max_support_tilt: self.finite("placement.max_tilt_deg")?.to_radians(),
            n_grasps: self.parse("grasp.count")?,
            n_placements: self.parse("placement.count")?,
            seed: self.seed()?,
            top_k: self.parse("report.top_k")?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bench_counts(&self) -> Result<Vec<usize>> {
        let raw = self.get("bench.grasp_counts");
        let counts = raw
            .split(',')
            .map(|t| t.trim().parse::<usize>().ok().filter(|&n| n > 0))
            .collect::<Option<Vec<_>>>()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CliError::Config(format!("bench.grasp_counts = {raw:?}, expected positive integers")))?;
        Ok(counts)
    }

    /// Checks every typed accessor so bad values fail before any work.
    pub fn validate(&self) -> Result<()> {
        self.reasoning()?;
        self.antipodal()?;
        self.bench_counts()?;
        let _: f64 = self.finite("heuristic.map_step")?;
        Ok(())
    }
}

/// Key reference for `config-keys`.
pub fn describe_keys() -> String {
    let mut out = String::new();
    for (k, v, doc) in KEYS {
        let _ = writeln!(out, "{k} = {v}  # {doc}");
    }
    out
}
