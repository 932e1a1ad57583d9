//! Subcommands. Each returns the artifact text; `main` writes it out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{Point3, Vector2, Vector3};
use placeability::grasp::GraspCandidate;
use placeability::oracle::{edge_sweep, incline_sweep, ring_viewpoints, synthesize_partial_cloud, SyntheticObject};
use placeability::pipeline::{run_unified_reasoning, score_placements, GraspSource, ReasoningParams, SceneDescription};
use placeability::placement::{heuristic_map, PackingMode, SupportIndex};
use serde_json::{json, Value};

use crate::config::{describe_keys, RunConfig};
use crate::demo::{self, DEMO_NAMES};
use crate::error::{CliError, Result};
use crate::io::load_grasps;
use crate::report::{cell, render_json, to_value};
use crate::scene::{write_demo, SceneFile};

#[derive(Debug, Parser)]
#[command(name = "placeability", version, about = "Object-centric grasp and placement reasoning")]
pub struct Cli {
    /// Print errors as a JSON object on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write the artifact here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score collision-free placements of the object on the target.
    ScorePlacements {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Stability against overhang past a table edge (CSV).
    SweepEdge {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Stability against support inclination (CSV).
    SweepIncline {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Packing heuristic over a grid on the target support (CSV).
    HeuristicMap {
        #[arg(long)]
        scene: PathBuf,
        /// Overrides `heuristic.mode`.
        #[arg(long, value_parser = ["dense", "sparse"])]
        mode: Option<String>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Rank grasp-placement pairs for a scene (JSON).
    Unify {
        #[arg(long)]
        scene: PathBuf,
        /// Grasp file; overrides the scene's grasps.
        #[arg(long, conflicts_with = "synthetic_grasps")]
        grasps: Option<PathBuf>,
        /// Sample antipodal grasps from the object cloud.
        #[arg(long)]
        synthetic_grasps: bool,
        /// Include stage timings, which makes the output vary between runs.
        #[arg(long)]
        with_timing: bool,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Pipeline timing over `bench.grasp_counts` synthetic grasps (CSV).
    Bench {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Write a bundled demo scene.
    DemoScene {
        #[arg(long, value_parser = DEMO_NAMES)]
        name: Option<String>,
        /// Output directory; one subdirectory per scene.
        #[arg(long)]
        out: PathBuf,
    },
    /// List every config key with its default.
    ConfigKeys,
}

/// Artifact text and where it goes.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
    /// Progress or timing lines for stderr.
    pub notes: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        for pair in &self.overrides {
            config.set_pair(pair)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn output(&self, text: String, notes: Vec<String>) -> Output {
        Output {
            text,
            path: self.out.clone(),
            notes,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::ScorePlacements { scene, common } => {
            let config = common.load()?;
            Ok(common.output(score_placements_cmd(scene, &config)?, vec![]))
        }
        Command::SweepEdge { common } => Ok(common.output(sweep_cmd(&common.load()?, SweepMode::Edge)?, vec![])),
        Command::SweepIncline { common } => {
            Ok(common.output(sweep_cmd(&common.load()?, SweepMode::Incline)?, vec![]))
        }
        Command::HeuristicMap { scene, mode, common } => {
            let mut config = common.load()?;
            if let Some(m) = mode {
                config.set("heuristic.mode", m)?;
            }
            Ok(common.output(heuristic_map_cmd(scene, &config)?, vec![]))
        }
        Command::Unify {
            scene,
            grasps,
            synthetic_grasps,
            with_timing,
            common,
        } => {
            let config = common.load()?;
            let choice = match (grasps, synthetic_grasps) {
                (Some(p), _) => GraspChoice::File(p.clone()),
                (None, true) => GraspChoice::Synthetic,
                (None, false) => GraspChoice::SceneDefault,
            };
            let (text, notes) = unify_cmd(scene, &choice, &config, *with_timing)?;
            Ok(common.output(text, notes))
        }
        Command::Bench { scene, common } => Ok(common.output(bench_cmd(scene, &common.load()?)?, vec![])),
        Command::DemoScene { name, out } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => DEMO_NAMES.to_vec(),
            };
            let mut text = String::new();
            for n in names {
                let path = write_demo(&demo::build(n)?, &out.join(n))?;
                let _ = writeln!(text, "{}", path.display());
            }
            Ok(Output {
                text,
                path: None,
                notes: vec![],
            })
        }
        Command::ConfigKeys => Ok(Output {
            text: describe_keys(),
            path: None,
            notes: vec![],
        }),
    }
}

pub fn score_placements_cmd(scene_path: &Path, config: &RunConfig) -> Result<String> {
    let scene = SceneFile::load(scene_path)?;
    let params = config.reasoning()?;
    let scoring = score_placements(&scene.target()?, &scene.object()?, &params)?;
    let placements: Vec<Value> = scoring
        .placements
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(json!({
                "index": i,
                "orientation": s.candidate.label,
                "pose": to_value(&s.candidate.pose)?,
                "surface_point": to_value(&s.candidate.surface_point)?,
                "surface_normal": to_value(&s.candidate.surface_normal)?,
                "yaw": s.candidate.yaw,
                "patch": s.candidate.patch,
                "inlier_fraction": s.inlier_fraction,
                "f_st": s.f_st,
                "object_clearance": s.clearance,
                "f_h": s.f_h,
                "placement_score": s.f_st * s.f_h,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(render_json(
        "score-placements",
        config,
        vec![
            ("scene", json!(scene_path.display().to_string())),
            ("placements", Value::Array(placements)),
            ("diagnostics", to_value(&scoring.diagnostics)?),
        ],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Edge,
    Incline,
}

/// The synthetic object and its cloud described by the `sweep.*` keys.
pub fn sweep_subject(config: &RunConfig) -> Result<(SyntheticObject, placeability::geom::PointCloud)> {
    let size = Vector3::new(
        config.parse::<f64>("sweep.size_x")?,
        config.parse::<f64>("sweep.size_y")?,
        config.parse::<f64>("sweep.size_z")?,
    );
    if !size.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(CliError::Config("sweep.size_* must be > 0".into()));
    }
    let object = match config.get("sweep.object") {
        "box" => SyntheticObject::uniform_box(size),
        "offset_box" => {
            let f: f64 = config.parse("sweep.mass_offset")?;
            if !(0.0..0.5).contains(&f) {
                return Err(CliError::Config("sweep.mass_offset must lie in [0, 0.5)".into()));
            }
            SyntheticObject::offset_mass_box(size, f)
        }
        "cylinder" => SyntheticObject::cylinder(size.x / 2.0, size.z, 48),
        other => {
            return Err(CliError::Config(format!(
                "sweep.object = {other:?}, expected box, offset_box or cylinder"
            )))
        }
    };
    let seed = config.seed()?;
    let n: usize = config.parse("sweep.cloud_points")?;
    let views: usize = config.parse("sweep.views")?;
    let cloud = if views == 0 {
        object.dense_cloud(n, seed)
    } else {
        let center = Point3::new(0.0, 0.0, size.z / 2.0);
        let viewpoints = ring_viewpoints(center, 0.6, 0.4, views, 0.3 + seed as f64 * 0.37);
        synthesize_partial_cloud(&object.mesh, &viewpoints, config.parse("sweep.view_noise")?, n, seed)?.cloud
    };
    Ok((object, cloud))
}

pub fn sweep_cmd(config: &RunConfig, mode: SweepMode) -> Result<String> {
    let (object, cloud) = sweep_subject(config)?;
    let params = config.stability()?;
    let result = match mode {
        SweepMode::Edge => {
            let deg: f64 = config.parse("sweep.direction_deg")?;
            let dir = Vector2::new(deg.to_radians().cos(), deg.to_radians().sin());
            edge_sweep(&object, &cloud, config.parse("sweep.steps")?, dir, &params)?
        }
        SweepMode::Incline => {
            let max: f64 = config.parse("sweep.incline_max_deg")?;
            let step: f64 = config.parse("sweep.incline_step_deg")?;
            if !(step > 0.0 && max > 0.0 && max < 90.0) {
                return Err(CliError::Config(
                    "sweep.incline_step_deg must be > 0 and sweep.incline_max_deg in (0, 90)".into(),
                ));
            }
            let count = (max / step).floor() as usize;
            let angles: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
            incline_sweep(&object, &cloud, &angles, &params)?
        }
    };
    Ok(format!("{}{}", config.to_csv_comment(), result.to_csv()))
}

pub fn heuristic_map_cmd(scene_path: &Path, config: &RunConfig) -> Result<String> {
    let params = config.reasoning()?;
    let heuristic = config
        .heuristic()?
        .ok_or_else(|| CliError::Config("heuristic-map needs heuristic.mode dense or sparse".into()))?;
    let scene = SceneFile::load(scene_path)?;
    let target = scene.target()?;
    let index = SupportIndex::new(&target.support, params.max_support_tilt);
    let samples = heuristic_map(&target, &index, &scene.object()?, &heuristic, config.parse("heuristic.map_step")?)?;
    let mut out = config.to_csv_comment();
    let mode = match heuristic.mode {
        PackingMode::Dense => "dense",
        PackingMode::Sparse => "sparse",
    };
    let _ = writeln!(out, "# mode = {mode}");
    out.push_str("patch,x,y,z,clearance,f_h\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.patch,
            cell(s.position.x),
            cell(s.position.y),
            cell(s.position.z),
            if s.clearance.is_finite() { cell(s.clearance) } else { "inf".into() },
            cell(s.value)
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraspChoice {
    File(PathBuf),
    Synthetic,
    /// The scene's `grasps` entry, else synthetic.
    SceneDefault,
}

fn grasp_source(scene: &SceneFile, choice: &GraspChoice, config: &RunConfig) -> Result<(GraspSource, Value)> {
    let gripper = config.gripper()?;
    let from_file = |p: &Path| -> Result<(GraspSource, Value)> {
        let grasps: Vec<GraspCandidate> = load_grasps(p, &gripper)?;
        Ok((GraspSource::Provided(grasps), json!({"file": p.display().to_string()})))
    };
    match (choice, &scene.grasps) {
        (GraspChoice::File(p), _) => from_file(p),
        (GraspChoice::SceneDefault, Some(p)) => from_file(p),
        _ => Ok((GraspSource::Synthetic(config.antipodal()?), json!("synthetic"))),
    }
}

pub fn unify_cmd(
    scene_path: &Path,
    choice: &GraspChoice,
    config: &RunConfig,
    with_timing: bool,
) -> Result<(String, Vec<String>)> {
    let params = config.reasoning()?;
    let clock = Instant::now();
    let scene_file = SceneFile::load(scene_path)?;
    let scene = scene_file.description()?;
    let (source, source_echo) = grasp_source(&scene_file, choice, config)?;
    let ingestion = clock.elapsed().as_secs_f64();
    let mut report = run_unified_reasoning(&scene, &source, &params)?;
    report.timing.ingestion = ingestion;
    let t = report.timing;
    let notes = vec![format!(
        "timing: ingestion {:.4}s, grasps {:.4}s, placements {:.4}s, placeability {:.4}s, collision {:.4}s, \
         reasoning {:.4}s, total {:.4}s",
        t.ingestion,
        t.grasps,
        t.placements,
        t.placeability,
        t.collision,
        t.reasoning,
        t.total()
    )];
    let mut fields = vec![
        ("scene", json!(scene_path.display().to_string())),
        ("grasp_source", source_echo),
        ("feasible_pairs", json!(report.feasible_pairs)),
        ("diagnostics", to_value(&report.diagnostics)?),
        ("pairs", to_value(&report.pairs)?),
    ];
    if with_timing {
        fields.push(("timing", to_value(&report.timing)?));
    }
    Ok((render_json("unify", config, fields), notes))
}

/// One pipeline run per grasp count.
pub fn bench_rows(
    scene: &SceneDescription,
    params: &ReasoningParams,
    counts: &[usize],
    source: &GraspSource,
) -> Result<Vec<BenchRow>> {
    counts
        .iter()
        .map(|&n| {
            let p = ReasoningParams { n_grasps: n, ..*params };
            let report = run_unified_reasoning(scene, source, &p)?;
            Ok(BenchRow {
                grasps_requested: n,
                grasps_used: report.diagnostics.grasps_used,
                placements_used: report.diagnostics.placements_used,
                pairs: report.diagnostics.pairs_total,
                timing: report.timing,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    pub grasps_requested: usize,
    pub grasps_used: usize,
    pub placements_used: usize,
    pub pairs: usize,
    pub timing: placeability::pipeline::StageTiming,
}

pub fn bench_cmd(scene_path: &Path, config: &RunConfig) -> Result<String> {
    let params = config.reasoning()?;
    let clock = Instant::now();
    let scene = SceneFile::load(scene_path)?.description()?;
    let ingestion = clock.elapsed().as_secs_f64();
    let source = GraspSource::Synthetic(config.antipodal()?);
    let rows = bench_rows(&scene, &params, &config.bench_counts()?, &source)?;
    let mut out = config.to_csv_comment();
    let _ = writeln!(out, "# ingestion_s = {}", cell(ingestion));
    out.push_str(
        "grasps_requested,grasps_used,placements_used,pairs,grasps_s,placements_s,placeability_s,collision_s,reasoning_s,total_s\n",
    );
    for r in rows {
        let t = r.timing;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.grasps_requested,
            r.grasps_used,
            r.placements_used,
            r.pairs,
            cell(t.grasps),
            cell(t.placements),
            cell(t.placeability),
            cell(t.collision),
            cell(t.reasoning),
            cell(t.total())
        );
    }
    Ok(out)
}
