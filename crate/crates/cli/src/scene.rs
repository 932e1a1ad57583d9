//! Scene files: `key = value` lines naming the geometry files, relative to
//! the scene file.
//!
//! ```text
//! object = object.ply
//! source.support = source_table.obj
//! target.support = shelf_board.obj
//! target.environment = shelf_frame.obj
//! target.objects = box_a.obj, can.obj
//! grasps = grasps_top.txt
//! ```

use std::path::{Path, PathBuf};

use placeability::geom::TriMesh;
use placeability::object::ObjectModel;
use placeability::pipeline::SceneDescription;
use placeability::placement::TargetRegion;

use crate::demo::DemoScene;
use crate::error::{CliError, Result};
use crate::io::{grasps_string, load_mesh, load_point_cloud, obj_string, ply_string, read_text, write_text};

const SCENE_KEYS: [&str; 7] = [
    "object",
    "source.support",
    "source.environment",
    "target.support",
    "target.environment",
    "target.objects",
    "grasps",
];

/// Paths named by a scene file, already resolved against its directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SceneFile {
    pub object: PathBuf,
    pub source_support: Option<PathBuf>,
    pub source_environment: Option<PathBuf>,
    pub target_support: PathBuf,
    pub target_environment: Option<PathBuf>,
    pub target_objects: Vec<PathBuf>,
    pub grasps: Option<PathBuf>,
}

impl SceneFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let mut out = Self::default();
        let (mut has_object, mut has_support) = (false, false);
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let content = line.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::parse(path, no, format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(CliError::parse(path, no, format!("{key} has no value")));
            }
            let file = base.join(value);
            match key {
                "object" => {
                    out.object = file;
                    has_object = true;
                }
                "source.support" => out.source_support = Some(file),
                "source.environment" => out.source_environment = Some(file),
                "target.support" => {
                    out.target_support = file;
                    has_support = true;
                }
                "target.environment" => out.target_environment = Some(file),
                "target.objects" => {
                    out.target_objects = value.split(',').map(|v| base.join(v.trim())).collect();
                }
                "grasps" => out.grasps = Some(file),
                other => {
                    return Err(CliError::parse(
                        path,
                        no,
                        format!("unknown scene key {other:?}, expected one of {SCENE_KEYS:?}"),
                    ))
                }
            }
        }
        if !has_object || !has_support {
            return Err(CliError::parse(path, text.lines().count(), "scene needs object and target.support"));
        }
        Ok(out)
    }

    pub fn target(&self) -> Result<TargetRegion> {
        let others = self.target_objects.iter().map(|p| load_mesh(p)).collect::<Result<Vec<_>>>()?;
        Ok(TargetRegion::new(
            load_mesh(&self.target_support)?,
            optional_mesh(self.target_environment.as_deref())?,
            others,
        )?)
    }

    pub fn source(&self) -> Result<Option<TargetRegion>> {
        match &self.source_support {
            Some(p) => Ok(Some(TargetRegion::new(
                load_mesh(p)?,
                optional_mesh(self.source_environment.as_deref())?,
                vec![],
            )?)),
            None => Ok(None),
        }
    }

    pub fn object(&self) -> Result<ObjectModel> {
        Ok(ObjectModel::from_observation(load_point_cloud(&self.object)?)?)
    }

    pub fn description(&self) -> Result<SceneDescription> {
        Ok(SceneDescription {
            source: self.source()?,
            target: self.target()?,
            object: self.object()?,
        })
    }
}

fn optional_mesh(path: Option<&Path>) -> Result<TriMesh> {
    path.map_or_else(|| Ok(TriMesh::empty()), load_mesh)
}

/// Files written for a demo scene, as (relative path, contents).
pub fn demo_files(scene: &DemoScene) -> Vec<(String, String)> {
    let mut files = vec![
        ("object.ply".to_string(), ply_string(&scene.object_cloud)),
        ("source_support.obj".to_string(), obj_string(&scene.source_support)),
        ("target_support.obj".to_string(), obj_string(&scene.target_support)),
    ];
    let mut text = String::from("object = object.ply\nsource.support = source_support.obj\ntarget.support = target_support.obj\n");
    if !scene.target_environment.is_empty() {
        files.push(("target_environment.obj".into(), obj_string(&scene.target_environment)));
        text.push_str("target.environment = target_environment.obj\n");
    }
    if !scene.target_objects.is_empty() {
        let names: Vec<String> = (0..scene.target_objects.len()).map(|i| format!("target_object_{i}.obj")).collect();
        for (name, mesh) in names.iter().zip(&scene.target_objects) {
            files.push((name.clone(), obj_string(mesh)));
        }
        text.push_str(&format!("target.objects = {}\n", names.join(", ")));
    }
    if let Some((name, _)) = scene.grasps.first() {
        text.push_str(&format!("grasps = {name}\n"));
    }
    for (name, grasps) in &scene.grasps {
        files.push(((*name).to_string(), grasps_string(grasps)));
    }
    if !scene.config.is_empty() {
        files.push(("config.txt".into(), scene.config.to_string()));
    }
    files.push(("scene.txt".into(), text));
    files
}

/// Writes the demo files under `dir` and returns the scene file path.
pub fn write_demo(scene: &DemoScene, dir: &Path) -> Result<PathBuf> {
    for (name, text) in demo_files(scene) {
        write_text(&dir.join(name), &text)?;
    }
    Ok(dir.join("scene.txt"))
}
