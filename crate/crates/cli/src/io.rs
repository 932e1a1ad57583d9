//! Point clouds (ASCII PLY, XYZ), meshes (OBJ) and grasp files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use placeability::geom::{PointCloud, RigidPose, TriMesh};
use placeability::grasp::{GraspCandidate, GripperModel};

use crate::error::{CliError, Result};

/// Orthonormality tolerance for rotations read from grasp files.
pub const POSE_TOLERANCE: f64 = 1e-6;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn number(path: &Path, line: usize, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| CliError::parse(path, line, format!("not a number: {token:?}")))?;
    if !v.is_finite() {
        return Err(CliError::parse(path, line, format!("non-finite value {token:?}")));
    }
    Ok(v)
}

fn unit_normal(path: &Path, line: usize, v: [f64; 3]) -> Result<Vector3<f64>> {
    Vector3::from(v)
        .try_normalize(1e-12)
        .ok_or_else(|| CliError::parse(path, line, "zero-length normal"))
}

fn is_blank(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Loads `.ply` files as ASCII PLY and anything else as whitespace-separated
/// XYZ with optional normals (3 or 6 numbers per line).
pub fn load_point_cloud(path: &Path) -> Result<PointCloud> {
    let text = read_text(path)?;
    let is_ply = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    let (points, normals) = if is_ply { parse_ply(path, &text)? } else { parse_xyz(path, &text)? };
    if points.is_empty() {
        return Err(placeability::Error::EmptyGeometry("point cloud file has no points").into());
    }
    let cloud = match normals {
        Some(n) => PointCloud::with_normals(points, n)?,
        None => PointCloud::new(points)?,
    };
    Ok(cloud)
}

type Columns = (Vec<Point3<f64>>, Option<Vec<Vector3<f64>>>);

fn parse_xyz(path: &Path, text: &str) -> Result<Columns> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !is_blank(l)) {
        let no = i + 1;
        let values = line
            .split_whitespace()
            .map(|t| number(path, no, t))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 3 && values.len() != 6 {
            return Err(CliError::parse(path, no, format!("expected 3 or 6 numbers, got {}", values.len())));
        }
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(CliError::parse(path, no, "inconsistent column count"));
        }
        points.push(Point3::new(values[0], values[1], values[2]));
        if values.len() == 6 {
            normals.push(unit_normal(path, no, [values[3], values[4], values[5]])?);
        }
    }
    Ok((points, (width == Some(6)).then_some(normals)))
}

fn parse_ply(path: &Path, text: &str) -> Result<Columns> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(CliError::parse(path, 1, "missing 'ply' magic")),
    }
    let mut vertex_count = None;
    let mut properties: Vec<String> = Vec::new();
    let mut skip_before = 0usize;
    let mut current = "";
    let mut header_done = false;
    for (no, line) in lines.by_ref() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(CliError::parse(path, no, format!("unsupported PLY format {other:?}")));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let n: usize = count
                    .parse()
                    .map_err(|_| CliError::parse(path, no, format!("bad element count {count:?}")))?;
                if *name == "vertex" {
                    vertex_count = Some(n);
                } else if vertex_count.is_none() {
                    skip_before += n;
                }
                current = if *name == "vertex" { "vertex" } else { "" };
            }
            ["property", "list", ..] => {}
            ["property", _, name] => {
                if current == "vertex" {
                    properties.push((*name).to_string());
                }
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(CliError::parse(path, no, format!("unexpected header line {line:?}"))),
        }
    }
    if !header_done {
        return Err(CliError::parse(path, text.lines().count(), "missing end_header"));
    }
    let count = vertex_count.ok_or_else(|| CliError::parse(path, 1, "no vertex element"))?;
    let column = |name: &str| properties.iter().position(|p| p == name);
    let xyz = match (column("x"), column("y"), column("z")) {
        (Some(x), Some(y), Some(z)) => [x, y, z],
        _ => return Err(CliError::parse(path, 1, "vertex element lacks x, y, z")),
    };
    let nxyz = match (column("nx"), column("ny"), column("nz")) {
        (Some(x), Some(y), Some(z)) => Some([x, y, z]),
        _ => None,
    };
    let mut rows = lines.filter(|(_, l)| !l.is_empty()).skip(skip_before);
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(if nxyz.is_some() { count } else { 0 });
    for _ in 0..count {
        let (no, line) = rows
            .next()
            .ok_or_else(|| CliError::parse(path, text.lines().count(), "fewer vertex rows than declared"))?;
        let values = line
            .split_whitespace()
            .map(|t| number(path, no, t))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != properties.len() {
            return Err(CliError::parse(
                path,
                no,
                format!("expected {} values, got {}", properties.len(), values.len()),
            ));
        }
        points.push(Point3::new(values[xyz[0]], values[xyz[1]], values[xyz[2]]));
        if let Some(n) = nxyz {
            normals.push(unit_normal(path, no, [values[n[0]], values[n[1]], values[n[2]]])?);
        }
    }
    Ok((points, nxyz.map(|_| normals)))
}

pub fn ply_string(cloud: &PointCloud) -> String {
    let normals = cloud.normals();
    let mut out = format!("ply\nformat ascii 1.0\nelement vertex {}\n", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if normals.is_some() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    out.push_str("end_header\n");
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x, p.y, p.z);
        if let Some(n) = normals {
            let _ = write!(out, " {} {} {}", n[i].x, n[i].y, n[i].z);
        }
        out.push('\n');
    }
    out
}

pub fn xyz_string(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x, p.y, p.z);
        if let Some(n) = cloud.normals() {
            let _ = write!(out, " {} {} {}", n[i].x, n[i].y, n[i].z);
        }
        out.push('\n');
    }
    out
}

/// ASCII OBJ: `v` and `f` records, 1-based or negative indices, `a/b/c`
/// vertex references, polygons fan-split. Other records are ignored.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    parse_obj(path, &read_text(path)?)
}

fn parse_obj(path: &Path, text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let values = tokens.map(|t| number(path, no, t)).collect::<Result<Vec<_>>>()?;
                if values.len() != 3 && values.len() != 4 {
                    return Err(CliError::parse(path, no, "vertex needs 3 coordinates"));
                }
                vertices.push(Point3::new(values[0], values[1], values[2]));
            }
            Some("f") => {
                let idx = tokens
                    .map(|t| obj_index(path, no, t, vertices.len()))
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() < 3 {
                    return Err(CliError::parse(path, no, "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(vertices, faces)?)
}

fn obj_index(path: &Path, line: usize, token: &str, count: usize) -> Result<usize> {
    let head = token.split('/').next().unwrap_or_default();
    let raw: i64 = head
        .parse()
        .map_err(|_| CliError::parse(path, line, format!("bad face index {token:?}")))?;
    let resolved = match raw {
        r if r > 0 => r - 1,
        r if r < 0 => count as i64 + r,
        _ => -1,
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(CliError::parse(
            path,
            line,
            format!("face index {raw} out of range for {count} vertices"),
        ));
    }
    Ok(resolved as usize)
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

/// One grasp per line: row-major rotation (9), translation (3), width,
/// quality. The gripper frame closes along x and approaches along −z.
pub fn load_grasps(path: &Path, gripper: &GripperModel) -> Result<Vec<GraspCandidate>> {
    parse_grasps(path, &read_text(path)?, gripper)
}

fn parse_grasps(path: &Path, text: &str, gripper: &GripperModel) -> Result<Vec<GraspCandidate>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let content = line.split('#').next().unwrap_or_default();
        if content.trim().is_empty() {
            continue;
        }
        let values = content
            .split_whitespace()
            .map(|t| number(path, no, t))
            .collect::<Result<Vec<_>>>()?;
        let Ok(values) = <[f64; 14]>::try_from(values.as_slice()) else {
            return Err(CliError::parse(path, no, format!("expected 14 numbers, got {}", values.len())));
        };
        let pose_values: [f64; 12] = values[..12].try_into().expect("12 of 14");
        let pose = RigidPose::from_row_major(&pose_values, POSE_TOLERANCE)
            .map_err(|e| CliError::parse(path, no, e.to_string()))?;
        let grasp = GraspCandidate::new(pose, values[12], values[13], gripper)
            .map_err(|e| CliError::parse(path, no, e.to_string()))?;
        out.push(grasp);
    }
    if out.is_empty() {
        return Err(placeability::Error::EmptyGeometry("grasp file has no grasps").into());
    }
    Ok(out)
}

pub fn grasps_string(grasps: &[GraspCandidate]) -> String {
    let mut out = String::from("# r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz width quality\n");
    for g in grasps {
        let row: Vec<String> = g
            .pose
            .to_row_major()
            .iter()
            .chain([g.width, g.quality].iter())
            .map(|v| v.to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
