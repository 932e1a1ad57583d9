use nalgebra::Point3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, TriMesh};

/// Offset along the normal before casting a visibility ray, meters.
const RAY_LIFT: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct PartialCloud {
    pub cloud: PointCloud,
    /// Fraction of the surface area seen by at least one viewpoint.
    pub coverage: f64,
}

/// Simulated multi-view observation of `mesh`: `samples` area-uniform
/// surface points, kept when some viewpoint sees them (front-facing and not
/// occluded by another face), then displaced along the normal by Gaussian
/// noise of standard deviation `noise_sigma`.
pub fn synthesize_partial_cloud(
    mesh: &TriMesh,
    viewpoints: &[Point3<f64>],
    noise_sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<PartialCloud> {
    if viewpoints.is_empty() {
        return Err(Error::param("at least one viewpoint is required"));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::param("noise sigma must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let surface = mesh.sample_surface(samples, &mut rng)?;
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::param(e.to_string()))?;

    let mut points = Vec::new();
    let mut normals = Vec::new();
    for s in &surface {
        let seen = viewpoints.iter().any(|v| {
            s.normal.dot(&(v - s.point)) > 0.0
                && !mesh.segment_hits(&(s.point + s.normal * RAY_LIFT), v, Some(s.face))
        });
        if seen {
            let offset = if noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            points.push(s.point + s.normal * offset);
            normals.push(s.normal);
        }
    }
    let coverage = points.len() as f64 / surface.len().max(1) as f64;
    Ok(PartialCloud {
        cloud: PointCloud::with_normals(points, normals)?,
        coverage,
    })
}

/// `count` viewpoints evenly spaced in azimuth on a ring of `radius` at
/// `height`, starting at `azimuth0` radians, around `center`.
pub fn ring_viewpoints(center: Point3<f64>, radius: f64, height: f64, count: usize, azimuth0: f64) -> Vec<Point3<f64>> {
    (0..count)
        .map(|i| {
            let a = azimuth0 + std::f64::consts::TAU * i as f64 / count as f64;
            center + nalgebra::Vector3::new(radius * a.cos(), radius * a.sin(), height)
        })
        .collect()
}
