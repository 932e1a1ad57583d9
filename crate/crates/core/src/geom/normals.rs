use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::PointCloud;
use crate::error::{Error, Result};

/// PCA normals from the `k` nearest neighbours, flipped to point away from
/// the cloud centroid. Suited to the convex-ish object clouds used here.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { got: pts.len(), need: 3 });
    }
    let k = k.clamp(3, pts.len());
    let centroid = cloud.centroid().expect("non-empty");
    let normals: Vec<Vector3<f64>> = pts
        .par_iter()
        .map(|p| {
            let mut nearest: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .map(|(j, q)| ((q - p).norm_squared(), j))
                .collect();
            nearest.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
            let neigh = &nearest[..k];
            let mean = neigh.iter().fold(Vector3::zeros(), |acc, &(_, j)| acc + pts[j].coords) / k as f64;
            let cov = neigh.iter().fold(Matrix3::zeros(), |acc, &(_, j)| {
                let d = pts[j].coords - mean;
                acc + d * d.transpose()
            });
            let eig = cov.symmetric_eigen();
            let n = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
            let mut n = if n.norm() > 0.0 { n.normalize() } else { Vector3::z() };
            if n.dot(&(p - centroid)) < 0.0 {
                n = -n;
            }
            n
        })
        .collect();
    PointCloud::with_normals(pts.to_vec(), normals)
}
