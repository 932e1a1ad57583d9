//! Placement-conditioned graspability, altitude clearance, the combined
//! placeability score, normalization, the grasp × placement collision matrix,
//! the unified score and descending pair selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, RigidPose, TriMesh};
use crate::grasp::{posed_boxes_collide, transform_grasp, GraspCandidate, GripperModel};
use crate::placement::PlacementCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeParams {
    pub z_start: f64,
    pub z_end: f64,
    pub steepness: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for AltitudeParams {
    fn default() -> Self {
        Self {
            z_start: 0.01,
            z_end: 0.05,
            steepness: 200.0,
            w_min: 0.1,
            w_max: 1.0,
        }
    }
}

impl AltitudeParams {
    pub fn z_mid(&self) -> f64 {
        0.5 * (self.z_start + self.z_end)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_start < self.z_end) {
            return Err(Error::param("altitude z_start must be below z_end"));
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return Err(Error::param("altitude steepness must be > 0"));
        }
        if !(0.0 <= self.w_min && self.w_min <= self.w_max && self.w_max <= 1.0) {
            return Err(Error::param("altitude weights need 0 <= w_min <= w_max <= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedWeights {
    pub grasp: f64,
    pub place: f64,
}

impl Default for UnifiedWeights {
    fn default() -> Self {
        Self { grasp: 1.0, place: 1.0 }
    }
}

impl UnifiedWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.grasp > 0.0 && self.place > 0.0 && self.grasp.is_finite() && self.place.is_finite()) {
            return Err(Error::param("unified weights must be > 0"));
        }
        Ok(())
    }
}

pub fn pcg_score(quality: f64, reachable: bool, collision_free: bool) -> f64 {
    quality * f64::from(u8::from(reachable)) * f64::from(u8::from(collision_free))
}

/// Height of the grasp center above the lowest point of the posed cloud.
pub fn grasp_clearance(grasp: &GraspCandidate, posed: &PointCloud) -> Result<f64> {
    let low = posed
        .min_z()
        .ok_or(Error::EmptyGeometry("grasp clearance needs a non-empty cloud"))?;
    Ok(grasp.pose.translation().z - low)
}

pub fn altitude_weight(dz: f64, params: &AltitudeParams) -> f64 {
    params.w_min + (params.w_max - params.w_min) / (1.0 + (-params.steepness * (dz - params.z_mid())).exp())
}

/// Product of the four factors; pass `f_h = 1` when no heuristic applies.
pub fn placeability_score(f_pcg: f64, f_st: f64, f_alt: f64, f_h: f64) -> f64 {
    f_pcg * f_st * f_alt * f_h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// Indices by descending value, ties by lower index.
    pub order: Vec<usize>,
    pub all_zero: bool,
}

/// Divide by the maximum. An all-zero input stays zero and is flagged.
pub fn normalize_scores(values: &[f64]) -> Result<Normalized> {
    if values.is_empty() {
        return Err(Error::param("cannot normalize an empty score vector"));
    }
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::param(format!("scores must be finite and >= 0, got {bad}")));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let all_zero = max == 0.0;
    let normalized: Vec<f64> = if all_zero {
        vec![0.0; values.len()]
    } else {
        values.iter().map(|v| v / max).collect()
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| normalized[b].total_cmp(&normalized[a]).then(a.cmp(&b)));
    Ok(Normalized {
        values: normalized,
        order,
        all_zero,
    })
}

/// Row-major grasps × placements grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..rows * cols).map(|i| f(i / cols.max(1), i % cols.max(1))).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// `true` where the grasp stays collision-free at the placement.
pub type CollisionMatrix = Grid<bool>;

/// Normalize a whole grid by its global maximum.
pub fn normalize_grid(grid: &Grid<f64>) -> Result<(Grid<f64>, bool)> {
    let n = normalize_values(grid.as_slice())?;
    Ok((Grid::from_vec(grid.rows, grid.cols, n.0)?, n.1))
}

fn normalize_values(values: &[f64]) -> Result<(Vec<f64>, bool)> {
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::param(format!("scores must be finite and >= 0, got {bad}")));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok((vec![0.0; values.len()], true));
    }
    Ok((values.iter().map(|v| v / max).collect(), false))
}

/// Entry `[k][p]` is `false` iff grasp `k`, carried from `m_o` to placement
/// `p`, brings the gripper within `margin` of `env`.
pub fn collision_matrix(
    grasps: &[GraspCandidate],
    placements: &[PlacementCandidate],
    m_o: &RigidPose,
    env: &TriMesh,
    gripper: &GripperModel,
    margin: f64,
) -> Result<CollisionMatrix> {
    if grasps.is_empty() || placements.is_empty() {
        return Err(Error::param("collision matrix needs grasps and placements"));
    }
    if !(margin >= 0.0) {
        return Err(Error::param(format!("collision margin must be >= 0, got {margin}")));
    }
    if env.is_empty() {
        return Err(Error::EmptyGeometry("gripper collision needs a non-empty environment"));
    }
    let cols = placements.len();
    let data: Vec<bool> = (0..grasps.len() * cols)
        .into_par_iter()
        .map(|i| {
            let g = transform_grasp(&grasps[i / cols], m_o, &placements[i % cols].pose);
            !posed_boxes_collide(&gripper.posed_boxes(&g), env, margin)
        })
        .collect();
    Grid::from_vec(grasps.len(), cols, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedScoreMatrix {
    pub values: Grid<f64>,
    pub v_g: Vec<f64>,
    pub v_p: Grid<f64>,
    /// Grasps by descending `v_g`.
    pub grasp_order: Vec<usize>,
    /// Placements by descending best `v_p` over grasps.
    pub placement_order: Vec<usize>,
}

/// `v_gp[k][p] = ω_g·v_g[k] · ω_p·v_p[k][p] · C[k][p]`, entry by entry.
pub fn unified_scores(
    v_g: &[f64],
    v_p: &Grid<f64>,
    collision_free: &CollisionMatrix,
    weights: &UnifiedWeights,
) -> Result<UnifiedScoreMatrix> {
    weights.validate()?;
    if v_p.rows() != v_g.len() || collision_free.shape() != v_p.shape() {
        return Err(Error::Shape {
            expected: format!("v_g of {0}, v_p and C of {0}x{1}", v_p.rows(), v_p.cols()),
            got: format!(
                "v_g of {}, v_p {}x{}, C {}x{}",
                v_g.len(),
                v_p.rows(),
                v_p.cols(),
                collision_free.rows(),
                collision_free.cols()
            ),
        });
    }
    let cols = v_p.cols();
    let mut data = vec![0.0; v_g.len() * cols];
    if cols > 0 {
        data.par_chunks_mut(cols).enumerate().for_each(|(k, row)| {
            let g = weights.grasp * v_g[k];
            for (p, out) in row.iter_mut().enumerate() {
                let c = if collision_free.get(k, p) { 1.0 } else { 0.0 };
                *out = g * (weights.place * v_p.get(k, p)) * c;
            }
        });
    }
    let mut grasp_order: Vec<usize> = (0..v_g.len()).collect();
    grasp_order.sort_by(|&a, &b| v_g[b].total_cmp(&v_g[a]).then(a.cmp(&b)));
    let mut best = vec![0.0f64; cols];
    for row in v_p.as_slice().chunks(cols.max(1)) {
        for (b, v) in best.iter_mut().zip(row) {
            *b = b.max(*v);
        }
    }
    let mut placement_order: Vec<usize> = (0..cols).collect();
    placement_order.sort_by(|&a, &b| best[b].total_cmp(&best[a]).then(a.cmp(&b)));
    Ok(UnifiedScoreMatrix {
        values: Grid::from_vec(v_g.len(), cols, data)?,
        v_g: v_g.to_vec(),
        v_p: v_p.clone(),
        grasp_order,
        placement_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedPair {
    pub grasp: usize,
    pub placement: usize,
    pub score: f64,
}

/// Positive entries in descending order, ties by lower grasp then lower
/// placement index.
pub fn select_best_pair(m: &UnifiedScoreMatrix) -> Result<Vec<RankedPair>> {
    let cols = m.values.cols();
    let values = m.values.as_slice();
    // non-negative doubles order like their bit patterns, so the complement
    // sorts descending; the key keeps the high value bits above the index
    let index_bits = u64::BITS - (values.len() as u64).leading_zeros();
    let index_mask = (1u64 << index_bits) - 1;
    let mut keys: Vec<u64> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (!v.to_bits() & !index_mask) | i as u64)
        .collect();
    if keys.is_empty() {
        return Err(Error::NoFeasiblePair(Box::default()));
    }
    keys.sort_unstable();
    // entries whose values differ only in the dropped bits share a prefix
    let mut start = 0;
    while start < keys.len() {
        let prefix = keys[start] & !index_mask;
        let mut end = start + 1;
        while end < keys.len() && keys[end] & !index_mask == prefix {
            end += 1;
        }
        if end - start > 1 {
            keys[start..end].sort_unstable_by(|a, b| {
                let (ia, ib) = ((a & index_mask) as usize, (b & index_mask) as usize);
                values[ib].total_cmp(&values[ia]).then(ia.cmp(&ib))
            });
        }
        start = end;
    }
    Ok(keys
        .into_iter()
        .map(|key| {
            let i = (key & index_mask) as usize;
            RankedPair {
                grasp: i / cols,
                placement: i % cols,
                score: values[i],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn component_products() {
        assert_eq!(pcg_score(0.8, true, true), 0.8);
        assert_eq!(pcg_score(0.8, false, true), 0.0);
        assert_eq!(pcg_score(0.8, true, false), 0.0);
        assert_eq!(placeability_score(0.8, 1.0, 1.0, 1.0), 0.8);
        assert_relative_eq!(placeability_score(0.8, 0.9, 0.5, 0.7), 0.252, epsilon = 1e-15);
        assert_eq!(placeability_score(0.8, 0.0, 0.5, 0.7), 0.0);
    }

    #[test]
    fn altitude_logistic() {
        let p = AltitudeParams::default();
        assert_relative_eq!(altitude_weight(p.z_mid(), &p), 0.55, epsilon = 1e-15);
        assert!((altitude_weight(p.z_end + 10.0 / p.steepness, &p) - p.w_max).abs() < 1e-3);
        assert!(altitude_weight(0.02, &p) < altitude_weight(0.021, &p));
        let cloud = PointCloud::new(vec![nalgebra::Point3::new(0.0, 0.0, 0.02)]).unwrap();
        let g = GraspCandidate {
            pose: RigidPose::from_translation(nalgebra::Vector3::new(0.0, 0.0, 0.1)),
            width: 0.04,
            quality: 1.0,
        };
        assert_relative_eq!(grasp_clearance(&g, &cloud).unwrap(), 0.08, epsilon = 1e-15);
    }

    #[test]
    fn normalization() {
        let n = normalize_scores(&[0.2, 0.4, 0.8]).unwrap();
        assert_eq!(n.values, vec![0.25, 0.5, 1.0]);
        assert_eq!(n.order, vec![2, 1, 0]);
        assert!(!n.all_zero);
        let z = normalize_scores(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z.values, vec![0.0; 3]);
        assert!(z.all_zero);
        assert!(normalize_scores(&[]).is_err());
    }

    fn hand_example() -> UnifiedScoreMatrix {
        let v_p = Grid::from_vec(2, 2, vec![1.0, 0.2, 0.4, 1.0]).unwrap();
        let c = Grid::from_vec(2, 2, vec![true; 4]).unwrap();
        unified_scores(&[1.0, 0.5], &v_p, &c, &UnifiedWeights::default()).unwrap()
    }

    #[test]
    fn entrywise_unified_score_and_order() {
        let m = hand_example();
        assert_eq!(m.values.as_slice(), &[1.0, 0.2, 0.2, 0.5]);
        let order: Vec<_> = select_best_pair(&m).unwrap().iter().map(|r| (r.grasp, r.placement)).collect();
        assert_eq!(order, vec![(0, 0), (1, 1), (0, 1), (1, 0)]);
    }

    #[test]
    fn collisions_and_shapes() {
        let v_p = Grid::from_vec(2, 2, vec![1.0, 0.2, 0.4, 1.0]).unwrap();
        let c = Grid::from_vec(2, 2, vec![false, true, true, true]).unwrap();
        let m = unified_scores(&[1.0, 0.5], &v_p, &c, &UnifiedWeights::default()).unwrap();
        assert_eq!(m.values.get(0, 0), 0.0);
        let bad = Grid::from_vec(1, 2, vec![true; 2]).unwrap();
        assert!(matches!(
            unified_scores(&[1.0, 0.5], &v_p, &bad, &UnifiedWeights::default()),
            Err(Error::Shape { .. })
        ));
        let zero = Grid::from_vec(2, 2, vec![false; 4]).unwrap();
        let m = unified_scores(&[1.0, 0.5], &v_p, &zero, &UnifiedWeights::default()).unwrap();
        assert!(matches!(select_best_pair(&m), Err(Error::NoFeasiblePair(_))));
    }

    #[test]
    fn ties_break_by_index() {
        let v_p = Grid::from_vec(2, 3, vec![0.5, 0.0, 0.5, 0.5, 0.5, 0.0]).unwrap();
        let c = Grid::from_vec(2, 3, vec![true; 6]).unwrap();
        let m = unified_scores(&[1.0, 1.0], &v_p, &c, &UnifiedWeights::default()).unwrap();
        let order: Vec<_> = select_best_pair(&m).unwrap().iter().map(|r| (r.grasp, r.placement)).collect();
        assert_eq!(order, vec![(0, 0), (0, 2), (1, 0), (1, 1)]);
    }

    #[test]
    fn last_bit_differences_still_rank() {
        let up = |x: f64| f64::from_bits(x.to_bits() + 1);
        let vals = vec![0.5, up(0.5), 0.5, up(up(0.5)), 0.25, up(0.5)];
        let v_p = Grid::from_vec(2, 3, vals).unwrap();
        let c = Grid::from_vec(2, 3, vec![true; 6]).unwrap();
        let m = unified_scores(&[1.0, 1.0], &v_p, &c, &UnifiedWeights::default()).unwrap();
        let order: Vec<_> = select_best_pair(&m).unwrap().iter().map(|r| (r.grasp, r.placement)).collect();
        assert_eq!(order, vec![(1, 0), (0, 1), (1, 2), (0, 0), (0, 2), (1, 1)]);
    }
}
