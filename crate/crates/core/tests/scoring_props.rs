use placeability::placement::{packing_heuristic, PackingHeuristicParams, PackingMode};
use placeability::scoring::{
    altitude_weight, normalize_grid, normalize_scores, select_best_pair, unified_scores, AltitudeParams, Grid,
    UnifiedWeights,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    q_g: Vec<f64>,
    q_gp: Grid<f64>,
    free: Grid<bool>,
    weights: UnifiedWeights,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=50, 1usize..=50).prop_flat_map(|(g, p)| {
        (
            prop::collection::vec(0.0..1.0f64, g),
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], g * p),
            prop::collection::vec(prop::bool::weighted(0.7), g * p),
            0.05..5.0f64,
            0.05..5.0f64,
        )
            .prop_map(move |(q_g, q_gp, free, wg, wp)| Instance {
                q_g,
                q_gp: Grid::from_vec(g, p, q_gp).unwrap(),
                free: Grid::from_vec(g, p, free).unwrap(),
                weights: UnifiedWeights { grasp: wg, place: wp },
            })
    })
}

/// Straight triple loop over grasps, placements and the three factors.
#[allow(clippy::needless_range_loop)]
fn naive(v_g: &[f64], v_p: &Grid<f64>, free: &Grid<bool>, w: &UnifiedWeights) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..v_g.len() {
        for p in 0..v_p.cols() {
            let mut terms = [w.grasp * v_g[k], w.place * v_p.get(k, p), 0.0];
            terms[2] = if free.get(k, p) { 1.0 } else { 0.0 };
            let mut acc = terms[0];
            for t in &terms[1..] {
                acc *= t;
            }
            out.push(acc);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn batch_matches_naive_bit_for_bit(inst in instance()) {
        let v_g = normalize_scores(&inst.q_g).unwrap().values;
        let (v_p, _) = normalize_grid(&inst.q_gp).unwrap();
        let m = unified_scores(&v_g, &v_p, &inst.free, &inst.weights).unwrap();
        let expect = naive(&v_g, &v_p, &inst.free, &inst.weights);
        prop_assert_eq!(m.values.as_slice().len(), expect.len());
        for (a, b) in m.values.as_slice().iter().zip(&expect) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn weights_do_not_move_the_argmax(inst in instance()) {
        let v_g = normalize_scores(&inst.q_g).unwrap().values;
        let (v_p, _) = normalize_grid(&inst.q_gp).unwrap();
        let unit = unified_scores(&v_g, &v_p, &inst.free, &UnifiedWeights::default()).unwrap();
        let weighted = unified_scores(&v_g, &v_p, &inst.free, &inst.weights).unwrap();
        match (select_best_pair(&unit), select_best_pair(&weighted)) {
            (Ok(a), Ok(b)) => {
                let best = unit.values.get(a[0].grasp, a[0].placement);
                let picked = unit.values.get(b[0].grasp, b[0].placement);
                prop_assert!((best - picked).abs() <= 1e-12 * best.max(1.0));
                prop_assert_eq!(a.len(), b.len());
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "weights changed feasibility"),
        }
    }

    #[test]
    fn ranking_is_descending_and_positive(inst in instance()) {
        let v_g = normalize_scores(&inst.q_g).unwrap().values;
        let (v_p, _) = normalize_grid(&inst.q_gp).unwrap();
        let m = unified_scores(&v_g, &v_p, &inst.free, &inst.weights).unwrap();
        if let Ok(ranked) = select_best_pair(&m) {
            let positive = m.values.as_slice().iter().filter(|v| **v > 0.0).count();
            prop_assert_eq!(ranked.len(), positive);
            for w in ranked.windows(2) {
                prop_assert!(w[0].score >= w[1].score);
                prop_assert!(w[0].score > w[1].score || (w[0].grasp, w[0].placement) < (w[1].grasp, w[1].placement));
            }
            for r in &ranked {
                prop_assert!(inst.free.get(r.grasp, r.placement));
            }
        }
    }

    #[test]
    fn normalization_peaks_at_one(values in prop::collection::vec(0.0..10.0f64, 1..200)) {
        let n = normalize_scores(&values).unwrap();
        let max = n.values.iter().copied().fold(0.0, f64::max);
        prop_assert!(n.all_zero || max == 1.0);
        prop_assert!(n.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn heuristic_stays_in_unit_interval(
        d in -0.1..1.0f64,
        tau in 0.01..0.2f64,
        margin_frac in 0.0..0.9f64,
        decay in 1.0..200.0f64,
        sparse in any::<bool>(),
    ) {
        let p = PackingHeuristicParams {
            tau,
            decay,
            margin: tau * margin_frac,
            mode: if sparse { PackingMode::Sparse } else { PackingMode::Dense },
        };
        let v = packing_heuristic(d, &p);
        prop_assert!((0.0..=1.0).contains(&v));
        if d < p.margin {
            prop_assert_eq!(v, 0.0);
        }
        // monotone on each side of tau
        let further = packing_heuristic(d + 0.01, &p);
        if d >= p.margin {
            if sparse { prop_assert!(further >= v) } else if d >= tau { prop_assert!(further <= v) }
        }
    }

    #[test]
    fn altitude_weight_is_bounded_and_monotone(a in -0.1..0.2f64, b in -0.1..0.2f64) {
        let p = AltitudeParams::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (wl, wh) = (altitude_weight(lo, &p), altitude_weight(hi, &p));
        prop_assert!(wl >= p.w_min && wh <= p.w_max);
        prop_assert!(wl <= wh);
    }
}

#[test]
fn all_zero_matrix_has_no_pair() {
    let v_g = vec![1.0, 0.5];
    let v_p = Grid::from_vec(2, 2, vec![0.5, 1.0, 0.2, 0.1]).unwrap();
    let blocked = Grid::from_vec(2, 2, vec![false; 4]).unwrap();
    let m = unified_scores(&v_g, &v_p, &blocked, &UnifiedWeights::default()).unwrap();
    assert!(select_best_pair(&m).is_err());
}
