use nalgebra::{Point3, Vector2, Vector3};
use placeability::geom::{PointCloud, RigidPose};
use placeability::oracle::{quasi_static_stable, SyntheticObject};
use placeability::stability::{
    evaluate_on_support, inlier_fraction, sample_com_hypotheses, fit_com_ellipsoid, stability_score, StabilityParams,
    SupportSurface,
};
use proptest::prelude::*;

fn params(k: f64, c: f64) -> StabilityParams {
    StabilityParams {
        steepness: k,
        center: c,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn endpoints_are_exact(k in 1.0..50.0f64, c in 0.5001..0.9999f64) {
        let p = params(k, c);
        prop_assert!(stability_score(0.5, &p).abs() <= 1e-12);
        prop_assert!((stability_score(1.0, &p) - 1.0).abs() <= 1e-12);
        prop_assert_eq!(stability_score(0.2, &p), 0.0);
    }

    #[test]
    fn score_is_monotone_and_bounded(k in 1.0..50.0f64, c in 0.5001..0.9999f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let p = params(k, c);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (slo, shi) = (stability_score(lo, &p), stability_score(hi, &p));
        prop_assert!((0.0..=1.0).contains(&slo) && (0.0..=1.0).contains(&shi));
        prop_assert!(slo <= shi);
    }

    #[test]
    fn inlier_fraction_shrinks_with_the_support(seed in 0u64..1000, cut in 0.0..0.9f64) {
        let obj = SyntheticObject::uniform_box(Vector3::new(0.12, 0.08, 0.1));
        let cloud = obj.dense_cloud(1500, seed);
        let fit = fit_com_ellipsoid(&cloud, 0.25).unwrap();
        let samples = sample_com_hypotheses(&fit, 500, seed, 0.08);
        let full = obj.footprint();
        let clipped = full.clip_half_plane(&Vector2::x(), 0.06 - cut * 0.12);
        let p_full = inlier_fraction(&samples, &full);
        let p_cut = clipped.map_or(0.0, |c| inlier_fraction(&samples, &c));
        prop_assert!((0.0..=1.0).contains(&p_full));
        prop_assert!(p_cut <= p_full);
    }
}

#[test]
fn upright_box_on_open_table_is_stable() {
    let obj = SyntheticObject::uniform_box(Vector3::new(0.1, 0.1, 0.15));
    let cloud = obj.dense_cloud(3000, 5);
    let r = evaluate_on_support(&cloud, &SupportSurface::flat(), &StabilityParams::default()).unwrap();
    assert!(r.score >= 0.9, "score {}", r.score);
    assert!(quasi_static_stable(&obj, &RigidPose::identity(), &obj.footprint()));
}

#[test]
fn evaluation_is_deterministic_per_seed() {
    let obj = SyntheticObject::uniform_box(Vector3::new(0.1, 0.06, 0.2));
    let cloud = obj.dense_cloud(2000, 9);
    let edge = obj.footprint().clip_half_plane(&Vector2::x(), 0.0);
    let surface = SupportSurface::new(Vector3::z(), edge);
    let p = StabilityParams::default();
    let a = evaluate_on_support(&cloud, &surface, &p).unwrap();
    let b = evaluate_on_support(&cloud, &surface, &p).unwrap();
    assert_eq!(a.score, b.score);
    assert_eq!(a.inlier_fraction, b.inlier_fraction);
    let other = evaluate_on_support(&cloud, &surface, &StabilityParams { seed: 1, ..p }).unwrap();
    assert_eq!(other.com_samples.seed(), 1);
}

#[test]
fn sparse_cloud_is_rejected() {
    let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(0.1, 0.0, 0.0)]).unwrap();
    assert!(evaluate_on_support(&cloud, &SupportSurface::flat(), &StabilityParams::default()).is_err());
}
