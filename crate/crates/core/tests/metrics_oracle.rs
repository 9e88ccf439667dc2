mod common;

use crackgen::metrics::{evaluate, f1, f1_tolerant, hausdorff, EmptySetPolicy, Measure, MetricsParams};
use crackgen::raster::BinaryMask;
use crackgen::seed::rng_from_seed;

#[test]
fn metrics_match_brute_force_oracles() {
    let params = MetricsParams::default();
    let mut rng = rng_from_seed(2024);
    for case in 0..200 {
        let (gt, pred) = common::random_pair(&mut rng, 16, 16);
        let r = evaluate(&gt, &pred, &params).unwrap();
        let (tp, fp, fn_) = common::oracle_confusion(&gt, &pred);
        assert_eq!((r.tp, r.fp, r.fn_), (tp, fp, fn_), "case {case}");
        assert_eq!(r.f1, common::oracle_f1(&gt, &pred), "case {case}");
        assert_eq!(r.f1_theta, common::oracle_f1_tolerant(&gt, &pred, params.theta), "case {case}");
        for theta in [0, 1, 3] {
            assert_eq!(
                f1_tolerant(&gt, &pred, theta).unwrap(),
                common::oracle_f1_tolerant(&gt, &pred, theta),
                "case {case} theta {theta}"
            );
        }
        let (euc, rbf) = match common::oracle_hausdorff_sq(&gt, &pred) {
            Some(sq) => (
                (sq as f64).sqrt(),
                common::oracle_hausdorff_rbf(&gt, &pred, &params).unwrap(),
            ),
            None => {
                let d = common::diagonal_sq(&gt);
                (d.sqrt(), params.rbf_distance(d))
            }
        };
        assert_eq!(r.hdf_euc, euc, "case {case}");
        assert!((r.hdf_rbf - rbf).abs() < 1e-9, "case {case}: {} vs {rbf}", r.hdf_rbf);
        let cl = common::oracle_cl_dice(&gt, &pred);
        assert!((r.cl_dice - cl).abs() < 1e-9, "case {case}: {} vs {cl}", r.cl_dice);
    }
}

#[test]
fn self_comparison_is_perfect() {
    let params = MetricsParams::default();
    let mut rng = rng_from_seed(5);
    for density in [0.005, 0.05, 0.3, 1.0] {
        let mut m = common::random_mask(&mut rng, 24, 20, density);
        m.set(3, 4, true);
        let r = evaluate(&m, &m, &params).unwrap();
        assert_eq!(
            (r.f1, r.f1_theta, r.cl_dice, r.hdf_euc, r.hdf_rbf),
            (1.0, 1.0, 1.0, 0.0, 0.0),
            "density {density}"
        );
    }
}

#[test]
fn zero_tolerance_reduces_to_f1() {
    let mut rng = rng_from_seed(77);
    for _ in 0..100 {
        let (gt, pred) = common::random_pair(&mut rng, 16, 16);
        assert_eq!(f1_tolerant(&gt, &pred, 0).unwrap(), f1(&gt, &pred).unwrap());
    }
}

#[test]
fn empty_set_policies() {
    let gt = BinaryMask::from_points(10, 5, &[(1, 1)]);
    let empty = BinaryMask::new(10, 5);
    let max_diag = MetricsParams::default();
    let d = hausdorff(&gt, &empty, Measure::Euclidean, &max_diag).unwrap();
    assert_eq!(d, (81.0f64 + 16.0).sqrt());
    let strict = MetricsParams { empty_set_policy: EmptySetPolicy::Error, ..MetricsParams::default() };
    assert!(hausdorff(&gt, &empty, Measure::Euclidean, &strict).is_err());
    assert_eq!(hausdorff(&empty, &empty, Measure::Rbf, &strict).unwrap(), 0.0);
}

#[test]
fn mismatched_dimensions_rejected() {
    let a = BinaryMask::new(4, 4);
    let b = BinaryMask::new(4, 5);
    assert!(evaluate(&a, &b, &MetricsParams::default()).is_err());
}
