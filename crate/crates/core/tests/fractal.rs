mod common;

use crackgen::fractal::{
    generate_crack_polyline, sample_displacement, subdivide_once, CrackPolyline, FractalParams,
};
use crackgen::seed::rng_from_seed;

fn draws(n: usize, seed: u64, params: &FractalParams) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let d = sample_displacement(&mut rng, params);
            (d.theta.to_degrees(), d.r)
        })
        .unzip()
}

#[test]
fn displacement_angle_moments() {
    let (angles, _) = draws(100_000, 11, &FractalParams::default());
    let (mean, std) = common::mean_std(&angles);
    assert!(mean.abs() < 0.5, "angle mean {mean}");
    assert!((std - 30.0).abs() < 1.0, "angle std {std}");
}

#[test]
fn displacement_magnitude_follows_linear_density() {
    let params = FractalParams { p: 0.7, ..FractalParams::default() };
    let (_, mut r) = draws(100_000, 12, &params);
    assert!(r.iter().all(|&v| (0.0..=params.p).contains(&v)));
    let ks = common::ks_distance(&mut r, |x| (x / params.p).powi(2));
    assert!(ks < 0.02, "KS distance {ks}");
}

#[test]
fn shifted_angle_mean_is_honoured() {
    let params = FractalParams {
        angle_mu_deg: 20.0,
        angle_sigma_deg: 5.0,
        ..FractalParams::default()
    };
    let (angles, _) = draws(20_000, 13, &params);
    let (mean, std) = common::mean_std(&angles);
    assert!((mean - 20.0).abs() < 0.2, "{mean}");
    assert!((std - 5.0).abs() < 0.2, "{std}");
}

#[test]
fn point_count_is_four_to_the_depth_plus_one() {
    for depth in 0..=7 {
        let params = FractalParams { depth, ..FractalParams::default() };
        let line = generate_crack_polyline(&params, 5).unwrap();
        assert_eq!(line.len(), 4usize.pow(depth) + 1);
    }
    let line = generate_crack_polyline(&FractalParams::default(), 0).unwrap();
    assert_eq!(line.len(), 16385);
}

#[test]
fn endpoints_are_fixed() {
    for seed in 0..10 {
        let line = generate_crack_polyline(&FractalParams::default(), seed).unwrap();
        assert_eq!(line.points()[0], [0.0, 0.0]);
        assert_eq!(*line.points().last().unwrap(), [1.0, 0.0]);
    }
}

#[test]
fn every_pass_keeps_previous_vertices() {
    let params = FractalParams::default();
    let mut rng = rng_from_seed(3);
    let mut line = CrackPolyline::unit_segment();
    for _ in 0..4 {
        let next = subdivide_once(&line, &mut rng, &params);
        for (i, p) in line.points().iter().enumerate() {
            assert_eq!(next.points()[4 * i], *p);
        }
        line = next;
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let params = FractalParams::default();
    let a = generate_crack_polyline(&params, 99).unwrap();
    let b = generate_crack_polyline(&params, 99).unwrap();
    let c = generate_crack_polyline(&params, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn invalid_parameters_rejected() {
    for params in [
        FractalParams { p: 0.0, ..FractalParams::default() },
        FractalParams { angle_sigma_deg: -1.0, ..FractalParams::default() },
        FractalParams { depth: 40, ..FractalParams::default() },
    ] {
        assert!(generate_crack_polyline(&params, 0).is_err());
    }
}
