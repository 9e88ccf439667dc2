//! Shared fixtures and brute-force oracles for the integration tests.

#![allow(dead_code)]

use crackgen::metrics::{centerline, MetricsParams};
use crackgen::raster::{BinaryMask, GrayImage};
use crackgen::seed::{rng_from_seed, Rng};
use rand::seq::SliceRandom;
use rand::Rng as _;

/// Background noise support; the line value sits below it.
pub const NOISE_RANGE: (f64, f64) = (0.35, 0.95);
pub const LINE_VALUE: f64 = 0.05;

/// Uniform noise crossed by a one-pixel dark line of fixed intensity at a
/// random angle through a point near the center. Returns the image and the
/// line mask.
pub fn noise_and_line(seed: u64, size: usize) -> (GrayImage, BinaryMask) {
    let mut rng = rng_from_seed(seed);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    let c = size as f64 / 2.0;
    let (cx, cy) = (
        c + rng.random_range(-0.15..0.15) * size as f64,
        c + rng.random_range(-0.15..0.15) * size as f64,
    );
    let (nx, ny) = (-angle.sin(), angle.cos());
    let mut mask = BinaryMask::new(size, size);
    let mut data = vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            let d = ((x as f64 - cx) * nx + (y as f64 - cy) * ny).abs();
            let on_line = d <= 0.5;
            mask.set(x, y, on_line);
            data[y * size + x] = if on_line {
                LINE_VALUE
            } else {
                rng.random_range(NOISE_RANGE.0..NOISE_RANGE.1)
            };
        }
    }
    (GrayImage::from_vec(size, size, data).unwrap(), mask)
}

/// I.i.d. uniform noise on `[0, 1)`.
pub fn uniform_noise(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = rng_from_seed(seed);
    GrayImage::from_vec(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Average ranks (1-based), ties sharing their mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// One-sample Kolmogorov–Smirnov distance against the CDF `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Medians of `values` inside and outside `mask`.
pub fn split_medians(values: &[f64], mask: &BinaryMask) -> (f64, f64) {
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for (&v, &b) in values.iter().zip(mask.data()) {
        if b {
            inside.push(v);
        } else {
            outside.push(v);
        }
    }
    (median(&mut inside), median(&mut outside))
}

pub fn random_mask(rng: &mut Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_vec(w, h, (0..w * h).map(|_| rng.random_bool(density)).collect()).unwrap()
}

/// Seeded pair of random masks whose densities vary per pair (including
/// occasionally empty masks).
pub fn random_pair(rng: &mut Rng, w: usize, h: usize) -> (BinaryMask, BinaryMask) {
    let da = [0.0, 0.02, 0.1, 0.3, 0.6][rng.random_range(0..5)];
    let db = [0.0, 0.02, 0.1, 0.3, 0.6][rng.random_range(0..5)];
    (random_mask(rng, w, h, da), random_mask(rng, w, h, db))
}

/// Exactly `count` set pixels at uniformly random positions.
pub fn random_mask_with_count(rng: &mut Rng, w: usize, h: usize, count: usize) -> BinaryMask {
    let mut data: Vec<bool> = (0..w * h).map(|i| i < count).collect();
    data.shuffle(rng);
    BinaryMask::from_vec(w, h, data).unwrap()
}

// ---- brute-force oracles ------------------------------------------------

pub fn oracle_confusion(gt: &BinaryMask, pred: &BinaryMask) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for (&g, &p) in gt.data().iter().zip(pred.data()) {
        match (g, p) {
            (true, true) => c.0 += 1,
            (false, true) => c.1 += 1,
            (true, false) => c.2 += 1,
            _ => {}
        }
    }
    c
}

pub fn oracle_f1(gt: &BinaryMask, pred: &BinaryMask) -> f64 {
    let (tp, fp, fn_) = oracle_confusion(gt, pred);
    match (gt.count(), pred.count()) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => (2 * tp) as f64 / (2 * tp + fp + fn_) as f64,
    }
}

fn points(m: &BinaryMask) -> Vec<(i64, i64)> {
    m.points().map(|(x, y)| (x as i64, y as i64)).collect()
}

fn sq(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)
}

/// Tolerant F1 by direct pairwise search.
pub fn oracle_f1_tolerant(gt: &BinaryMask, pred: &BinaryMask, theta: u32) -> f64 {
    let (g, p) = (points(gt), points(pred));
    let t2 = i64::from(theta).pow(2);
    let near = |a: &(i64, i64), set: &[(i64, i64)]| set.iter().any(|b| sq(*a, *b) <= t2);
    let tp_p = p.iter().filter(|a| near(a, &g)).count();
    let tp_g = g.iter().filter(|a| near(a, &p)).count();
    match (g.len(), p.len()) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ if tp_p == 0 || tp_g == 0 => 0.0,
        (ng, np) => {
            let num = 2 * tp_p as u128 * tp_g as u128;
            let den = tp_p as u128 * ng as u128 + tp_g as u128 * np as u128;
            num as f64 / den as f64
        }
    }
}

/// Squared bidirectional Hausdorff distance by the O(n·m) max-min definition;
/// `None` when exactly one side is empty.
pub fn oracle_hausdorff_sq(x: &BinaryMask, y: &BinaryMask) -> Option<i64> {
    let (a, b) = (points(x), points(y));
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Some(0),
        (false, false) => {}
        _ => return None,
    }
    let directed = |from: &[(i64, i64)], to: &[(i64, i64)]| {
        from.iter()
            .map(|p| to.iter().map(|q| sq(*p, *q)).min().unwrap())
            .max()
            .unwrap()
    };
    Some(directed(&a, &b).max(directed(&b, &a)))
}

/// Max over one side of min over the other of the RBF distance itself.
pub fn oracle_hausdorff_rbf(x: &BinaryMask, y: &BinaryMask, params: &MetricsParams) -> Option<f64> {
    let (a, b) = (points(x), points(y));
    let l2 = params.rbf_lengthscale * params.rbf_lengthscale;
    let dist = |p: (i64, i64), q: (i64, i64)| params.rbf_scale * (1.0 - (-(sq(p, q) as f64) / (2.0 * l2)).exp());
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Some(0.0),
        (false, false) => {}
        _ => return None,
    }
    let directed = |from: &[(i64, i64)], to: &[(i64, i64)]| {
        from.iter()
            .map(|p| to.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Some(directed(&a, &b).max(directed(&b, &a)))
}

/// clDice from its set-counting definition, using the library's centerlines.
pub fn oracle_cl_dice(gt: &BinaryMask, pred: &BinaryMask) -> f64 {
    let (sg, sp) = (centerline(gt), centerline(pred));
    let frac = |s: &BinaryMask, m: &BinaryMask| {
        let n = s.points().count();
        if n == 0 {
            return if m.is_empty() { 1.0 } else { 0.0 };
        }
        s.points().filter(|&(x, y)| m.get(x, y)).count() as f64 / n as f64
    };
    let (tp, ts) = (frac(&sp, gt), frac(&sg, pred));
    if tp + ts == 0.0 {
        0.0
    } else {
        2.0 * tp * ts / (tp + ts)
    }
}

pub fn diagonal_sq(m: &BinaryMask) -> f64 {
    let (w, h) = m.dims();
    ((w - 1).pow(2) + (h - 1).pow(2)) as f64
}
