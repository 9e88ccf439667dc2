//! Segmentation metrics: pixel F1, tolerance F1, clDice and bidirectional
//! Hausdorff distance under a Euclidean or RBF-derived point distance.

pub mod distance;
pub mod report;
pub mod skeleton;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

pub use distance::{distance_transform, DistanceField};
pub use report::{aggregate, write_csv, Aggregate, CSV_HEADER};
pub use skeleton::skeletonize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptySetPolicy {
    /// A Hausdorff term with exactly one empty side takes the distance
    /// between opposite image corners.
    MaxDiagonal,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Euclidean,
    Rbf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsParams {
    /// Tolerance in pixels for the tolerant F1.
    pub theta: u32,
    pub rbf_lengthscale: f64,
    pub rbf_scale: f64,
    pub empty_set_policy: EmptySetPolicy,
}

impl Default for MetricsParams {
    fn default() -> Self {
        MetricsParams {
            theta: 10,
            rbf_lengthscale: 10.0,
            rbf_scale: 100.0,
            empty_set_policy: EmptySetPolicy::MaxDiagonal,
        }
    }
}

impl MetricsParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rbf_lengthscale", self.rbf_lengthscale),
            ("rbf_scale", self.rbf_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `rbf_scale * (1 - exp(-d^2 / (2 l^2)))`: zero at coincidence and
    /// increasing with distance. Saturates to `rbf_scale` in floating point
    /// once `d` exceeds roughly `12 l`.
    pub fn rbf_distance(&self, squared_distance: f64) -> f64 {
        let l = self.rbf_lengthscale;
        self.rbf_scale * -(-squared_distance / (2.0 * l * l)).exp_m1()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f1: f64,
    pub f1_theta: f64,
    pub cl_dice: f64,
    pub hdf_euc: f64,
    pub hdf_rbf: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub skeleton_gt: usize,
    pub skeleton_pred: usize,
}

/// Harmonic mean of `tp_pred / n_pred` and `tp_gt / n_gt` from exact integer
/// counts, so equal counts give bit-identical results however they arose.
fn harmonic_f1(tp_pred: usize, n_pred: usize, tp_gt: usize, n_gt: usize) -> f64 {
    match (n_pred, n_gt) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ if tp_pred == 0 || tp_gt == 0 => 0.0,
        _ => {
            let num = 2 * tp_pred as u128 * tp_gt as u128;
            let den = tp_pred as u128 * n_gt as u128 + tp_gt as u128 * n_pred as u128;
            num as f64 / den as f64
        }
    }
}

pub fn f1(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    gt.require_same_dims(pred)?;
    let tp = gt.intersection_count(pred);
    Ok(harmonic_f1(tp, pred.count(), tp, gt.count()))
}

/// Number of `from` pixels within `theta` of a set pixel of `to_field`'s mask.
fn count_within(from: &BinaryMask, to_field: &DistanceField, theta: u32) -> usize {
    let limit = f64::from(theta) * f64::from(theta);
    from.points()
        .filter(|&(x, y)| to_field.squared(x, y) <= limit)
        .count()
}

pub fn f1_tolerant(gt: &BinaryMask, pred: &BinaryMask, theta: u32) -> Result<f64> {
    gt.require_same_dims(pred)?;
    Ok(f1_tolerant_with(gt, pred, theta, &distance_transform(gt), &distance_transform(pred)))
}

fn f1_tolerant_with(
    gt: &BinaryMask,
    pred: &BinaryMask,
    theta: u32,
    dt_gt: &DistanceField,
    dt_pred: &DistanceField,
) -> f64 {
    harmonic_f1(
        count_within(pred, dt_gt, theta),
        pred.count(),
        count_within(gt, dt_pred, theta),
        gt.count(),
    )
}

fn max_diagonal_squared(dims: (usize, usize)) -> f64 {
    let (w, h) = (dims.0 as f64 - 1.0, dims.1 as f64 - 1.0);
    w * w + h * h
}

/// Largest squared distance from a pixel of `from` to the set behind `to_field`.
fn directed_squared(from: &BinaryMask, to_field: &DistanceField) -> f64 {
    from.points()
        .map(|(x, y)| to_field.squared(x, y))
        .fold(0.0, f64::max)
}

/// Squared bidirectional Hausdorff distance, or `None` when exactly one side
/// is empty.
fn hausdorff_squared(
    x: &BinaryMask,
    y: &BinaryMask,
    dt_x: &DistanceField,
    dt_y: &DistanceField,
) -> Option<f64> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => Some(0.0),
        (false, false) => Some(directed_squared(x, dt_y).max(directed_squared(y, dt_x))),
        _ => None,
    }
}

fn hausdorff_terms(
    x: &BinaryMask,
    y: &BinaryMask,
    dt_x: &DistanceField,
    dt_y: &DistanceField,
    params: &MetricsParams,
) -> Result<(f64, f64)> {
    let sq = match hausdorff_squared(x, y, dt_x, dt_y) {
        Some(sq) => sq,
        None => match params.empty_set_policy {
            EmptySetPolicy::MaxDiagonal => max_diagonal_squared(x.dims()),
            EmptySetPolicy::Error => return Err(Error::EmptyMask),
        },
    };
    Ok((sq.sqrt(), params.rbf_distance(sq)))
}

/// Because the RBF distance is monotone in Euclidean distance, the max-min
/// under it is the RBF distance of the Euclidean max-min.
pub fn hausdorff(
    x: &BinaryMask,
    y: &BinaryMask,
    measure: Measure,
    params: &MetricsParams,
) -> Result<f64> {
    x.require_same_dims(y)?;
    params.validate()?;
    let (euc, rbf) = hausdorff_terms(x, y, &distance_transform(x), &distance_transform(y), params)?;
    Ok(match measure {
        Measure::Euclidean => euc,
        Measure::Rbf => rbf,
    })
}

/// Skeleton used for the topology terms. A nonempty mask whose thinning
/// vanishes (e.g. a 2×2 block) stands in for its own skeleton.
pub fn centerline(mask: &BinaryMask) -> BinaryMask {
    let s = skeletonize(mask);
    if s.is_empty() {
        mask.clone()
    } else {
        s
    }
}

/// Fraction of `skeleton` lying inside `mask`; 1 for an empty skeleton over an
/// empty mask, 0 for an empty skeleton otherwise.
fn topology_term(skeleton: &BinaryMask, mask: &BinaryMask) -> f64 {
    match skeleton.count() {
        0 if mask.is_empty() => 1.0,
        0 => 0.0,
        n => skeleton.intersection_count(mask) as f64 / n as f64,
    }
}

fn cl_dice_from_skeletons(
    gt: &BinaryMask,
    pred: &BinaryMask,
    skel_gt: &BinaryMask,
    skel_pred: &BinaryMask,
) -> f64 {
    let precision = topology_term(skel_pred, gt);
    let sensitivity = topology_term(skel_gt, pred);
    if precision + sensitivity == 0.0 {
        0.0
    } else {
        2.0 * precision * sensitivity / (precision + sensitivity)
    }
}

pub fn cl_dice(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    gt.require_same_dims(pred)?;
    Ok(cl_dice_from_skeletons(gt, pred, &centerline(gt), &centerline(pred)))
}

/// All five metrics, sharing one distance transform per mask.
pub fn evaluate(gt: &BinaryMask, pred: &BinaryMask, params: &MetricsParams) -> Result<MetricsReport> {
    gt.require_same_dims(pred)?;
    params.validate()?;
    let dt_gt = distance_transform(gt);
    let dt_pred = distance_transform(pred);
    let skel_gt = centerline(gt);
    let skel_pred = centerline(pred);
    let tp = gt.intersection_count(pred);
    let (n_gt, n_pred) = (gt.count(), pred.count());
    let (hdf_euc, hdf_rbf) = hausdorff_terms(gt, pred, &dt_gt, &dt_pred, params)?;
    Ok(MetricsReport {
        f1: harmonic_f1(tp, n_pred, tp, n_gt),
        f1_theta: f1_tolerant_with(gt, pred, params.theta, &dt_gt, &dt_pred),
        cl_dice: cl_dice_from_skeletons(gt, pred, &skel_gt, &skel_pred),
        hdf_euc,
        hdf_rbf,
        tp,
        fp: n_pred - tp,
        fn_: n_gt - tp,
        skeleton_gt: skel_gt.count(),
        skeleton_pred: skel_pred.count(),
    })
}
