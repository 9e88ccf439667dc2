//! Stochastic Koch-style crack centerlines.
//!
//! A crack starts as the unit segment `(0,0)-(1,0)`. Each subdivision step
//! replaces every segment `AB` by `A-C-E-D-B`, where `C` and `D` are the
//! one-third points and `E` is the midpoint of `CD` pushed out along the
//! segment's left normal rotated by a random angle. With a fixed angle of 0 and
//! a magnitude of `sqrt(3)/2` this is the classic Koch step.
//!
//! Random draw order (part of the reproducibility contract): for every
//! segment in list order, the angle is drawn first (normal deviate), then the
//! uniform variate for the magnitude.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FractalParams {
    /// Number of subdivision passes.
    pub depth: u32,
    /// Largest displacement, as a multiple of the middle third's length.
    pub p: f64,
    pub angle_mu_deg: f64,
    pub angle_sigma_deg: f64,
}

impl Default for FractalParams {
    fn default() -> Self {
        FractalParams {
            depth: 7,
            p: 1.0,
            angle_mu_deg: 0.0,
            angle_sigma_deg: 30.0,
        }
    }
}

/// Point count grows as `4^depth + 1`; beyond this it stops fitting in memory.
pub const MAX_DEPTH: u32 = 12;

impl FractalParams {
    pub fn validate(&self) -> Result<()> {
        if self.depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "fractal depth {} exceeds {MAX_DEPTH}",
                self.depth
            )));
        }
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "displacement bound p must be positive, got {}",
                self.p
            )));
        }
        if !(self.angle_sigma_deg.is_finite() && self.angle_sigma_deg > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "angle sigma must be positive, got {}",
                self.angle_sigma_deg
            )));
        }
        if !self.angle_mu_deg.is_finite() {
            return Err(Error::InvalidParameter("angle mean must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    /// Magnitude in `[0, p]`, relative to the middle third.
    pub r: f64,
    /// Rotation of the left normal, radians.
    pub theta: f64,
}

/// Inverse CDF of the density `2r / p^2` on `[0, p]`.
pub fn magnitude_from_uniform(u: f64, p: f64) -> f64 {
    p * u.sqrt()
}

pub fn sample_displacement(rng: &mut Rng, params: &FractalParams) -> Displacement {
    let z: f64 = StandardNormal.sample(rng);
    let theta = (params.angle_mu_deg + params.angle_sigma_deg * z).to_radians();
    let u: f64 = rng.random();
    Displacement {
        r: magnitude_from_uniform(u, params.p),
        theta,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrackPolyline {
    points: Vec<[f64; 2]>,
}

impl CrackPolyline {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "a polyline needs at least two points".into(),
            ));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "consecutive polyline points must be distinct".into(),
            ));
        }
        Ok(CrackPolyline { points })
    }

    pub fn unit_segment() -> Self {
        CrackPolyline {
            points: vec![[0.0, 0.0], [1.0, 0.0]],
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }
}

/// One subdivision pass with displacements supplied by `next`, called once
/// per segment in order.
pub fn subdivide_with(
    polyline: &CrackPolyline,
    mut next: impl FnMut() -> Displacement,
) -> CrackPolyline {
    let pts = &polyline.points;
    let mut out = Vec::with_capacity(4 * (pts.len() - 1) + 1);
    out.push(pts[0]);
    for seg in pts.windows(2) {
        let [a, b] = [seg[0], seg[1]];
        let d = [b[0] - a[0], b[1] - a[1]];
        let c = [a[0] + d[0] / 3.0, a[1] + d[1] / 3.0];
        let e_end = [a[0] + 2.0 * d[0] / 3.0, a[1] + 2.0 * d[1] / 3.0];
        let mid = [(c[0] + e_end[0]) * 0.5, (c[1] + e_end[1]) * 0.5];
        let len = d[0].hypot(d[1]);
        let third = len / 3.0;
        let Displacement { r, theta } = next();
        // Left normal (-dy, dx) rotated by theta.
        let (nx, ny) = (-d[1] / len, d[0] / len);
        let (s, co) = theta.sin_cos();
        let dir = [nx * co - ny * s, nx * s + ny * co];
        let apex = [mid[0] + r * third * dir[0], mid[1] + r * third * dir[1]];
        out.extend_from_slice(&[c, apex, e_end, b]);
    }
    CrackPolyline { points: out }
}

pub fn subdivide_once(
    polyline: &CrackPolyline,
    rng: &mut Rng,
    params: &FractalParams,
) -> CrackPolyline {
    subdivide_with(polyline, || sample_displacement(rng, params))
}

/// Deterministic in `(params, seed)`.
pub fn generate_crack_polyline(params: &FractalParams, seed: u64) -> Result<CrackPolyline> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut line = CrackPolyline::unit_segment();
    for _ in 0..params.depth {
        line = subdivide_once(&line, &mut rng, params);
    }
    Ok(line)
}
