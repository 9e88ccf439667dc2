//! Pointwise mutual information of neighboring gray levels and the per-pixel
//! affinity it induces.
//!
//! ```text
//! PMI(a, b)      = ln( P(a, b)^tau / (P(a) P(b)) )
//! Affinity(x_i)  = sum_{j in N_i} exp(PMI(v_i, v_j))
//! ```
//!
//! `N_i` is the Euclidean disk of radius `neighborhood_radius` around pixel
//! `i` (center excluded, clipped at the border). Pixels whose gray levels
//! rarely co-occur with their surroundings get low affinity.

pub mod kde;

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayImage, RgbImage};
use crate::seed::Rng;

pub use kde::{estimate_densities, scott_bandwidth, Density1D, Density2D};

/// Floor applied to interpolated densities before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Leading bytes of the raw affinity format.
pub const AFFINITY_MAGIC: [u8; 4] = *b"PMIA";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PmiParams {
    pub n_pairs: usize,
    /// Inclusive pixel distance range of sampled pairs.
    pub pair_distance_range: [u32; 2],
    pub neighborhood_radius: u32,
    pub tau: f64,
    pub grid_bins: usize,
    pub min_variance: f64,
}

impl Default for PmiParams {
    fn default() -> Self {
        PmiParams {
            n_pairs: 10_000,
            pair_distance_range: [1, 8],
            neighborhood_radius: 5,
            tau: 2.25,
            grid_bins: 64,
            min_variance: 1e-8,
        }
    }
}

impl PmiParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_pairs < 2 {
            return bad(format!("n_pairs must be at least 2, got {}", self.n_pairs));
        }
        let [lo, hi] = self.pair_distance_range;
        if lo == 0 || lo > hi {
            return bad(format!("pair distance range {:?} invalid", self.pair_distance_range));
        }
        if self.neighborhood_radius == 0 {
            return bad("neighborhood_radius must be positive".into());
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.grid_bins < 2 {
            return bad(format!("grid_bins must be at least 2, got {}", self.grid_bins));
        }
        if !(self.min_variance.is_finite() && self.min_variance > 0.0) {
            return bad(format!("min_variance must be positive, got {}", self.min_variance));
        }
        Ok(())
    }
}

/// Rec. 709 luma weights.
pub fn to_luminance(rgb: &RgbImage) -> GrayImage {
    let data = rgb
        .data()
        .iter()
        .map(|p| 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2])
        .collect();
    GrayImage::from_vec(rgb.width(), rgb.height(), data).expect("dimensions match")
}

/// `tau * ln P(a,b) - ln P(a) - ln P(b)` with each probability floored.
pub fn pmi_from_probabilities(p_ab: f64, p_a: f64, p_b: f64, tau: f64) -> f64 {
    tau * p_ab.max(DENSITY_FLOOR).ln() - p_a.max(DENSITY_FLOOR).ln() - p_b.max(DENSITY_FLOOR).ln()
}

pub fn pmi_score(joint: &Density2D, marginal: &Density1D, a: f64, b: f64, tau: f64) -> f64 {
    pmi_from_probabilities(joint.at(a, b), marginal.at(a), marginal.at(b), tau)
}

/// Offsets `(dx, dy)` with `0 < dx^2 + dy^2 <= r^2`.
pub fn disk_offsets(radius: u32) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = dx * dx + dy * dy;
            if d2 > 0 && d2 <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl AffinityMap {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != data.len() {
            return Err(Error::InvalidParameter(format!(
                "affinity buffer of length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "affinity values must be finite and positive, found {v}"
            )));
        }
        Ok(AffinityMap { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Min-max normalized to `[0, 1]`; a constant map becomes all zeros.
    pub fn normalized(&self) -> GrayImage {
        let lo = self.data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let data = self
            .data
            .iter()
            .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
            .collect();
        GrayImage::from_vec(self.width, self.height, data).expect("dimensions match")
    }

    /// 16-bit gray PNG preview after min-max normalization.
    pub fn encode_png16(&self) -> Vec<u8> {
        self.normalized().encode_png16()
    }

    /// `"PMIA"`, width and height as little-endian u32, then `width * height`
    /// little-endian f32 values in row-major order.
    pub fn write_raw(&self, mut out: impl Write) -> std::io::Result<()> {
        out.write_all(&AFFINITY_MAGIC)?;
        out.write_all(&(self.width as u32).to_le_bytes())?;
        out.write_all(&(self.height as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out.write_all(&buf)
    }

    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(12 + 4 * self.data.len());
        self.write_raw(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_raw(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_raw_bytes(&bytes).map_err(|reason| Error::MalformedAffinity {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn from_raw_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 12 || bytes[..4] != AFFINITY_MAGIC {
            return Err("missing PMIA header".into());
        }
        let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        if body.len() != w * h * 4 {
            return Err(format!("expected {} data bytes for {w}x{h}, found {}", w * h * 4, body.len()));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        AffinityMap::from_vec(w, h, data).map_err(|e| e.to_string())
    }
}

/// Per-pixel affinity from fitted densities.
pub fn affinity_from_densities(
    gray: &GrayImage,
    joint: &Density2D,
    marginal: &Density1D,
    params: &PmiParams,
) -> AffinityMap {
    let (w, h) = gray.dims();
    let offsets = disk_offsets(params.neighborhood_radius);
    let log_marginal: Vec<f64> = gray
        .data()
        .iter()
        .map(|&v| marginal.at(v).max(DENSITY_FLOOR).ln())
        .collect();
    let tau = params.tau;
    let mut data = vec![0.0; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let a = gray.data()[i];
            let mut sum = 0.0;
            for &(dx, dy) in &offsets {
                let (qx, qy) = (x as isize + dx, y as isize + dy);
                if qx < 0 || qy < 0 || qx as usize >= w || qy as usize >= h {
                    continue;
                }
                let j = qy as usize * w + qx as usize;
                let log_joint = joint.at(a, gray.data()[j]).max(DENSITY_FLOOR).ln();
                sum += (tau * log_joint - log_marginal[i] - log_marginal[j]).exp();
            }
            *out = sum;
        }
    });
    AffinityMap { width: w, height: h, data }
}

/// Affinity map of a gray image. A texture without variance yields the
/// uniform map whose value is the full disk size `|N_i|` (each term
/// `exp(PMI) = 1`).
pub fn affinity_map(gray: &GrayImage, params: &PmiParams, rng: &mut Rng) -> Result<AffinityMap> {
    match estimate_densities(gray, params, rng) {
        Ok((marginal, joint)) => Ok(affinity_from_densities(gray, &joint, &marginal, params)),
        Err(Error::DegenerateTexture { .. }) => {
            let n = disk_offsets(params.neighborhood_radius).len() as f64;
            AffinityMap::from_vec(gray.width(), gray.height(), vec![n; gray.data().len()])
        }
        Err(e) => Err(e),
    }
}
