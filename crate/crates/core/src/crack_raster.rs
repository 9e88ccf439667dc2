//! Places a crack polyline on the canvas, draws it anti-aliased and gives it
//! width with a Gaussian blur.

use std::f64::consts::TAU;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractal::CrackPolyline;
use crate::raster::{BinaryMask, GrayImage};
use crate::seed::Rng;

pub const MIN_CANVAS: usize = 32;

/// Spacing of stroke samples along the path, pixels.
const STROKE_STEP: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementParams {
    /// Half-open rotation interval, radians.
    pub rotation_range: [f64; 2],
    /// Fraction of each canvas side kept free on both borders.
    pub margin_frac: f64,
    pub blur_kernel_choices: Vec<usize>,
    pub mask_threshold: f64,
    /// Major axis length as a fraction of the smaller canvas side.
    pub scale_range: [f64; 2],
}

impl Default for PlacementParams {
    fn default() -> Self {
        PlacementParams {
            rotation_range: [0.0, TAU],
            margin_frac: 0.05,
            blur_kernel_choices: vec![3, 5],
            mask_threshold: 0.5,
            scale_range: [0.4, 0.9],
        }
    }
}

impl PlacementParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let [r0, r1] = self.rotation_range;
        if !(r0.is_finite() && r1.is_finite() && r0 <= r1) {
            return bad(format!("rotation range {:?} is not an interval", self.rotation_range));
        }
        if !(0.0..0.5).contains(&self.margin_frac) {
            return bad(format!("margin_frac {} outside [0, 0.5)", self.margin_frac));
        }
        if self.blur_kernel_choices.is_empty() {
            return bad("blur_kernel_choices is empty".into());
        }
        if let Some(k) = self.blur_kernel_choices.iter().find(|&&k| k % 2 == 0) {
            return bad(format!("blur kernel size {k} is not odd"));
        }
        if !(self.mask_threshold > 0.0 && self.mask_threshold < 1.0) {
            return bad(format!("mask_threshold {} outside (0, 1)", self.mask_threshold));
        }
        let [s0, s1] = self.scale_range;
        if !(s0 > 0.0 && s0 <= s1 && s1 <= 1.0) {
            return bad(format!("scale range {:?} outside (0, 1]", self.scale_range));
        }
        Ok(())
    }
}

/// One concrete draw of the random rigid placement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    pub rotation: f64,
    pub scale_frac: f64,
    /// Position of the bounding box inside the free range, each in `[0, 1)`.
    pub offset_frac: [f64; 2],
    pub kernel_size: usize,
}

impl Placement {
    /// Draw order: rotation, scale, x offset, y offset, kernel index.
    pub fn draw(rng: &mut Rng, params: &PlacementParams) -> Self {
        let [r0, r1] = params.rotation_range;
        let rotation = if r1 > r0 { rng.random_range(r0..r1) } else { r0 };
        let [s0, s1] = params.scale_range;
        let scale_frac = if s1 > s0 { rng.random_range(s0..s1) } else { s0 };
        let offset_frac = [rng.random::<f64>(), rng.random::<f64>()];
        let kernel_size =
            params.blur_kernel_choices[rng.random_range(0..params.blur_kernel_choices.len())];
        Placement {
            rotation,
            scale_frac,
            offset_frac,
            kernel_size,
        }
    }
}

/// Maps the polyline into pixel coordinates (pixel centers at integers).
pub fn place_points(
    polyline: &CrackPolyline,
    (width, height): (usize, usize),
    placement: &Placement,
    margin_frac: f64,
) -> Vec<[f64; 2]> {
    let pts = polyline.points();
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let (s, c) = placement.rotation.sin_cos();
    let rotated: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - cx, p[1] - cy);
            [dx * c - dy * s, dx * s + dy * c]
        })
        .collect();

    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &rotated {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let (bw, bh) = (x1 - x0, y1 - y0);
    let major = bw.max(bh);

    let (w, h) = (width as f64, height as f64);
    let avail_w = (w - 1.0) - 2.0 * margin_frac * w;
    let avail_h = (h - 1.0) - 2.0 * margin_frac * h;
    let mut scale = placement.scale_frac * w.min(h) / major;
    if bw > 0.0 {
        scale = scale.min(avail_w / bw);
    }
    if bh > 0.0 {
        scale = scale.min(avail_h / bh);
    }
    let free_x = (avail_w - bw * scale).max(0.0);
    let free_y = (avail_h - bh * scale).max(0.0);
    let left = margin_frac * w + placement.offset_frac[0] * free_x;
    let top = margin_frac * h + placement.offset_frac[1] * free_y;

    rotated
        .iter()
        .map(|p| [left + (p[0] - x0) * scale, top + (p[1] - y0) * scale])
        .collect()
}

/// Draws a one-pixel-wide anti-aliased path of intensity 1.
///
/// The path is sampled every quarter pixel and each sample deposits bilinear
/// coverage on its four surrounding pixels; overlapping deposits combine by
/// maximum so crossings never exceed 1.
pub fn rasterize_polyline(points: &[[f64; 2]], width: usize, height: usize) -> GrayImage {
    let mut img = GrayImage::new(width, height);
    let mut splat = |x: f64, y: f64| {
        let (fx, fy) = (x.floor(), y.floor());
        let (tx, ty) = (x - fx, y - fy);
        for (dx, wx) in [(0.0, 1.0 - tx), (1.0, tx)] {
            for (dy, wy) in [(0.0, 1.0 - ty), (1.0, ty)] {
                let (px, py) = (fx + dx, fy + dy);
                let cov = wx * wy;
                if cov <= 0.0 || px < 0.0 || py < 0.0 {
                    continue;
                }
                let (px, py) = (px as usize, py as usize);
                if px < width && py < height && img.get(px, py) < cov {
                    img.set(px, py, cov);
                }
            }
        }
    };
    if let Some(first) = points.first() {
        splat(first[0], first[1]);
    }
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let steps = (len / STROKE_STEP).ceil().max(1.0) as usize;
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            splat(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
        }
    }
    img
}

/// Normalized Gaussian weights for an odd `size`, sigma = size / 6.
pub fn gaussian_kernel(size: usize) -> Vec<f64> {
    assert!(size % 2 == 1, "kernel size must be odd");
    let sigma = size as f64 / 6.0;
    let half = (size / 2) as isize;
    let raw: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur with clamp-to-edge sampling. Output is not
/// renormalized, so total intensity is preserved for strokes that stay
/// `size / 2` pixels away from the border.
pub fn gaussian_blur(data: &[f64], width: usize, height: usize, size: usize) -> Vec<f64> {
    let k = gaussian_kernel(size);
    let half = (size / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            tmp[y * width + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * row[clamp(x as isize + i as isize - half, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * tmp[clamp(y as isize + i as isize - half, height) * width + x])
                .sum();
        }
    }
    out
}

/// Blurred peak of a straight one-pixel stroke centered on a pixel row: the
/// kernel's central 1-D weight.
pub fn thin_stroke_peak(kernel_size: usize) -> f64 {
    gaussian_kernel(kernel_size)[kernel_size / 2]
}

/// Crack intensity layer for an explicit placement; max intensity is 1.
///
/// The blurred stroke is divided by the smaller of its own peak and the peak
/// of a thin straight stroke, then clipped to 1. Dividing by the global peak
/// alone would let a few pixel-scale tangles (where the wiggly path covers a
/// 2-3 px wide patch) push thin stretches of the same crack below the mask
/// threshold and break the mask into pieces.
pub fn render_crack_layer_with(
    polyline: &CrackPolyline,
    (width, height): (usize, usize),
    placement: &Placement,
    margin_frac: f64,
) -> Result<GrayImage> {
    if width < MIN_CANVAS || height < MIN_CANVAS {
        return Err(Error::CanvasTooSmall {
            width,
            height,
            min: MIN_CANVAS,
        });
    }
    if placement.kernel_size % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "blur kernel size {} is not odd",
            placement.kernel_size
        )));
    }
    let pts = place_points(polyline, (width, height), placement, margin_frac);
    let stroke = rasterize_polyline(&pts, width, height);
    let mut blurred = gaussian_blur(stroke.data(), width, height, placement.kernel_size);
    let peak = blurred.iter().copied().fold(0.0, f64::max);
    let scale = peak.min(thin_stroke_peak(placement.kernel_size));
    if scale > 0.0 {
        blurred.iter_mut().for_each(|v| *v = (*v / scale).min(1.0));
    }
    GrayImage::from_vec(width, height, blurred)
}

pub fn render_crack_layer(
    polyline: &CrackPolyline,
    canvas: (usize, usize),
    params: &PlacementParams,
    rng: &mut Rng,
) -> Result<GrayImage> {
    params.validate()?;
    if canvas.0 < MIN_CANVAS || canvas.1 < MIN_CANVAS {
        return Err(Error::CanvasTooSmall {
            width: canvas.0,
            height: canvas.1,
            min: MIN_CANVAS,
        });
    }
    let placement = Placement::draw(rng, params);
    render_crack_layer_with(polyline, canvas, &placement, params.margin_frac)
}

/// `true` where intensity >= threshold.
pub fn to_mask(layer: &GrayImage, threshold: f64) -> Result<BinaryMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mask threshold {threshold} outside (0, 1)"
        )));
    }
    BinaryMask::from_vec(
        layer.width(),
        layer.height(),
        layer.data().iter().map(|&v| v >= threshold).collect(),
    )
}
