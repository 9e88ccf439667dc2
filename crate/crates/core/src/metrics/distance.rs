//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher).
//!
//! Squared distances between pixel centers are integers, and the lower
//! envelope of parabolas reproduces them exactly, so the squared field is
//! bit-identical to a brute-force nearest-pixel search.

use crate::raster::BinaryMask;

/// Squared Euclidean distance from every pixel to the nearest set pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    squared: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// `+inf` everywhere when the source mask was empty.
    pub fn squared(&self, x: usize, y: usize) -> f64 {
        self.squared[y * self.width + x]
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.squared(x, y).sqrt()
    }

    pub fn squared_values(&self) -> &[f64] {
        &self.squared
    }

    pub fn distances(&self) -> Vec<f64> {
        self.squared.iter().map(|d| d.sqrt()).collect()
    }
}

/// One-dimensional squared distance transform of a sampled function `f`
/// (`+inf` entries are absent sites), written into `out`.
fn transform_1d(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        loop {
            let Some(&v) = sites.last() else {
                sites.push(q);
                bounds.push(f64::NEG_INFINITY);
                break;
            };
            // Abscissa where the parabola rooted at q overtakes the one at v.
            let s = ((fq + (q * q) as f64) - (f[v] + (v * v) as f64)) / (2.0 * (q - v) as f64);
            if s <= *bounds.last().expect("paired with sites") {
                sites.pop();
                bounds.pop();
            } else {
                sites.push(q);
                bounds.push(s);
                break;
            }
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && bounds[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - sites[k] as f64;
        *o = d * d + f[sites[k]];
    }
}

pub fn distance_transform(mask: &BinaryMask) -> DistanceField {
    let (w, h) = mask.dims();
    let mut grid: Vec<f64> = mask
        .data()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let mut sites = Vec::with_capacity(w.max(h));
    let mut bounds = Vec::with_capacity(w.max(h));

    let mut column = vec![0.0; h];
    let mut column_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid[y * w + x];
        }
        transform_1d(&column, &mut column_out, &mut sites, &mut bounds);
        for y in 0..h {
            grid[y * w + x] = column_out[y];
        }
    }

    let mut row_out = vec![0.0; w];
    for y in 0..h {
        let row = &mut grid[y * w..(y + 1) * w];
        transform_1d(row, &mut row_out, &mut sites, &mut bounds);
        row.copy_from_slice(&row_out);
    }

    DistanceField {
        width: w,
        height: h,
        squared: grid,
    }
}
