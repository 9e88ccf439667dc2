//! Gaussian kernel density estimates of gray levels and gray-level pairs,
//! tabulated on a regular grid over `[0, 1]` (resp. `[0, 1]^2`).

use std::f64::consts::TAU;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::pmi::PmiParams;
use crate::raster::GrayImage;
use crate::seed::Rng;

/// Scott's rule: `sigma * n^(-1 / (d + 4))`.
pub fn scott_bandwidth(std_dev: f64, n: usize, dims: u32) -> f64 {
    std_dev * (n as f64).powf(-1.0 / (dims as f64 + 4.0))
}

/// Unbiased (n - 1) sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

fn grid_node(i: usize, bins: usize) -> f64 {
    i as f64 / (bins - 1) as f64
}

fn trapezoid_weight(i: usize, bins: usize) -> f64 {
    let step = 1.0 / (bins - 1) as f64;
    if i == 0 || i == bins - 1 {
        0.5 * step
    } else {
        step
    }
}

/// Linear interpolation position of `v` on the grid, clamped into range.
fn locate(v: f64, bins: usize) -> (usize, f64) {
    let t = v.clamp(0.0, 1.0) * (bins - 1) as f64;
    let i = (t.floor() as usize).min(bins - 2);
    (i, t - i as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Density1D {
    bins: usize,
    values: Vec<f64>,
    bandwidth: f64,
}

impl Density1D {
    /// Tabulates the KDE of `samples` with the given bandwidth, rescaled so
    /// the trapezoidal integral over `[0, 1]` is 1.
    pub fn fit(samples: &[f64], bandwidth: f64, bins: usize) -> Self {
        assert!(bins >= 2 && bandwidth > 0.0);
        let inv = 1.0 / (2.0 * bandwidth * bandwidth);
        let mut values = vec![0.0; bins];
        for &s in samples {
            for (i, v) in values.iter_mut().enumerate() {
                let d = grid_node(i, bins) - s;
                *v += (-d * d * inv).exp();
            }
        }
        let mut density = Density1D { bins, values, bandwidth };
        let z = density.integral();
        if z > 0.0 {
            density.values.iter_mut().for_each(|v| *v /= z);
        }
        density
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * trapezoid_weight(i, self.bins))
            .sum()
    }

    pub fn at(&self, v: f64) -> f64 {
        let (i, t) = locate(v, self.bins);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Density2D {
    bins: usize,
    /// Row-major, first coordinate along rows: `values[i * bins + j] = D(g_i, g_j)`.
    values: Vec<f64>,
    bandwidth: (f64, f64),
}

impl Density2D {
    /// Product-kernel KDE of `(a, b)` pairs, symmetrized
    /// (`D(a, b) <- (D(a, b) + D(b, a)) / 2`) and rescaled to unit
    /// trapezoidal mass.
    pub fn fit(pairs: &[(f64, f64)], bandwidth: (f64, f64), bins: usize) -> Self {
        assert!(bins >= 2 && bandwidth.0 > 0.0 && bandwidth.1 > 0.0);
        let (ia, ib) = (
            1.0 / (2.0 * bandwidth.0 * bandwidth.0),
            1.0 / (2.0 * bandwidth.1 * bandwidth.1),
        );
        let mut raw = vec![0.0; bins * bins];
        let mut ka = vec![0.0; bins];
        let mut kb = vec![0.0; bins];
        for &(a, b) in pairs {
            for i in 0..bins {
                let g = grid_node(i, bins);
                ka[i] = (-(g - a) * (g - a) * ia).exp();
                kb[i] = (-(g - b) * (g - b) * ib).exp();
            }
            for i in 0..bins {
                if ka[i] == 0.0 {
                    continue;
                }
                let row = &mut raw[i * bins..(i + 1) * bins];
                for (r, k) in row.iter_mut().zip(&kb) {
                    *r += ka[i] * k;
                }
            }
        }
        let mut values = vec![0.0; bins * bins];
        for i in 0..bins {
            for j in 0..bins {
                values[i * bins + j] = 0.5 * (raw[i * bins + j] + raw[j * bins + i]);
            }
        }
        let mut density = Density2D { bins, values, bandwidth };
        let z = density.integral();
        if z > 0.0 {
            density.values.iter_mut().for_each(|v| *v /= z);
        }
        density
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> (f64, f64) {
        self.bandwidth
    }

    pub fn grid(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.bins + j]
    }

    pub fn integral(&self) -> f64 {
        let n = self.bins;
        (0..n)
            .map(|i| {
                let wi = trapezoid_weight(i, n);
                (0..n)
                    .map(|j| self.values[i * n + j] * wi * trapezoid_weight(j, n))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn at(&self, a: f64, b: f64) -> f64 {
        let n = self.bins;
        let (i, ti) = locate(a, n);
        let (j, tj) = locate(b, n);
        let v = |i: usize, j: usize| self.values[i * n + j];
        let top = v(i, j) * (1.0 - tj) + v(i, j + 1) * tj;
        let bottom = v(i + 1, j) * (1.0 - tj) + v(i + 1, j + 1) * tj;
        top * (1.0 - ti) + bottom * ti
    }
}

/// Draws the marginal samples then the pair samples.
///
/// Draw order: `n_pairs` x (column, row) for single pixels; then `n_pairs` x
/// (column, row, distance, angle) for pairs. The partner pixel sits at the
/// rounded offset `d * (cos a, sin a)`, clamped into the image.
pub fn sample_pixels(gray: &GrayImage, params: &PmiParams, rng: &mut Rng) -> (Vec<f64>, Vec<(f64, f64)>) {
    let (w, h) = gray.dims();
    let singles = (0..params.n_pairs)
        .map(|_| {
            let x = rng.random_range(0..w);
            let y = rng.random_range(0..h);
            gray.get(x, y)
        })
        .collect();
    let [d_min, d_max] = params.pair_distance_range;
    let pairs = (0..params.n_pairs)
        .map(|_| {
            let x = rng.random_range(0..w);
            let y = rng.random_range(0..h);
            let d = rng.random_range(d_min..=d_max) as f64;
            let angle = rng.random::<f64>() * TAU;
            let qx = (x as f64 + (d * angle.cos()).round()).clamp(0.0, (w - 1) as f64) as usize;
            let qy = (y as f64 + (d * angle.sin()).round()).clamp(0.0, (h - 1) as f64) as usize;
            (gray.get(x, y), gray.get(qx, qy))
        })
        .collect();
    (singles, pairs)
}

/// Fits the marginal and joint gray-level densities with Scott bandwidths.
/// Fails with [`Error::DegenerateTexture`] when any sampled coordinate has
/// variance below `params.min_variance`.
pub fn estimate_densities(
    gray: &GrayImage,
    params: &PmiParams,
    rng: &mut Rng,
) -> Result<(Density1D, Density2D)> {
    params.validate()?;
    let (singles, pairs) = sample_pixels(gray, params, rng);
    let firsts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let seconds: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let vars = [
        sample_variance(&singles),
        sample_variance(&firsts),
        sample_variance(&seconds),
    ];
    if let Some(&variance) = vars.iter().find(|&&v| !(v >= params.min_variance)) {
        return Err(Error::DegenerateTexture {
            variance,
            min_variance: params.min_variance,
        });
    }
    let n = params.n_pairs;
    let marginal = Density1D::fit(&singles, scott_bandwidth(vars[0].sqrt(), n, 1), params.grid_bins);
    let joint = Density2D::fit(
        &pairs,
        (
            scott_bandwidth(vars[1].sqrt(), n, 2),
            scott_bandwidth(vars[2].sqrt(), n, 2),
        ),
        params.grid_bins,
    );
    Ok((marginal, joint))
}
