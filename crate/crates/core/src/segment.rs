//! Training-free crack segmentation: low-affinity pixels are texture
//! anomalies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmi::AffinityMap;
use crate::raster::BinaryMask;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterParams {
    /// Pixels with affinity at or below this empirical quantile are marked.
    pub quantile: f64,
    pub min_component_px: usize,
    pub closing_radius: u32,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        SegmenterParams {
            quantile: 0.02,
            min_component_px: 20,
            closing_radius: 1,
        }
    }
}

impl SegmenterParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantile) {
            return Err(Error::InvalidParameter(format!(
                "quantile {} outside [0, 1]",
                self.quantile
            )));
        }
        Ok(())
    }
}

/// Lower empirical quantile: the value at sorted index `floor(q * (n - 1))`.
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[((q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64).floor()) as usize]
}

/// Marks pixels with affinity <= the `q` quantile (before any morphology).
pub fn threshold_by_quantile(affinity: &AffinityMap, q: f64) -> BinaryMask {
    let t = empirical_quantile(affinity.data(), q);
    BinaryMask::from_vec(
        affinity.width(),
        affinity.height(),
        affinity.data().iter().map(|&v| v <= t).collect(),
    )
    .expect("dimensions match")
}

fn disk(radius: u32) -> Vec<(isize, isize)> {
    let r = radius as isize;
    (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect()
}

/// Binary dilation by a Euclidean disk.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    let se = disk(radius);
    let (w, h) = mask.dims();
    let mut out = BinaryMask::new(w, h);
    for (x, y) in mask.points() {
        for &(dx, dy) in &se {
            let (qx, qy) = (x as isize + dx, y as isize + dy);
            if qx >= 0 && qy >= 0 && (qx as usize) < w && (qy as usize) < h {
                out.set(qx as usize, qy as usize, true);
            }
        }
    }
    out
}

/// Binary erosion by a Euclidean disk; pixels outside the image count as set.
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    let se = disk(radius);
    let (w, h) = mask.dims();
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let keep = se.iter().all(|&(dx, dy)| {
                let (qx, qy) = (x as isize + dx, y as isize + dy);
                qx < 0 || qy < 0 || qx as usize >= w || qy as usize >= h || mask.get(qx as usize, qy as usize)
            });
            out.set(x, y, keep);
        }
    }
    out
}

/// Dilation followed by erosion, computed as if the image extended with
/// background beyond its borders; never removes a set pixel.
pub fn closing(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let pad = radius as usize;
    let (w, h) = mask.dims();
    let mut padded = BinaryMask::new(w + 2 * pad, h + 2 * pad);
    for (x, y) in mask.points() {
        padded.set(x + pad, y + pad, true);
    }
    let closed = erode(&dilate(&padded, radius), radius);
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, closed.get(x + pad, y + pad));
        }
    }
    out
}

/// 8-connected component labels (0 = background, components numbered from 1)
/// and the size of each component.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data()[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        let mut size = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (qx, qy) = (x + dx, y + dy);
                    if qx < 0 || qy < 0 || qx as usize >= w || qy as usize >= h {
                        continue;
                    }
                    let j = qy as usize * w + qx as usize;
                    if mask.data()[j] && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

pub fn remove_small_components(mask: &BinaryMask, min_size: usize) -> BinaryMask {
    if min_size <= 1 {
        return mask.clone();
    }
    let (labels, sizes) = label_components(mask);
    let data = labels
        .iter()
        .map(|&l| l != 0 && sizes[l as usize - 1] >= min_size)
        .collect();
    BinaryMask::from_vec(mask.width(), mask.height(), data).expect("dimensions match")
}

/// Quantile threshold, disk closing, then removal of small 8-connected
/// components.
pub fn segment_by_affinity(affinity: &AffinityMap, params: &SegmenterParams) -> Result<BinaryMask> {
    params.validate()?;
    let raw = threshold_by_quantile(affinity, params.quantile);
    let closed = closing(&raw, params.closing_radius);
    Ok(remove_small_components(&closed, params.min_component_px))
}
