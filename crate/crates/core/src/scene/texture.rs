//! PBR-style material maps: procedural concrete, loading from disk, and
//! compositing a crack layer into the material.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{normalize3, GrayImage, RgbImage, VectorMap};
use crate::seed::{child_seed, mix64};

pub const MIN_TEXTURE_SIZE: usize = 64;

/// Pixels of lateral distance per unit of height when deriving normals.
pub const NORMAL_STRENGTH: f64 = 8.0;

/// Material maps sharing one resolution. Normals use x right, y down (image
/// rows) and z towards the camera.
#[derive(Clone, Debug, PartialEq)]
pub struct TextureSet {
    pub albedo: RgbImage,
    pub metallic: GrayImage,
    pub roughness: GrayImage,
    pub normal: VectorMap,
    pub height: GrayImage,
    pub ambient_occlusion: GrayImage,
}

impl TextureSet {
    pub fn dims(&self) -> (usize, usize) {
        self.albedo.dims()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        for found in [
            self.metallic.dims(),
            self.roughness.dims(),
            self.normal.dims(),
            self.height.dims(),
            self.ambient_occlusion.dims(),
        ] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        if let Some(n) = self
            .normal
            .data()
            .iter()
            .find(|n| ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() > 1e-3)
        {
            return Err(Error::InvalidParameter(format!("normal {n:?} is not unit length")));
        }
        Ok(())
    }
}

/// Central-difference normals, clamp-to-edge.
pub fn normals_from_height(height: &GrayImage, strength: f64) -> VectorMap {
    let (w, h) = height.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let gx = (height.get(xr, y) - height.get(xl, y)) / (xr - xl).max(1) as f64;
            let gy = (height.get(x, yd) - height.get(x, yu)) / (yd - yu).max(1) as f64;
            out.push(normalize3([-strength * gx, -strength * gy, 1.0]).expect("z = 1"));
        }
    }
    VectorMap::from_vec(w, h, out).expect("dimensions match")
}

fn lattice(seed: u64, ix: i64, iy: i64) -> f64 {
    let h = mix64(seed ^ mix64(ix as u64).wrapping_add(mix64(iy as u64 ^ 0xD6E8_FEB8_6659_FD93)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise with smoothstep fade, in `[0, 1)`.
fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smoothstep(x - fx), smoothstep(y - fy));
    let v00 = lattice(seed, ix, iy);
    let v10 = lattice(seed, ix + 1, iy);
    let v01 = lattice(seed, ix, iy + 1);
    let v11 = lattice(seed, ix + 1, iy + 1);
    let top = v00 + (v10 - v00) * tx;
    let bottom = v01 + (v11 - v01) * tx;
    top + (bottom - top) * ty
}

/// Fractal sum of `octaves` value-noise layers, normalized to `[0, 1)`.
fn fbm(seed: u64, x: f64, y: f64, base_freq: f64, octaves: u32) -> f64 {
    let (mut freq, mut amp, mut sum, mut norm) = (base_freq, 1.0, 0.0, 0.0);
    for o in 0..octaves {
        sum += amp * value_noise(child_seed(seed, o as u64), x * freq, y * freq);
        norm += amp;
        freq *= 2.0;
        amp *= 0.5;
    }
    sum / norm
}

fn box_blur(img: &GrayImage, radius: usize) -> GrayImage {
    let (w, h) = img.dims();
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (mut s, mut n) = (0.0, 0.0);
                for d in -(radius as isize)..=radius as isize {
                    let (sx, sy) = if horizontal {
                        (x as isize + d, y as isize)
                    } else {
                        (x as isize, y as isize + d)
                    };
                    if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                        s += src[sy as usize * w + sx as usize];
                        n += 1.0;
                    }
                }
                out[y * w + x] = s / n;
            }
        }
        out
    };
    let tmp = pass(img.data(), true);
    GrayImage::from_vec(w, h, pass(&tmp, false)).expect("dimensions match")
}

pub fn procedural_concrete(seed: u64, size: usize) -> Result<TextureSet> {
    procedural_concrete_sized(seed, size, size)
}

/// Deterministic concrete-like material. Height is multi-octave value noise
/// with sparse pores; albedo is a warm gray modulated by low-frequency noise
/// and per-pixel aggregate grain.
pub fn procedural_concrete_sized(seed: u64, width: usize, height: usize) -> Result<TextureSet> {
    if width < MIN_TEXTURE_SIZE || height < MIN_TEXTURE_SIZE {
        return Err(Error::InvalidParameter(format!(
            "procedural texture needs at least {MIN_TEXTURE_SIZE}x{MIN_TEXTURE_SIZE}, got {width}x{height}"
        )));
    }
    let s_height = child_seed(seed, 0);
    let s_tone = child_seed(seed, 1);
    let s_rough = child_seed(seed, 2);
    let s_grain = child_seed(seed, 3);
    let s_pore = child_seed(seed, 4);

    let mut heights = Vec::with_capacity(width * height);
    let mut albedo = Vec::with_capacity(width * height);
    let mut rough = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64, y as f64);
            let pore = value_noise(s_pore, fx / 3.0, fy / 3.0);
            let pit = ((pore - 0.93) / 0.07).max(0.0);
            let hgt = 0.35 + 0.5 * fbm(s_height, fx, fy, 1.0 / 96.0, 6) - 0.25 * pit;
            heights.push(hgt);

            let tone = fbm(s_tone, fx, fy, 1.0 / 160.0, 3);
            let grain = lattice(s_grain, x as i64, y as i64) - 0.5;
            let base = 0.56 + 0.22 * (tone - 0.5) + 0.06 * grain - 0.12 * pit;
            albedo.push([base * 1.0, base * 0.985, base * 0.95]);

            rough.push(0.5 + 0.4 * fbm(s_rough, fx, fy, 1.0 / 24.0, 3));
        }
    }
    let height_map = GrayImage::from_vec(width, height, heights)?;
    let blurred = box_blur(&height_map, 4);
    let ao = GrayImage::from_vec(
        width,
        height,
        blurred
            .data()
            .iter()
            .zip(height_map.data())
            .map(|(b, h)| 1.0 - (4.0 * (b - h).max(0.0)).min(0.6))
            .collect(),
    )?;
    Ok(TextureSet {
        albedo: RgbImage::from_vec(width, height, albedo)?,
        metallic: GrayImage::new(width, height),
        roughness: GrayImage::from_vec(width, height, rough)?,
        normal: normals_from_height(&height_map, NORMAL_STRENGTH),
        height: height_map,
        ambient_occlusion: ao,
    })
}

fn tile_gray(src: &GrayImage, width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| src.get(x % src.width(), y % src.height()))
}

fn tile_rgb(src: &RgbImage, width: usize, height: usize) -> RgbImage {
    let data = (0..width * height)
        .map(|i| src.get((i % width) % src.width(), (i / width) % src.height()))
        .collect();
    RgbImage::from_vec(width, height, data).expect("dimensions match")
}

/// Loads `albedo.png` and `height.png` (required) plus `roughness.png`,
/// `normal.png` and `ao.png` (optional) from `dir`, tiled or cropped to
/// `width x height`. Metallic is always zero. Missing optional maps default to
/// roughness 0.7, normals derived from height, and no occlusion.
pub fn load_texture_dir(dir: &Path, width: usize, height: usize) -> Result<TextureSet> {
    let optional = |name: &str| {
        let p = dir.join(name);
        p.exists().then_some(p)
    };
    let albedo = RgbImage::load_png(&dir.join("albedo.png"))?;
    let height_src = GrayImage::load_png(&dir.join("height.png"))?;
    let height_map = tile_gray(&height_src, width, height);
    let roughness = match optional("roughness.png") {
        Some(p) => tile_gray(&GrayImage::load_png(&p)?, width, height),
        None => GrayImage::filled(width, height, 0.7),
    };
    let normal = match optional("normal.png") {
        Some(p) => VectorMap::decode_unit(&tile_rgb(&RgbImage::load_png(&p)?, width, height)),
        None => normals_from_height(&height_map, NORMAL_STRENGTH),
    };
    let ambient_occlusion = match optional("ao.png") {
        Some(p) => tile_gray(&GrayImage::load_png(&p)?, width, height),
        None => GrayImage::filled(width, height, 1.0),
    };
    let set = TextureSet {
        albedo: tile_rgb(&albedo, width, height),
        metallic: GrayImage::new(width, height),
        roughness,
        normal,
        height: height_map,
        ambient_occlusion,
    };
    set.validate()?;
    Ok(set)
}

/// Darkens albedo and carves height along the crack layer.
///
/// `albedo' = albedo * (1 - darken * crack)`, `height' = max(0, height - carve * crack)`.
/// Normals are updated with the gradient of the height change, which equals
/// re-deriving them from `height'` when the input normals were derived from
/// `height`, and keeps any finer normal detail of loaded maps elsewhere.
pub fn compose_material(
    textures: &TextureSet,
    crack: &GrayImage,
    darken: f64,
    carve: f64,
) -> Result<TextureSet> {
    if crack.dims() != textures.dims() {
        return Err(Error::DimensionMismatch {
            expected: textures.dims(),
            found: crack.dims(),
        });
    }
    for (name, v) in [("darken", darken), ("carve", carve)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} {v} outside [0, 1]")));
        }
    }
    let (w, h) = textures.dims();
    let albedo = textures
        .albedo
        .data()
        .iter()
        .zip(crack.data())
        .map(|(a, &c)| a.map(|ch| ch * (1.0 - darken * c)))
        .collect();
    let new_height: Vec<f64> = textures
        .height
        .data()
        .iter()
        .zip(crack.data())
        .map(|(&hv, &c)| (hv - carve * c).max(0.0))
        .collect();
    let delta: Vec<f64> = new_height
        .iter()
        .zip(textures.height.data())
        .map(|(n, o)| n - o)
        .collect();

    let mut normals = textures.normal.data().to_vec();
    for y in 0..h {
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let gx = (delta[y * w + xr] - delta[y * w + xl]) / (xr - xl).max(1) as f64;
            let gy = (delta[yd * w + x] - delta[yu * w + x]) / (yd - yu).max(1) as f64;
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            let n = normals[y * w + x];
            let z = n[2].max(1e-6);
            normals[y * w + x] = normalize3([
                n[0] / z - NORMAL_STRENGTH * gx,
                n[1] / z - NORMAL_STRENGTH * gy,
                1.0,
            ])
            .expect("z = 1");
        }
    }

    Ok(TextureSet {
        albedo: RgbImage::from_vec(w, h, albedo)?,
        metallic: textures.metallic.clone(),
        roughness: textures.roughness.clone(),
        normal: VectorMap::from_vec(w, h, normals)?,
        height: GrayImage::from_vec(w, h, new_height)?,
        ambient_occlusion: textures.ambient_occlusion.clone(),
    })
}
