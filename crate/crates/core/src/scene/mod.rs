//! Full sample synthesis: material, crack and sun combined into an RGB image
//! with ground-truth mask, normal and depth maps.
//!
//! Sub-seeds of a sample seed `s` (see [`crate::seed::child_seed`]):
//!
//! | stream | use                         |
//! |--------|-----------------------------|
//! | 0      | fractal crack polyline      |
//! | 1      | crack placement and blur    |
//! | 2      | procedural texture          |
//! | 3      | sun hour angle (beta)       |

pub mod light;
pub mod shade;
pub mod texture;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::crack_raster::{render_crack_layer, to_mask, PlacementParams};
use crate::error::{Error, Result};
use crate::fractal::{generate_crack_polyline, FractalParams};
use crate::raster::{BinaryMask, GrayImage, RgbImage, VectorMap};
use crate::seed::{child_seed, rng_from_seed};

pub use light::{kelvin_to_rgb, sample_beta, sun_direction, SunLight};
pub use shade::{shade, ShadeOutput};
pub use texture::{compose_material, load_texture_dir, procedural_concrete, TextureSet};

pub const STREAM_FRACTAL: u64 = 0;
pub const STREAM_PLACEMENT: u64 = 1;
pub const STREAM_TEXTURE: u64 = 2;
pub const STREAM_LIGHT: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SunConfig {
    pub intensity: f64,
    pub color_temperature: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SunConfig {
    fn default() -> Self {
        let d = SunLight::default();
        SunConfig {
            intensity: d.intensity,
            color_temperature: d.color_temperature,
            alpha: d.alpha,
            gamma: d.gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    pub fractal: FractalParams,
    pub placement: PlacementParams,
    pub sun: SunConfig,
    pub ambient: f64,
    /// Albedo attenuation on the crack, `[0, 1]`.
    pub darken: f64,
    /// Height removed on the crack, `[0, 1]`.
    pub carve: f64,
    /// Directory of user texture maps; procedural concrete when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub texture_dir: Option<PathBuf>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            width: 512,
            height: 512,
            fractal: FractalParams::default(),
            placement: PlacementParams::default(),
            sun: SunConfig::default(),
            ambient: 0.15,
            darken: 0.8,
            carve: 0.5,
            texture_dir: None,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < texture::MIN_TEXTURE_SIZE || self.height < texture::MIN_TEXTURE_SIZE {
            return Err(Error::InvalidParameter(format!(
                "canvas {}x{} below {min}x{min}",
                self.width,
                self.height,
                min = texture::MIN_TEXTURE_SIZE
            )));
        }
        self.fractal.validate()?;
        self.placement.validate()?;
        SunLight {
            intensity: self.sun.intensity,
            color_temperature: self.sun.color_temperature,
            alpha: self.sun.alpha,
            beta: 0.0,
            gamma: self.sun.gamma,
        }
        .validate()?;
        if !(self.ambient.is_finite() && self.ambient >= 0.0) {
            return Err(Error::InvalidParameter(format!("ambient {} < 0", self.ambient)));
        }
        for (name, v) in [("darken", self.darken), ("carve", self.carve)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub fractal: FractalParams,
    pub placement: PlacementParams,
    pub sun: SunLight,
    pub texture_id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedSample {
    pub image: RgbImage,
    pub gt_mask: BinaryMask,
    pub normal_map: VectorMap,
    pub depth_map: GrayImage,
    pub crack_layer: GrayImage,
    pub meta: SampleMeta,
}

pub fn render_sample(config: &SceneConfig, seed: u64) -> Result<RenderedSample> {
    let textures = match &config.texture_dir {
        Some(dir) => Some(load_texture_dir(dir, config.width, config.height)?),
        None => None,
    };
    render_sample_with(config, seed, textures.as_ref())
}

/// As [`render_sample`], with preloaded user textures (the procedural
/// fallback is used when `textures` is `None`).
pub fn render_sample_with(
    config: &SceneConfig,
    seed: u64,
    textures: Option<&TextureSet>,
) -> Result<RenderedSample> {
    config.validate()?;
    let canvas = (config.width, config.height);

    let polyline = generate_crack_polyline(&config.fractal, child_seed(seed, STREAM_FRACTAL))?;
    let mut placement_rng = rng_from_seed(child_seed(seed, STREAM_PLACEMENT));
    let crack = render_crack_layer(&polyline, canvas, &config.placement, &mut placement_rng)?;
    let gt_mask = to_mask(&crack, config.placement.mask_threshold)?;

    let (base, texture_id) = match textures {
        Some(t) => {
            if t.dims() != canvas {
                return Err(Error::DimensionMismatch {
                    expected: canvas,
                    found: t.dims(),
                });
            }
            let id = config
                .texture_dir
                .as_ref()
                .map_or_else(|| "user".to_string(), |d| format!("dir:{}", d.display()));
            (t.clone(), id)
        }
        None => {
            let tex_seed = child_seed(seed, STREAM_TEXTURE);
            (
                texture::procedural_concrete_sized(tex_seed, config.width, config.height)?,
                format!("procedural:{tex_seed:016x}"),
            )
        }
    };
    let material = compose_material(&base, &crack, config.darken, config.carve)?;

    let sun = SunLight {
        intensity: config.sun.intensity,
        color_temperature: config.sun.color_temperature,
        alpha: config.sun.alpha,
        beta: sample_beta(&mut rng_from_seed(child_seed(seed, STREAM_LIGHT))),
        gamma: config.sun.gamma,
    };
    let shaded = shade(&material, &sun, config.ambient)?;

    Ok(RenderedSample {
        image: shaded.image,
        gt_mask,
        normal_map: shaded.normal_map,
        depth_map: shaded.depth_map,
        crack_layer: crack,
        meta: SampleMeta {
            seed,
            fractal: config.fractal,
            placement: config.placement.clone(),
            sun,
            texture_id,
        },
    })
}
