//! Direct-illumination shading of a material under the sun.
//!
//! Orthographic top-down camera, single bounce, no shadows:
//!
//! ```text
//! diffuse  = albedo * (1 - metallic) * (ambient + L_I * c(L_T) * max(0, N.L)) * AO
//! specular = L_I * c(L_T) * F0 * (1 - roughness) * max(0, N.H)^(2 / (roughness^4 + eps) - 2)   if N.L > 0
//! F0       = mix(0.04, albedo, metallic)
//! pixel    = (x / (1 + x))^(1 / 2.2)
//! ```
//!
//! The ambient term is untinted sky light; only the sun carries the
//! black-body color.

use crate::error::{Error, Result};
use crate::raster::{normalize3, GrayImage, RgbImage, VectorMap};
use crate::scene::light::{kelvin_to_rgb, SunLight};
use crate::scene::texture::TextureSet;

const ROUGHNESS_EPS: f64 = 1e-4;
const DIELECTRIC_F0: f64 = 0.04;
const DISPLAY_GAMMA: f64 = 2.2;

#[derive(Clone, Debug, PartialEq)]
pub struct ShadeOutput {
    pub image: RgbImage,
    pub normal_map: VectorMap,
    /// `1 - height`: distance below the highest representable surface level.
    pub depth_map: GrayImage,
}

pub fn tone_map(x: f64) -> f64 {
    let x = x.max(0.0);
    (x / (1.0 + x)).powf(1.0 / DISPLAY_GAMMA)
}

pub fn specular_exponent(roughness: f64) -> f64 {
    2.0 / (roughness.powi(4) + ROUGHNESS_EPS) - 2.0
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn shade(material: &TextureSet, light: &SunLight, ambient: f64) -> Result<ShadeOutput> {
    material.validate()?;
    light.validate()?;
    if !(ambient.is_finite() && ambient >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ambient must be non-negative, got {ambient}"
        )));
    }
    let (w, h) = material.dims();
    let tint = kelvin_to_rgb(light.color_temperature)?;
    let sun = light.direction();
    let to_light = [-sun[0], -sun[1], -sun[2]];
    let view = [0.0, 0.0, 1.0];
    let half = normalize3([to_light[0] + view[0], to_light[1] + view[1], to_light[2] + view[2]]);

    let mut pixels = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let (x, y) = (i % w, i / w);
        let n = material.normal.get(x, y);
        let albedo = material.albedo.get(x, y);
        let metallic = material.metallic.get(x, y);
        let rough = material.roughness.get(x, y);
        let ao = material.ambient_occlusion.get(x, y);

        let n_dot_l = dot(n, to_light);
        let direct = light.intensity * n_dot_l.max(0.0);
        let spec = match half {
            Some(hv) if n_dot_l > 0.0 => {
                light.intensity
                    * (1.0 - rough)
                    * dot(n, hv).max(0.0).powf(specular_exponent(rough))
            }
            _ => 0.0,
        };
        let mut px = [0.0; 3];
        for c in 0..3 {
            let diffuse = albedo[c] * (1.0 - metallic) * (ambient + direct * tint[c]) * ao;
            let f0 = DIELECTRIC_F0 * (1.0 - metallic) + albedo[c] * metallic;
            px[c] = tone_map(diffuse + spec * tint[c] * f0);
        }
        pixels.push(px);
    }

    Ok(ShadeOutput {
        image: RgbImage::from_vec(w, h, pixels)?,
        normal_map: material.normal.clone(),
        depth_map: GrayImage::from_vec(
            w,
            h,
            material.height.data().iter().map(|v| 1.0 - v).collect(),
        )?,
    })
}
