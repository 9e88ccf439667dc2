//! Sun parameterization: intensity, black-body color and Euler orientation.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::normalize3;
use crate::seed::Rng;

pub const MIN_KELVIN: f64 = 1000.0;
pub const MAX_KELVIN: f64 = 40000.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SunLight {
    pub intensity: f64,
    /// Kelvin.
    pub color_temperature: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for SunLight {
    fn default() -> Self {
        SunLight {
            intensity: 3.3,
            color_temperature: 5800.0,
            alpha: FRAC_PI_3,
            beta: 0.0,
            gamma: 0.0,
        }
    }
}

impl SunLight {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sun intensity must be non-negative, got {}",
                self.intensity
            )));
        }
        check_kelvin(self.color_temperature)?;
        if ![self.alpha, self.beta, self.gamma].iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidParameter("sun angles must be finite".into()));
        }
        Ok(())
    }

    pub fn direction(&self) -> [f64; 3] {
        sun_direction(self.alpha, self.beta, self.gamma)
    }
}

/// Hour-of-day angle, uniform on `[-pi/6, pi/6]`.
pub fn sample_beta(rng: &mut Rng) -> f64 {
    rng.random_range(-FRAC_PI_6..=FRAC_PI_6)
}

/// Direction the sunlight travels: `Rz(gamma) Ry(beta) Rx(alpha) (0, 0, -1)`
/// (extrinsic rotations about X, then Y, then Z).
pub fn sun_direction(alpha: f64, beta: f64, gamma: f64) -> [f64; 3] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    // Rx
    let v = [0.0, sa, -ca];
    // Ry
    let v = [cb * v[0] + sb * v[2], v[1], -sb * v[0] + cb * v[2]];
    // Rz
    let v = [cg * v[0] - sg * v[1], sg * v[0] + cg * v[1], v[2]];
    normalize3(v).expect("rotation of a unit vector")
}

fn check_kelvin(kelvin: f64) -> Result<()> {
    if !(MIN_KELVIN..=MAX_KELVIN).contains(&kelvin) {
        return Err(Error::InvalidParameter(format!(
            "color temperature {kelvin} K outside [{MIN_KELVIN}, {MAX_KELVIN}]"
        )));
    }
    Ok(())
}

/// Coefficients of the piecewise black-body fit (Tanner Helland), in 8-bit
/// units over `t = kelvin / 100`:
///
/// | channel | range      | formula                                  |
/// |---------|------------|------------------------------------------|
/// | red     | t <= 66    | 255                                      |
/// | red     | t > 66     | `RED_HOT.0 * (t - 60)^RED_HOT.1`          |
/// | green   | t <= 66    | `GREEN_COOL.0 * ln(t) + GREEN_COOL.1`     |
/// | green   | t > 66     | `GREEN_HOT.0 * (t - 60)^GREEN_HOT.1`      |
/// | blue    | t >= 66    | 255                                      |
/// | blue    | t <= 19    | 0                                        |
/// | blue    | otherwise  | `BLUE_MID.0 * ln(t - 10) + BLUE_MID.1`    |
pub mod kelvin_fit {
    pub const RED_HOT: (f64, f64) = (329.698727446, -0.1332047592);
    pub const GREEN_COOL: (f64, f64) = (99.4708025861, -161.1195681661);
    pub const GREEN_HOT: (f64, f64) = (288.1221695283, -0.0755148492);
    pub const BLUE_MID: (f64, f64) = (138.5177312231, -305.0447927307);
}

/// Linear RGB tint of a black-body radiator, each channel in `[0, 1]`.
pub fn kelvin_to_rgb(kelvin: f64) -> Result<[f64; 3]> {
    use kelvin_fit::*;
    check_kelvin(kelvin)?;
    let t = kelvin / 100.0;
    let r = if t <= 66.0 {
        255.0
    } else {
        RED_HOT.0 * (t - 60.0).powf(RED_HOT.1)
    };
    let g = if t <= 66.0 {
        GREEN_COOL.0 * t.ln() + GREEN_COOL.1
    } else {
        GREEN_HOT.0 * (t - 60.0).powf(GREEN_HOT.1)
    };
    let b = if t >= 66.0 {
        255.0
    } else if t <= 19.0 {
        0.0
    } else {
        BLUE_MID.0 * (t - 10.0).ln() + BLUE_MID.1
    };
    Ok([r, g, b].map(|c: f64| c.clamp(0.0, 255.0) / 255.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn identity_rotation_points_down() {
        assert!(close(sun_direction(0.0, 0.0, 0.0), [0.0, 0.0, -1.0], 1e-15));
    }

    #[test]
    fn default_elevation() {
        let v = sun_direction(FRAC_PI_3, 0.0, 0.0);
        assert!(close(v, [0.0, 3f64.sqrt() / 2.0, -0.5], 1e-12));
    }

    #[test]
    fn beta_tilts_about_y() {
        // Ry(beta) of (0, 0, -1) is (-sin beta, 0, -cos beta).
        let b = 0.3;
        let v = sun_direction(0.0, b, 0.0);
        assert!(close(v, [-b.sin(), 0.0, -b.cos()], 1e-12));
    }

    #[test]
    fn beta_support_and_mean() {
        let mut rng = rng_from_seed(17);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_beta(&mut rng)).collect();
        assert!(draws.iter().all(|b| (-FRAC_PI_6..=FRAC_PI_6).contains(b)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert_eq!(sample_beta(&mut rng_from_seed(5)), sample_beta(&mut rng_from_seed(5)));
    }

    #[test]
    fn kelvin_golden_values() {
        assert_eq!(kelvin_to_rgb(6600.0).unwrap(), [1.0, 1.0, 1.0]);
        let warm = kelvin_to_rgb(5800.0).unwrap();
        assert!(close(warm, [1.0, 0.9520625762669506, 0.9066085819954205], 1e-12));
        assert!(warm[0] >= warm[1] && warm[1] >= warm[2]);
        assert!(close(kelvin_to_rgb(1000.0).unwrap(), [1.0, 0.2663545845364998, 0.0], 1e-12));
        assert!(close(kelvin_to_rgb(40000.0).unwrap(), [0.5948014942531991, 0.7275657510810973, 1.0], 1e-12));
    }

    #[test]
    fn kelvin_range_checked() {
        assert!(kelvin_to_rgb(999.0).is_err());
        assert!(kelvin_to_rgb(40001.0).is_err());
        assert!(kelvin_to_rgb(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn direction_is_unit(a in -10.0f64..10.0, b in -10.0f64..10.0, g in -10.0f64..10.0) {
            let v = sun_direction(a, b, g);
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            prop_assert!((n - 1.0).abs() < 1e-9);
        }

        #[test]
        fn kelvin_channels_in_unit_range(k in MIN_KELVIN..=MAX_KELVIN) {
            let c = kelvin_to_rgb(k).unwrap();
            prop_assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
