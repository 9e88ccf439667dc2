//! Single TOML configuration covering every pipeline stage. Every table and
//! key is optional; omitted values take their defaults.
//!
//! ```toml
//! [scene]
//! width = 512
//! height = 512
//! ambient = 0.15
//!
//! [scene.fractal]
//! depth = 7
//!
//! [pmi]
//! tau = 2.25
//!
//! [segmenter]
//! quantile = 0.02
//!
//! [metrics]
//! theta = 10
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsParams;
use crate::pmi::PmiParams;
use crate::scene::SceneConfig;
use crate::segment::SegmenterParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub scene: SceneConfig,
    pub pmi: PmiParams,
    pub segmenter: SegmenterParams,
    pub metrics: MetricsParams,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.pmi.validate()?;
        self.segmenter.validate()?;
        self.metrics.validate()
    }
}
