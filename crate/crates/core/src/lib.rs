//! Synthetic cracked-concrete images with exact ground truth, PMI affinity
//! maps that flag cracks as texture anomalies, a training-free baseline
//! segmenter, and segmentation metrics (F1, tolerance F1, clDice, Hausdorff).

pub mod cli;
pub mod config;
pub mod crack_raster;
pub mod dataset;
pub mod error;
pub mod fractal;
pub mod metrics;
pub mod pmi;
pub mod raster;
pub mod scene;
pub mod seed;
pub mod segment;

pub use error::{Error, Result};
