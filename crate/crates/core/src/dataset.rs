//! Dataset generation with a reproducible JSON manifest.
//!
//! Sample `i` of a run with global seed `g` uses seed
//! `child_seed(g, i)` and id `sample_{i:05}`, and writes
//! `<id>_img.png` (8-bit RGB), `<id>_gt.png` (8-bit {0, 255}),
//! `<id>_normal.png` (8-bit RGB, `(n + 1) / 2`) and `<id>_depth.png`
//! (16-bit gray). Files are written via a temporary file and rename, and the
//! manifest is written once all samples are done.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::scene::{load_texture_dir, render_sample_with, RenderedSample};
use crate::seed::child_seed;

pub const MANIFEST_SCHEMA_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFiles {
    pub image: String,
    pub gt: String,
    pub normal: String,
    pub depth: String,
}

impl SampleFiles {
    pub fn for_id(id: &str) -> Self {
        SampleFiles {
            image: format!("{id}_img.png"),
            gt: format!("{id}_gt.png"),
            normal: format!("{id}_normal.png"),
            depth: format!("{id}_depth.png"),
        }
    }

    pub fn names(&self) -> [&str; 4] {
        [&self.image, &self.gt, &self.normal, &self.depth]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub seed: u64,
    /// File names relative to the manifest's directory.
    pub files: SampleFiles,
    pub gt_pixels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: String,
    pub global_seed: u64,
    pub config: Config,
    pub samples: Vec<SampleRecord>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "{}: unsupported schema version {:?}",
                path.display(),
                manifest.schema_version
            )));
        }
        let mut ids: Vec<&str> = manifest.samples.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Manifest(format!("duplicate sample id {}", w[0])));
        }
        manifest.config.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn sample_id(index: u64) -> String {
    format!("sample_{index:05}")
}

pub fn sample_seed(global_seed: u64, index: u64) -> u64 {
    child_seed(global_seed, index)
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn write_sample(out_dir: &Path, files: &SampleFiles, sample: &RenderedSample) -> Result<()> {
    write_atomic(&out_dir.join(&files.image), &sample.image.encode_png8())?;
    write_atomic(&out_dir.join(&files.gt), &sample.gt_mask.encode_png())?;
    write_atomic(
        &out_dir.join(&files.normal),
        &sample.normal_map.encode_unit().encode_png8(),
    )?;
    write_atomic(&out_dir.join(&files.depth), &sample.depth_map.encode_png16())
}

/// Runs `f` on a pool of `jobs` threads (all cores when 0).
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn render_all(
    config: &Config,
    out_dir: &Path,
    seeds: &[(String, u64)],
    jobs: usize,
) -> Result<Vec<SampleRecord>> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let textures = match &config.scene.texture_dir {
        Some(dir) => Some(load_texture_dir(dir, config.scene.width, config.scene.height)?),
        None => None,
    };
    with_pool(jobs, || {
        seeds
            .par_iter()
            .map(|(id, seed)| {
                let sample = render_sample_with(&config.scene, *seed, textures.as_ref())?;
                let files = SampleFiles::for_id(id);
                write_sample(out_dir, &files, &sample)?;
                Ok(SampleRecord {
                    id: id.clone(),
                    seed: *seed,
                    files,
                    gt_pixels: sample.gt_mask.count(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

fn finish(out_dir: &Path, manifest: DatasetManifest) -> Result<DatasetManifest> {
    write_atomic(&out_dir.join(MANIFEST_FILE), manifest.to_json().as_bytes())?;
    Ok(manifest)
}

/// Renders `count` samples into `out_dir` and writes `manifest.json` there.
pub fn generate_dataset(
    config: &Config,
    out_dir: &Path,
    count: u64,
    global_seed: u64,
    jobs: usize,
) -> Result<DatasetManifest> {
    let seeds: Vec<(String, u64)> = (0..count)
        .map(|i| (sample_id(i), sample_seed(global_seed, i)))
        .collect();
    let samples = render_all(config, out_dir, &seeds, jobs)?;
    finish(
        out_dir,
        DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION.to_string(),
            global_seed,
            config: config.clone(),
            samples,
        },
    )
}

/// Re-renders every sample of an existing manifest (same config, ids and
/// seeds) into `out_dir`.
pub fn regenerate_from_manifest(manifest_path: &Path, out_dir: &Path, jobs: usize) -> Result<DatasetManifest> {
    let old = DatasetManifest::load(manifest_path)?;
    let seeds: Vec<(String, u64)> = old.samples.iter().map(|s| (s.id.clone(), s.seed)).collect();
    let samples = render_all(&old.config, out_dir, &seeds, jobs)?;
    finish(out_dir, DatasetManifest { samples, ..old })
}

/// Paths of every file a manifest references, resolved against `dir`.
pub fn manifest_files(manifest: &DatasetManifest, dir: &Path) -> Vec<PathBuf> {
    manifest
        .samples
        .iter()
        .flat_map(|s| s.files.names().map(|n| dir.join(n)))
        .collect()
}
