//! Command-line front end: `generate`, `affinity`, `segment`, `evaluate`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 when some items
//! of a batch failed (the rest are still written).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::dataset::{generate_dataset, regenerate_from_manifest, with_pool, write_atomic};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, write_csv, MetricsReport};
use crate::pmi::{affinity_map, to_luminance, AffinityMap};
use crate::raster::{BinaryMask, RgbImage};
use crate::seed::{mix64, rng_from_seed};
use crate::segment::segment_by_affinity;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "CRACKGEN_JOBS";

/// File-name suffixes (before `.png` / `.f32`) that are stripped to obtain a
/// sample id.
const ID_SUFFIXES: [&str; 5] = ["_gt", "_pred", "_img", "_mask", "_affinity"];
/// Auxiliary rasters that are never treated as masks or input images.
const AUX_SUFFIXES: [&str; 3] = ["_normal", "_depth", "_affinity"];

#[derive(Debug, Parser)]
#[command(name = "crackgen", version, about = "Synthetic crack images, PMI affinity and segmentation metrics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = JOBS_ENV, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a dataset of cracked-surface samples with a manifest.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-render the samples of an existing manifest instead.
        #[arg(long, conflicts_with_all = ["count", "seed", "config"])]
        from_manifest: Option<PathBuf>,
    },
    /// Compute PMI affinity maps for images or directories of images.
    Affinity {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Threshold raw affinity maps into crack masks.
    Segment {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quantile: Option<f64>,
    },
    /// Score predicted masks against ground truth into a CSV.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        theta: Option<u32>,
    },
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let jobs = cli.global.jobs;
    let mut config = load_config(cli.global.config.as_deref())?;
    match cli.command {
        Command::Generate { out, count, seed, from_manifest } => {
            let manifest = match from_manifest {
                Some(m) => regenerate_from_manifest(&m, &out, jobs)?,
                None => generate_dataset(&config, &out, count, seed, jobs)?,
            };
            eprintln!("wrote {} samples to {}", manifest.samples.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Affinity { inputs, out, seed } => cmd_affinity(&config, &inputs, &out, seed, jobs),
        Command::Segment { inputs, out, quantile } => {
            if let Some(q) = quantile {
                config.segmenter.quantile = q;
            }
            config.validate()?;
            cmd_segment(&config, &inputs, &out, jobs)
        }
        Command::Evaluate { gt, pred, out, theta } => {
            if let Some(t) = theta {
                config.metrics.theta = t;
            }
            config.validate()?;
            cmd_evaluate(&config, &gt, &pred, &out, jobs)
        }
    }
}

/// Sample id of a file: its stem with any known role suffix removed.
pub fn sample_id_of(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    ID_SUFFIXES
        .iter()
        .find_map(|s| stem.strip_suffix(s))
        .map(str::to_owned)
        .unwrap_or(stem)
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn stem_ends_with_any(path: &Path, suffixes: &[&str]) -> bool {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .is_some_and(|s| suffixes.iter().any(|x| s.ends_with(x)))
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    paths.retain(|p| p.is_file());
    paths.sort();
    Ok(paths)
}

/// Expands directories into the files `keep` accepts; explicit files are
/// passed through untouched.
fn expand_inputs(inputs: &[PathBuf], keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            out.extend(sorted_dir(input)?.into_iter().filter(|p| keep(p)));
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

fn create_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Per-file seed: independent of which other files are in the batch.
fn file_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a over the id bytes, then a strong mix with the run seed.
    let h = id
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01B3));
    mix64(seed ^ mix64(h))
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[derive(Debug, Serialize)]
pub struct AffinityStats {
    pub source: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    /// Present when a `<id>_gt.png` sits next to the input image.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_median: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_median: Option<f64>,
}

fn affinity_stats(source: &Path, seed: u64, map: &AffinityMap, gt: Option<&BinaryMask>) -> AffinityStats {
    let data = map.data();
    let mut all = data.to_vec();
    let (mask_median, background_median) = match gt {
        Some(m) if m.dims() == map.dims() => {
            let (mut inside, mut outside): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
            for (&v, &b) in data.iter().zip(m.data()) {
                if b { inside.push(v) } else { outside.push(v) }
            }
            (median(&mut inside), median(&mut outside))
        }
        _ => (None, None),
    };
    AffinityStats {
        source: source.display().to_string(),
        seed,
        width: map.width(),
        height: map.height(),
        min: data.iter().copied().fold(f64::INFINITY, f64::min),
        max: data.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: data.iter().sum::<f64>() / data.len() as f64,
        median: median(&mut all).expect("maps are nonempty"),
        mask_median,
        background_median,
    }
}

fn affinity_one(config: &Config, input: &Path, out: &Path, seed: u64) -> Result<()> {
    let id = sample_id_of(input);
    let image = RgbImage::load_png(input)?;
    let seed = file_seed(seed, &id);
    let map = affinity_map(&to_luminance(&image), &config.pmi, &mut rng_from_seed(seed))?;
    let gt_path = input.with_file_name(format!("{id}_gt.png"));
    let gt = if gt_path.is_file() { Some(BinaryMask::load_png(&gt_path)?) } else { None };
    let stats = affinity_stats(input, seed, &map, gt.as_ref());
    write_atomic(&out.join(format!("{id}_affinity.png")), &map.encode_png16())?;
    write_atomic(&out.join(format!("{id}_affinity.f32")), &map.to_raw_bytes())?;
    let mut json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    json.push('\n');
    write_atomic(&out.join(format!("{id}_affinity.json")), json.as_bytes())
}

/// Runs `f` over `items` in parallel, reporting each failure on stderr.
/// Returns the number of failures.
fn run_batch<T: Sync>(items: &[T], name: impl Fn(&T) -> String + Sync, f: impl Fn(&T) -> Result<()> + Sync) -> usize {
    let failures: Vec<String> = items
        .par_iter()
        .filter_map(|item| f(item).err().map(|e| format!("{}: {e}", name(item))))
        .collect();
    for msg in &failures {
        eprintln!("error: {msg}");
    }
    failures.len()
}

fn batch_exit(failed: usize, total: usize, what: &str) -> i32 {
    eprintln!("{what}: {} of {total} succeeded", total - failed);
    if failed == 0 { EXIT_OK } else { EXIT_PARTIAL }
}

fn cmd_affinity(config: &Config, inputs: &[PathBuf], out: &Path, seed: u64, jobs: usize) -> Result<i32> {
    config.validate()?;
    let files = expand_inputs(inputs, |p| {
        has_extension(p, "png")
            && !stem_ends_with_any(p, &AUX_SUFFIXES)
            && !stem_ends_with_any(p, &["_gt", "_pred", "_mask"])
    })?;
    create_out_dir(out)?;
    let failed = with_pool(jobs, || {
        run_batch(&files, |p| p.display().to_string(), |p| affinity_one(config, p, out, seed))
    })?;
    Ok(batch_exit(failed, files.len(), "affinity"))
}

fn cmd_segment(config: &Config, inputs: &[PathBuf], out: &Path, jobs: usize) -> Result<i32> {
    let files = expand_inputs(inputs, |p| has_extension(p, "f32"))?;
    create_out_dir(out)?;
    let failed = with_pool(jobs, || {
        run_batch(
            &files,
            |p| p.display().to_string(),
            |p| {
                let map = AffinityMap::read_raw(p)?;
                let mask = segment_by_affinity(&map, &config.segmenter)?;
                write_atomic(&out.join(format!("{}_pred.png", sample_id_of(p))), &mask.encode_png())
            },
        )
    })?;
    Ok(batch_exit(failed, files.len(), "segment"))
}

/// Mask PNGs of a directory keyed by sample id.
fn mask_index(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut index: Vec<(String, PathBuf)> = sorted_dir(dir)?
        .into_iter()
        .filter(|p| has_extension(p, "png") && !stem_ends_with_any(p, &AUX_SUFFIXES) && !stem_ends_with_any(p, &["_img"]))
        .map(|p| (sample_id_of(&p), p))
        .collect();
    index.sort();
    if let Some(w) = index.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidParameter(format!(
            "{} and {} share sample id {}",
            w[0].1.display(),
            w[1].1.display(),
            w[0].0
        )));
    }
    Ok(index)
}

fn cmd_evaluate(config: &Config, gt_dir: &Path, pred_dir: &Path, out: &Path, jobs: usize) -> Result<i32> {
    let gts = mask_index(gt_dir)?;
    let preds = mask_index(pred_dir)?;
    let find = |list: &[(String, PathBuf)], id: &str| {
        list.binary_search_by(|(k, _)| k.as_str().cmp(id)).ok().map(|i| list[i].1.clone())
    };
    let mut problems = Vec::new();
    let mut pairs = Vec::new();
    for (id, gt) in &gts {
        match find(&preds, id) {
            Some(pred) => pairs.push((id.clone(), gt.clone(), pred)),
            None => problems.push(format!("{id}: no prediction in {}", pred_dir.display())),
        }
    }
    for (id, _) in &preds {
        if find(&gts, id).is_none() {
            problems.push(format!("{id}: no ground truth in {}", gt_dir.display()));
        }
    }

    let results: Vec<(String, Result<MetricsReport>)> = with_pool(jobs, || {
        pairs
            .par_iter()
            .map(|(id, gt, pred)| {
                let r = BinaryMask::load_png(gt)
                    .and_then(|g| BinaryMask::load_png(pred).map(|p| (g, p)))
                    .and_then(|(g, p)| evaluate(&g, &p, &config.metrics));
                (id.clone(), r)
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    for (id, r) in results {
        match r {
            Ok(report) => rows.push((id, report)),
            Err(e) => problems.push(format!("{id}: {e}")),
        }
    }

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_out_dir(parent)?;
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    write_atomic(out, &buf)?;
    for p in &problems {
        eprintln!("error: {p}");
    }
    eprintln!("evaluate: {} pairs scored, {} problems", rows.len(), problems.len());
    Ok(if problems.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}
