use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crackgen::dataset::{DatasetManifest, MANIFEST_FILE};
use crackgen::raster::{BinaryMask, RgbImage};
use sha2::{Digest, Sha256};

const SMALL_CONFIG: &str = "[scene]\nwidth = 96\nheight = 80\n";

fn crackgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crackgen"))
        .args(args)
        .env_remove("CRACKGEN_JOBS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

/// SHA-256 over every file of `dir` in name order (names included).
fn dir_digest(dir: &Path) -> String {
    let mut names: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(fs::read(dir.join(&n)).unwrap());
    }
    hex::encode(h.finalize())
}

fn generate(dir: &Path, out: &Path, count: &str, seed: &str) -> Output {
    let cfg = write_config(dir, SMALL_CONFIG);
    crackgen(&[
        "--config",
        path_str(&cfg),
        "generate",
        "--out",
        path_str(out),
        "--count",
        count,
        "--seed",
        seed,
    ])
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(generate(tmp.path(), &a, "3", "42").status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_crackgen"))
        .args(["--config", path_str(&tmp.path().join("config.toml")), "generate"])
        .args(["--out", path_str(&b), "--count", "3", "--seed", "42"])
        .env("CRACKGEN_JOBS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(dir_digest(&a), dir_digest(&b));
    assert_eq!(dir_digest(&a), GOLDEN_DATASET_SHA256);
}
const GOLDEN_DATASET_SHA256: &str = "ca8c0742da51cacaa619247c50e66dbb07a1d04b4d919da6cfac4b400da237ba";

#[test]
fn generate_writes_manifest_and_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ds");
    assert!(generate(tmp.path(), &out, "2", "5").status.success());
    let m = DatasetManifest::load(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.samples.len(), 2);
    assert_eq!(m.global_seed, 5);
    assert_eq!(m.config.scene.width, 96);
    for s in &m.samples {
        let img = RgbImage::load_png(&out.join(&s.files.image)).unwrap();
        assert_eq!(img.dims(), (96, 80));
        let gt = BinaryMask::load_png(&out.join(&s.files.gt)).unwrap();
        assert_eq!(gt.count(), s.gt_pixels);
        assert!(out.join(&s.files.normal).is_file() && out.join(&s.files.depth).is_file());
    }
}

#[test]
fn generate_zero_count_writes_empty_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ds");
    assert!(generate(tmp.path(), &out, "0", "1").status.success());
    let m = DatasetManifest::load(&out.join(MANIFEST_FILE)).unwrap();
    assert!(m.samples.is_empty());
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn manifest_reproduces_the_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(generate(tmp.path(), &a, "2", "9").status.success());
    let out = crackgen(&[
        "generate",
        "--out",
        path_str(&b),
        "--from-manifest",
        path_str(&a.join(MANIFEST_FILE)),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(dir_digest(&a), dir_digest(&b));
}

#[test]
fn full_pipeline_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let (ds, aff, pred) = (tmp.path().join("ds"), tmp.path().join("aff"), tmp.path().join("pred"));
    assert!(generate(tmp.path(), &ds, "2", "3").status.success());

    let out = crackgen(&["affinity", path_str(&ds), "--out", path_str(&aff)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for id in ["sample_00000", "sample_00001"] {
        for ext in ["png", "f32", "json"] {
            assert!(aff.join(format!("{id}_affinity.{ext}")).is_file());
        }
        let stats: serde_json::Value =
            serde_json::from_slice(&fs::read(aff.join(format!("{id}_affinity.json"))).unwrap()).unwrap();
        assert!(stats["mask_median"].is_number());
        assert!(stats["background_median"].is_number());
    }

    let out = crackgen(&["segment", path_str(&aff), "--out", path_str(&pred)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = BinaryMask::load_png(&pred.join("sample_00000_pred.png")).unwrap();
    assert_eq!(p.dims(), (96, 80));

    let csv = tmp.path().join("metrics.csv");
    let out = crackgen(&["evaluate", "--gt", path_str(&ds), "--pred", path_str(&pred), "--out", path_str(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "id,f1,f1_theta,cl_dice,hdf_euc,hdf_rbf,tp,fp,fn");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("aggregate,"));
}

#[test]
fn affinity_of_single_image_and_constant_image() {
    let tmp = tempfile::tempdir().unwrap();
    let img = tmp.path().join("flat.png");
    fs::write(&img, RgbImage::filled(40, 32, [0.5, 0.5, 0.5]).encode_png8()).unwrap();
    let out_dir = tmp.path().join("out");
    let out = crackgen(&["affinity", path_str(&img), "--out", path_str(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let preview = image::open(out_dir.join("flat_affinity.png")).unwrap().into_luma16();
    let first = preview.as_raw()[0];
    assert!(preview.as_raw().iter().all(|&v| v == first));
    let stats: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("flat_affinity.json")).unwrap()).unwrap();
    assert_eq!(stats["min"], 80.0);
    assert_eq!(stats["max"], 80.0);
    assert!(stats.get("mask_median").is_none());
}

#[test]
fn evaluate_identical_masks_and_missing_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let (gt, pred) = (tmp.path().join("gt"), tmp.path().join("pred"));
    fs::create_dir_all(&gt).unwrap();
    fs::create_dir_all(&pred).unwrap();
    let mut m = BinaryMask::new(32, 32);
    for i in 4..28 {
        m.set(i, i, true);
    }
    for id in 0..20 {
        fs::write(gt.join(format!("s{id:02}_gt.png")), m.encode_png()).unwrap();
        fs::write(pred.join(format!("s{id:02}_pred.png")), m.encode_png()).unwrap();
    }
    let csv = tmp.path().join("m.csv");
    let args = ["evaluate", "--gt", path_str(&gt), "--pred", path_str(&pred), "--out", path_str(&csv)];
    let out = crackgen(&args);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 21);
    for r in &rows[..20] {
        assert_eq!(r[1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
    }

    fs::remove_file(pred.join("s07_pred.png")).unwrap();
    let out = crackgen(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s07"));
    let rows = csv::Reader::from_path(&csv).unwrap().records().count();
    assert_eq!(rows, 20);
}

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(crackgen(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(crackgen(&["generate"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[scene]\nwidht = 3\n");
    let out = crackgen(&["--config", path_str(&cfg), "generate", "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(crackgen(&["--help"]).status.code(), Some(0));
}
