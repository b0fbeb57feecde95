//! Pipeline configuration: one `section.key = value` per line, `#` starts a
//! comment. Unknown keys and repeated keys are errors.
//!
//! | key                         | default | meaning                                  |
//! |-----------------------------|---------|------------------------------------------|
//! | `slice.patch_h`             | 512     | patch height, px                         |
//! | `slice.patch_w`             | 512     | patch width, px                          |
//! | `slice.overlap`             | 0.2     | overlap ratio in `[0, 1)`                |
//! | `merge.match_threshold`     | 0.5     | NMS IoU threshold                        |
//! | `merge.detection_threshold` | 0.1     | minimum score                            |
//! | `merge.full_inference`      | false   | add a whole-image pass                   |
//! | `merge.discard_truncated`   | true    | drop boxes cut by an interior slice edge |
//! | `detector.kind`             | blob    | `blob` or `external`                     |
//! | `detector.threshold`        | 0.5     | blob intensity threshold                 |
//! | `detector.min_pixels`       | 4       | smallest blob kept                       |
//! | `detector.command`          |         | external program and arguments           |
//! | `detector.concurrent`       | true    | external program may run in parallel     |
//! | `camera.calib`              |         | KITTI calibration file                   |
//! | `camera.fx` .. `camera.cy`  |         | explicit intrinsics (all four)           |
//! | `output.dir`                | `.`     | where `infer` writes its files           |
//! | `infer.upscale`             | 1       | integer patch upscale                    |
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use slice3d::dataset::parse_calib;
use slice3d::geometry::CameraIntrinsics;
use slice3d::sahi::{
    BlobDetector, DetectorBackend, ExternalDetector, InferOptions, MergeConfig, SliceConfig,
};

#[derive(Debug, Clone)]
pub enum DetectorChoice {
    Blob(BlobDetector),
    External(ExternalDetector),
}

impl DetectorChoice {
    pub fn backend(&self) -> &dyn DetectorBackend {
        match self {
            DetectorChoice::Blob(b) => b,
            DetectorChoice::External(e) => e,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CameraSource {
    Calib(PathBuf),
    Explicit(CameraIntrinsics),
}

impl CameraSource {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        match self {
            CameraSource::Explicit(i) => Ok(*i),
            CameraSource::Calib(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                Ok(parse_calib(&text)
                    .with_context(|| format!("parsing {}", p.display()))?
                    .intrinsics()?)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub slice: SliceConfig,
    pub merge: MergeConfig,
    pub detector: DetectorChoice,
    pub camera: Option<CameraSource>,
    pub output_dir: PathBuf,
    pub upscale: usize,
    pub discard_truncated: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            slice: SliceConfig::new(512, 512, 0.2).expect("valid default"),
            merge: MergeConfig::new(0.5, 0.1, false).expect("valid default"),
            detector: DetectorChoice::Blob(BlobDetector::default()),
            camera: None,
            output_dir: PathBuf::from("."),
            upscale: 1,
            discard_truncated: true,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `section.key = value`", idx + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", idx + 1);
            }
            if let Some((first, _)) = kv.insert(key.clone(), (idx + 1, value.trim().to_string())) {
                bail!("line {}: `{key}` already set on line {first}", idx + 1);
            }
        }
        let mut cfg = Self::default();
        let get = |k: &str| kv.get(k).map(|(line, v)| (*line, v.as_str()));

        let patch_h = num(get("slice.patch_h"), cfg.slice.patch_h)?;
        let patch_w = num(get("slice.patch_w"), cfg.slice.patch_w)?;
        let overlap = num(get("slice.overlap"), cfg.slice.overlap_ratio)?;
        cfg.slice = SliceConfig::new(patch_h, patch_w, overlap)?;

        cfg.merge = MergeConfig::new(
            num(get("merge.match_threshold"), cfg.merge.match_threshold)?,
            num(
                get("merge.detection_threshold"),
                cfg.merge.detection_threshold,
            )?,
            num(get("merge.full_inference"), cfg.merge.full_inference)?,
        )?;
        cfg.discard_truncated = num(get("merge.discard_truncated"), cfg.discard_truncated)?;
        cfg.upscale = num(get("infer.upscale"), cfg.upscale)?;
        if cfg.upscale == 0 {
            bail!("infer.upscale must be at least 1");
        }

        let kind = get("detector.kind").map_or("blob", |(_, v)| v);
        let blob_keys = ["detector.threshold", "detector.min_pixels"];
        let external_keys = ["detector.command", "detector.concurrent"];
        cfg.detector = match kind {
            "blob" => {
                if let Some(k) = external_keys.iter().find(|k| kv.contains_key(**k)) {
                    bail!("`{k}` requires detector.kind = external");
                }
                let d = BlobDetector::default();
                DetectorChoice::Blob(BlobDetector {
                    intensity_threshold: num(get("detector.threshold"), d.intensity_threshold)?,
                    min_pixels: num(get("detector.min_pixels"), d.min_pixels)?,
                })
            }
            "external" => {
                if let Some(k) = blob_keys.iter().find(|k| kv.contains_key(**k)) {
                    bail!("`{k}` requires detector.kind = blob");
                }
                let (_, command) = get("detector.command")
                    .ok_or_else(|| anyhow!("detector.kind = external needs detector.command"))?;
                let mut ext = ExternalDetector::from_command_line(command)?;
                ext.concurrent = num(get("detector.concurrent"), true)?;
                DetectorChoice::External(ext)
            }
            other => bail!("detector.kind must be `blob` or `external`, got `{other}`"),
        };

        let explicit = ["camera.fx", "camera.fy", "camera.cx", "camera.cy"];
        let present = explicit.iter().filter(|k| kv.contains_key(**k)).count();
        cfg.camera = match (get("camera.calib"), present) {
            (Some(_), n) if n > 0 => {
                bail!("set either camera.calib or camera.fx/fy/cx/cy, not both")
            }
            (Some((_, p)), _) => {
                let path = base.join(p);
                if !path.is_file() {
                    bail!("camera.calib {} is not a readable file", path.display());
                }
                Some(CameraSource::Calib(path))
            }
            (None, 0) => None,
            (None, 4) => {
                let v: Vec<f64> = explicit
                    .iter()
                    .map(|k| num(get(k), 0.0))
                    .collect::<Result<_>>()?;
                Some(CameraSource::Explicit(CameraIntrinsics::new(
                    v[0], v[1], v[2], v[3],
                )?))
            }
            (None, _) => {
                bail!("camera.fx, camera.fy, camera.cx and camera.cy must be set together")
            }
        };

        if let Some((_, dir)) = get("output.dir") {
            cfg.output_dir = base.join(dir);
        }
        Ok(cfg)
    }

    pub fn infer_options(&self, jobs: usize) -> InferOptions {
        InferOptions {
            upscale: self.upscale,
            jobs,
            discard_truncated: self.discard_truncated,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "slice.patch_h",
    "slice.patch_w",
    "slice.overlap",
    "merge.match_threshold",
    "merge.detection_threshold",
    "merge.full_inference",
    "merge.discard_truncated",
    "detector.kind",
    "detector.threshold",
    "detector.min_pixels",
    "detector.command",
    "detector.concurrent",
    "camera.calib",
    "camera.fx",
    "camera.fy",
    "camera.cx",
    "camera.cy",
    "output.dir",
    "infer.upscale",
];

fn num<T: std::str::FromStr>(entry: Option<(usize, &str)>, default: T) -> Result<T> {
    match entry {
        None => Ok(default),
        Some((line, v)) => v
            .parse()
            .map_err(|_| anyhow!("line {line}: cannot parse `{v}`")),
    }
}
