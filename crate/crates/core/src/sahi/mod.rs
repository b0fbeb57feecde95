//! Slicing-aided inference.
//!
//! The image is tiled into overlapping patches, a detector runs on every
//! patch (and optionally on the full image), patch detections are translated
//! back to image coordinates, and the pooled detections are merged with
//! per-class greedy NMS.

mod blob;
mod external;

use rayon::prelude::*;

pub use blob::{blob_detect, BlobDetector};
pub use external::{parse_detection_lines, ExternalDetector};

use crate::error::{Error, Result};
use crate::geometry::{iou_2d, BBox2D, Detection};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceConfig {
    pub patch_h: usize,
    pub patch_w: usize,
    pub overlap_ratio: f64,
}

impl SliceConfig {
    pub fn new(patch_h: usize, patch_w: usize, overlap_ratio: f64) -> Result<Self> {
        if patch_h == 0 || patch_w == 0 {
            return Err(Error::arg("patch dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&overlap_ratio) {
            return Err(Error::arg(format!(
                "overlap ratio must lie in [0, 1), got {overlap_ratio}"
            )));
        }
        Ok(Self {
            patch_h,
            patch_w,
            overlap_ratio,
        })
    }
}

/// A rectangular window into the source image, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceRegion {
    pub origin_row: usize,
    pub origin_col: usize,
    pub height: usize,
    pub width: usize,
}

impl SliceRegion {
    pub fn full(image_h: usize, image_w: usize) -> Self {
        Self {
            origin_row: 0,
            origin_col: 0,
            height: image_h,
            width: image_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    /// Boxes of one class overlapping a kept box with IoU above this are suppressed.
    pub match_threshold: f64,
    /// Detections scoring below this are dropped before matching.
    pub detection_threshold: f64,
    /// Also run the detector once on the whole image.
    pub full_inference: bool,
}

impl MergeConfig {
    pub fn new(
        match_threshold: f64,
        detection_threshold: f64,
        full_inference: bool,
    ) -> Result<Self> {
        if !(match_threshold > 0.0 && match_threshold <= 1.0) {
            return Err(Error::arg(format!(
                "match threshold must lie in (0, 1], got {match_threshold}"
            )));
        }
        if !(0.0..=1.0).contains(&detection_threshold) {
            return Err(Error::arg(format!(
                "detection threshold must lie in [0, 1], got {detection_threshold}"
            )));
        }
        Ok(Self {
            match_threshold,
            detection_threshold,
            full_inference,
        })
    }
}

/// A 2D detector run on one image region at a time. Boxes are returned in
/// region-local pixel coordinates with scores in `[0, 1]`.
pub trait DetectorBackend: Send + Sync {
    fn detect(&self, patch: &GrayImage) -> Result<Vec<Detection>>;

    /// Whether `detect` may be called from several threads at once.
    fn concurrency_safe(&self) -> bool {
        false
    }
}

fn axis_origins(dim: usize, patch: usize, overlap: f64) -> (Vec<usize>, usize) {
    if dim <= patch {
        return (vec![0], dim);
    }
    // small epsilon so that e.g. 500 * 0.8 does not floor to 399
    let stride = ((patch as f64 * (1.0 - overlap)) + 1e-9).floor().max(1.0) as usize;
    let mut origins = Vec::new();
    let mut o = 0;
    loop {
        if o + patch >= dim {
            origins.push(dim - patch);
            break;
        }
        origins.push(o);
        o += stride;
    }
    origins.dedup();
    (origins, patch)
}

/// Row-major tiling. The last patch on each axis is clamped flush with the
/// border; an image smaller than a patch yields a single clipped region.
pub fn compute_slices(
    image_h: usize,
    image_w: usize,
    cfg: &SliceConfig,
) -> Result<Vec<SliceRegion>> {
    if image_h == 0 || image_w == 0 {
        return Err(Error::arg("image has zero area"));
    }
    let (rows, height) = axis_origins(image_h, cfg.patch_h, cfg.overlap_ratio);
    let (cols, width) = axis_origins(image_w, cfg.patch_w, cfg.overlap_ratio);
    Ok(rows
        .iter()
        .flat_map(|&r| {
            cols.iter().map(move |&c| SliceRegion {
                origin_row: r,
                origin_col: c,
                height,
                width,
            })
        })
        .collect())
}

/// Translates region-local detections into image coordinates. Boxes poking
/// out of the region are clipped first; the second value counts them.
pub fn remap_detections(dets: &[Detection], region: &SliceRegion) -> (Vec<Detection>, usize) {
    let (w, h) = (region.width as f64, region.height as f64);
    let mut clipped = 0;
    let out = dets
        .iter()
        .map(|d| {
            let b = d.bbox;
            let c = BBox2D {
                x1: b.x1.clamp(0.0, w),
                y1: b.y1.clamp(0.0, h),
                x2: b.x2.clamp(0.0, w),
                y2: b.y2.clamp(0.0, h),
            };
            if c != b {
                clipped += 1;
            }
            Detection {
                bbox: c.translate(region.origin_col as f64, region.origin_row as f64),
                ..*d
            }
        })
        .collect();
    (out, clipped)
}

/// Total order used by the merge: score descending, then x1, y1, x2, y2, class ascending.
fn merge_order(a: &Detection, b: &Detection) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.bbox.x1.total_cmp(&b.bbox.x1))
        .then(a.bbox.y1.total_cmp(&b.bbox.y1))
        .then(a.bbox.x2.total_cmp(&b.bbox.x2))
        .then(a.bbox.y2.total_cmp(&b.bbox.y2))
        .then(a.class_id.cmp(&b.class_id))
}

/// Threshold by score, then greedy per-class NMS. Output is in merge order.
pub fn nms_merge(dets: &[Detection], cfg: &MergeConfig) -> Vec<Detection> {
    let mut pool: Vec<Detection> = dets
        .iter()
        .filter(|d| d.score >= cfg.detection_threshold)
        .copied()
        .collect();
    pool.sort_by(merge_order);
    let mut kept: Vec<Detection> = Vec::new();
    for d in pool {
        let suppressed = kept
            .iter()
            .any(|k| k.class_id == d.class_id && iou_2d(&k.bbox, &d.bbox) > cfg.match_threshold);
        if !suppressed {
            kept.push(d);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    /// Nearest-neighbor upscale applied to each patch before detection.
    pub upscale: usize,
    /// Worker threads for region inference; 1 runs serially.
    pub jobs: usize,
    /// Drop slice detections that touch a slice edge lying inside the image.
    /// Such boxes are fragments of an object cut by the tiling; the object is
    /// seen whole in a neighboring, overlapping slice.
    pub discard_truncated: bool,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self {
            upscale: 1,
            jobs: 1,
            discard_truncated: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SahiOutput {
    pub detections: Vec<Detection>,
    pub slices: usize,
    /// Detections entering the merge, after remapping and truncation filtering.
    pub raw_detections: usize,
    pub clipped_boxes: usize,
    pub truncated_dropped: usize,
}

struct RegionResult {
    detections: Vec<Detection>,
    clipped: usize,
    truncated: usize,
}

fn touches_interior_edge(
    local: &BBox2D,
    region: &SliceRegion,
    image_h: usize,
    image_w: usize,
) -> bool {
    let (w, h) = (region.width as f64, region.height as f64);
    (local.x1 <= 0.0 && region.origin_col > 0)
        || (local.y1 <= 0.0 && region.origin_row > 0)
        || (local.x2 >= w && region.origin_col + region.width < image_w)
        || (local.y2 >= h && region.origin_row + region.height < image_h)
}

fn run_region(
    image: &GrayImage,
    region: &SliceRegion,
    backend: &dyn DetectorBackend,
    opts: &InferOptions,
) -> Result<RegionResult> {
    let wrap = |message: String| Error::Backend {
        row: region.origin_row,
        col: region.origin_col,
        height: region.height,
        width: region.width,
        message,
    };
    let patch = image.crop(region)?.upscale(opts.upscale)?;
    let raw = backend.detect(&patch).map_err(|e| wrap(e.to_string()))?;
    let inv = 1.0 / opts.upscale as f64;
    let mut local = Vec::with_capacity(raw.len());
    for d in raw {
        let b = d.bbox;
        let finite = [b.x1, b.y1, b.x2, b.y2].iter().all(|v| v.is_finite());
        if !finite || b.x1 > b.x2 || b.y1 > b.y2 || !(0.0..=1.0).contains(&d.score) {
            return Err(wrap(format!("backend returned an invalid detection {d:?}")));
        }
        local.push(Detection {
            bbox: BBox2D {
                x1: b.x1 * inv,
                y1: b.y1 * inv,
                x2: b.x2 * inv,
                y2: b.y2 * inv,
            },
            ..d
        });
    }
    let (remapped, clipped) = remap_detections(&local, region);
    if !opts.discard_truncated {
        return Ok(RegionResult {
            detections: remapped,
            clipped,
            truncated: 0,
        });
    }
    let (ox, oy) = (region.origin_col as f64, region.origin_row as f64);
    let before = remapped.len();
    let detections: Vec<Detection> = remapped
        .into_iter()
        .filter(|d| {
            let l = d.bbox.translate(-ox, -oy);
            !touches_interior_edge(&l, region, image.height(), image.width())
        })
        .collect();
    Ok(RegionResult {
        truncated: before - detections.len(),
        detections,
        clipped,
    })
}

/// Sliced inference: per-slice detection (plus optional full-image pass),
/// remapping, and NMS merge. The result does not depend on the order or
/// concurrency with which regions are processed.
pub fn sahi_infer(
    image: &GrayImage,
    backend: &dyn DetectorBackend,
    slice: &SliceConfig,
    merge: &MergeConfig,
    opts: &InferOptions,
) -> Result<SahiOutput> {
    if opts.upscale == 0 || opts.jobs == 0 {
        return Err(Error::arg("upscale and jobs must be positive"));
    }
    let slices = compute_slices(image.height(), image.width(), slice)?;
    let mut regions = slices.clone();
    if merge.full_inference {
        regions.push(SliceRegion::full(image.height(), image.width()));
    }

    let results: Vec<Result<RegionResult>> = if opts.jobs > 1 && backend.concurrency_safe() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            regions
                .par_iter()
                .map(|r| run_region(image, r, backend, opts))
                .collect()
        })
    } else {
        regions
            .iter()
            .map(|r| run_region(image, r, backend, opts))
            .collect()
    };

    let mut pooled = Vec::new();
    let (mut clipped, mut truncated) = (0, 0);
    for r in results {
        let r = r?;
        clipped += r.clipped;
        truncated += r.truncated;
        pooled.extend(r.detections);
    }
    Ok(SahiOutput {
        raw_detections: pooled.len(),
        detections: nms_merge(&pooled, merge),
        slices: slices.len(),
        clipped_boxes: clipped,
        truncated_dropped: truncated,
    })
}

/// One training patch produced by slice augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedSample {
    pub region: SliceRegion,
    pub patch: GrayImage,
    /// Ground truth clipped to the patch, in patch-local coordinates.
    pub boxes: Vec<(BBox2D, u32)>,
}

pub const DEFAULT_MIN_AREA_RATIO: f64 = 0.25;

/// Slice augmentation: every slice becomes a sample carrying the ground-truth
/// boxes that keep at least `min_area_ratio` of their area inside it.
pub fn slice_dataset(
    image: &GrayImage,
    gt: &[(BBox2D, u32)],
    cfg: &SliceConfig,
    min_area_ratio: f64,
) -> Result<Vec<SlicedSample>> {
    let regions = compute_slices(image.height(), image.width(), cfg)?;
    regions
        .into_iter()
        .map(|region| {
            let bounds = BBox2D {
                x1: region.origin_col as f64,
                y1: region.origin_row as f64,
                x2: (region.origin_col + region.width) as f64,
                y2: (region.origin_row + region.height) as f64,
            };
            let boxes = gt
                .iter()
                .filter_map(|(b, class)| {
                    let area = b.area();
                    let clipped = b.intersect(&bounds)?;
                    (area > 0.0 && clipped.area() / area >= min_area_ratio)
                        .then(|| (clipped.translate(-bounds.x1, -bounds.y1), *class))
                })
                .collect();
            Ok(SlicedSample {
                patch: image.crop(&region)?,
                region,
                boxes,
            })
        })
        .collect()
}
