//! Average precision over KITTI-style ground truth.
//!
//! Matching is greedy per image and class: detections in descending score
//! order take the unmatched ground truth with the highest IoU, provided it
//! reaches the threshold. Detections overlapping a `DontCare` region
//! (2D IoU > 0.5) and detections matched to ground truth excluded by the
//! difficulty filter count neither as true nor false positives.
//!
//! The precision/recall curve is evaluated at every distinct score, so
//! detections sharing a score enter together and the result does not depend
//! on input order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::label::KittiLabel;
use crate::error::{Error, Result};
use crate::geometry::{iou_2d, iou_3d, BBox2D, BBox3D};

pub const DEFAULT_RECALL_POINTS: usize = 40;
const DONT_CARE_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Box2D,
    Box3D,
}

/// Devkit difficulty levels: minimum box height (px), maximum occlusion level
/// and maximum truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
}

impl Difficulty {
    fn limits(self) -> (f64, i32, f64) {
        match self {
            Difficulty::Easy => (40.0, 0, 0.15),
            Difficulty::Moderate => (25.0, 1, 0.30),
            Difficulty::Hard => (25.0, 2, 0.50),
        }
    }

    fn admits(self, gt: &KittiLabel) -> bool {
        let (min_h, max_occ, max_trunc) = self.limits();
        gt.bbox.height() >= min_h && gt.occluded <= max_occ && gt.truncated <= max_trunc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub iou_threshold: f64,
    pub mode: EvalMode,
    pub recall_points: usize,
    pub difficulty: Option<Difficulty>,
}

impl EvalOptions {
    pub fn new(iou_threshold: f64, mode: EvalMode) -> Self {
        Self {
            iou_threshold,
            mode,
            recall_points: DEFAULT_RECALL_POINTS,
            difficulty: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalDetection {
    pub kind: String,
    pub bbox: BBox2D,
    pub bbox3d: Option<BBox3D>,
    pub score: f64,
}

impl EvalDetection {
    /// Labels without a score count as fully confident; invalid 3D boxes
    /// never match in 3D mode.
    pub fn from_label(l: &KittiLabel) -> Self {
        Self {
            kind: l.kind.clone(),
            bbox: l.bbox,
            bbox3d: l.bbox3d().ok(),
            score: l.score.unwrap_or(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassEval {
    pub class: String,
    pub ap: f64,
    /// Sampled recall values, ascending.
    pub recall: Vec<f64>,
    /// Interpolated precision at each sampled recall.
    pub precision: Vec<f64>,
    pub num_gt: usize,
    pub num_det: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalResult {
    /// One entry per ground-truth class, sorted by name.
    pub classes: Vec<ClassEval>,
}

impl EvalResult {
    pub fn class(&self, name: &str) -> Option<&ClassEval> {
        self.classes.iter().find(|c| c.class == name)
    }

    pub fn mean_ap(&self) -> f64 {
        if self.classes.is_empty() {
            return 0.0;
        }
        self.classes.iter().map(|c| c.ap).sum::<f64>() / self.classes.len() as f64
    }
}

/// Recall values the interpolated precision is sampled at. Eleven points
/// means the classic `0, 0.1, ..., 1` grid; any other count `n` samples
/// `1/n, 2/n, ..., 1`.
pub fn recall_samples(n: usize) -> Vec<f64> {
    if n == 11 {
        (0..11).map(|i| i as f64 / 10.0).collect()
    } else {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    }
}

fn det_order(a: &EvalDetection, b: &EvalDetection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.bbox.x1.total_cmp(&b.bbox.x1))
        .then(a.bbox.y1.total_cmp(&b.bbox.y1))
        .then(a.bbox.x2.total_cmp(&b.bbox.x2))
        .then(a.bbox.y2.total_cmp(&b.bbox.y2))
}

#[derive(Default)]
struct ImageTally {
    // class -> (score, is_true_positive)
    records: BTreeMap<String, Vec<(f64, bool)>>,
    num_gt: BTreeMap<String, usize>,
}

fn pair_iou(det: &EvalDetection, gt: &KittiLabel, gt3d: Option<&BBox3D>, mode: EvalMode) -> f64 {
    match mode {
        EvalMode::Box2D => iou_2d(&det.bbox, &gt.bbox),
        EvalMode::Box3D => match (&det.bbox3d, gt3d) {
            (Some(d), Some(g)) => iou_3d(d, g),
            _ => 0.0,
        },
    }
}

fn evaluate_image(dets: &[EvalDetection], gts: &[KittiLabel], opts: &EvalOptions) -> ImageTally {
    let mut tally = ImageTally::default();
    let dont_care: Vec<&BBox2D> = gts
        .iter()
        .filter(|g| g.is_dont_care())
        .map(|g| &g.bbox)
        .collect();
    let classes: BTreeSet<&str> = gts
        .iter()
        .filter(|g| !g.is_dont_care())
        .map(|g| g.kind.as_str())
        .chain(dets.iter().map(|d| d.kind.as_str()))
        .collect();
    let min_height = opts.difficulty.map(|d| d.limits().0);

    for class in classes {
        let class_gts: Vec<&KittiLabel> = gts.iter().filter(|g| g.kind == class).collect();
        let gt3d: Vec<Option<BBox3D>> = class_gts.iter().map(|g| g.bbox3d().ok()).collect();
        let admitted: Vec<bool> = class_gts
            .iter()
            .map(|g| opts.difficulty.is_none_or(|d| d.admits(g)))
            .collect();
        let mut class_dets: Vec<&EvalDetection> = dets.iter().filter(|d| d.kind == class).collect();
        class_dets.sort_by(|a, b| det_order(a, b));

        let mut taken = vec![false; class_gts.len()];
        let records = tally.records.entry(class.to_string()).or_default();
        for det in class_dets {
            let mut best: Option<(usize, f64)> = None;
            for (k, gt) in class_gts.iter().enumerate() {
                if taken[k] {
                    continue;
                }
                let iou = pair_iou(det, gt, gt3d[k].as_ref(), opts.mode);
                if iou >= opts.iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((k, iou));
                }
            }
            match best {
                Some((k, _)) => {
                    taken[k] = true;
                    if admitted[k] {
                        records.push((det.score, true));
                    }
                }
                None => {
                    let in_dont_care = dont_care
                        .iter()
                        .any(|r| iou_2d(&det.bbox, r) > DONT_CARE_IOU);
                    let too_small = min_height.is_some_and(|h| det.bbox.height() < h);
                    if !in_dont_care && !too_small {
                        records.push((det.score, false));
                    }
                }
            }
        }
        let n = admitted.iter().filter(|a| **a).count();
        if !class_gts.is_empty() {
            *tally.num_gt.entry(class.to_string()).or_default() += n;
        }
    }
    tally
}

fn class_curve(mut records: Vec<(f64, bool)>, num_gt: usize, samples: &[f64]) -> (f64, Vec<f64>) {
    records.sort_by(|a, b| b.0.total_cmp(&a.0));
    // (recall, precision) at each distinct score threshold
    let mut curve: Vec<(f64, f64)> = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < records.len() {
        let score = records[k].0;
        while k < records.len() && records[k].0 == score {
            if records[k].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = if num_gt == 0 {
            0.0
        } else {
            tp as f64 / num_gt as f64
        };
        curve.push((recall, tp as f64 / (tp + fp) as f64));
    }
    let precision: Vec<f64> = samples
        .iter()
        .map(|&r| {
            curve
                .iter()
                .filter(|(rec, _)| *rec >= r)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .collect();
    let ap = if num_gt == 0 || samples.is_empty() {
        0.0
    } else {
        precision.iter().sum::<f64>() / samples.len() as f64
    };
    (ap, precision)
}

pub fn evaluate_ap(
    dets: &[Vec<EvalDetection>],
    gts: &[Vec<KittiLabel>],
    opts: &EvalOptions,
) -> Result<EvalResult> {
    if dets.len() != gts.len() {
        return Err(Error::arg(format!(
            "{} detection lists for {} ground-truth images",
            dets.len(),
            gts.len()
        )));
    }
    if opts.recall_points == 0 {
        return Err(Error::arg("recall_points must be positive"));
    }
    if !(opts.iou_threshold > 0.0 && opts.iou_threshold <= 1.0) {
        return Err(Error::arg(format!(
            "IoU threshold {} outside (0, 1]",
            opts.iou_threshold
        )));
    }
    if let Some(d) = dets.iter().flatten().find(|d| !d.score.is_finite()) {
        return Err(Error::domain(format!(
            "detection score {} is not finite",
            d.score
        )));
    }

    let tallies: Vec<ImageTally> = dets
        .par_iter()
        .zip(gts.par_iter())
        .map(|(d, g)| evaluate_image(d, g, opts))
        .collect();

    let mut records: BTreeMap<String, Vec<(f64, bool)>> = BTreeMap::new();
    let mut num_gt: BTreeMap<String, usize> = BTreeMap::new();
    let mut num_det: BTreeMap<String, usize> = BTreeMap::new();
    for t in tallies {
        for (class, n) in t.num_gt {
            *num_gt.entry(class).or_default() += n;
        }
        for (class, r) in t.records {
            records.entry(class).or_default().extend(r);
        }
    }
    for d in dets.iter().flatten() {
        *num_det.entry(d.kind.clone()).or_default() += 1;
    }

    let samples = recall_samples(opts.recall_points);
    let classes = num_gt
        .iter()
        .map(|(class, &n)| {
            let (ap, precision) =
                class_curve(records.remove(class).unwrap_or_default(), n, &samples);
            ClassEval {
                class: class.clone(),
                ap,
                recall: samples.clone(),
                precision,
                num_gt: n,
                num_det: num_det.get(class).copied().unwrap_or(0),
            }
        })
        .collect();
    Ok(EvalResult { classes })
}
