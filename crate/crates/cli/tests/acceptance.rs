//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! tolerance and runtime budget. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slice3d::anchors::*;
use slice3d::antialias::*;
use slice3d::dataset::*;
use slice3d::geometry::*;
use slice3d::pseudo_lidar::{fit_pseudo_label, DepthMap};
use slice3d::sahi::*;
use slice3d::synthetic::{generate_corpus, SyntheticConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- 1

const C1_SAMPLES: usize = 10_000;
const C1_DEPTH_REL: f64 = 1e-12;
const C1_PIXEL: f64 = 1e-9;

fn c1_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_rel, mut worst_px) = (0.0f64, 0.0f64);
    for _ in 0..C1_SAMPLES {
        let intr = CameraIntrinsics::new(
            rng.random_range(200.0..2000.0),
            rng.random_range(200.0..2000.0),
            rng.random_range(0.0..1242.0),
            rng.random_range(0.0..375.0),
        )
        .unwrap();
        let rig = StereoRig::new(rng.random_range(0.05..1.0)).unwrap();
        let z = rng.random_range(0.5..150.0);
        let back =
            disparity_to_depth(depth_to_disparity(z, &intr, &rig).unwrap(), &intr, &rig).unwrap();
        worst_rel = worst_rel.max(((back - z) / z).abs());
        let disp = rng.random_range(0.5..200.0);
        let d2 = depth_to_disparity(disparity_to_depth(disp, &intr, &rig).unwrap(), &intr, &rig)
            .unwrap();
        worst_rel = worst_rel.max(((d2 - disp) / disp).abs());

        let (row, col) = (rng.random_range(0.0..375.0), rng.random_range(0.0..1242.0));
        let px = project_point(&backproject_pixel(row, col, z, &intr).unwrap(), &intr).unwrap();
        worst_px = worst_px.max((px.row - row).abs()).max((px.col - col).abs());
    }
    outcome(
        worst_rel < C1_DEPTH_REL && worst_px < C1_PIXEL,
        format!("max depth rel err {worst_rel:.2e} (< {C1_DEPTH_REL:.0e}), max pixel err {worst_px:.2e} (< {C1_PIXEL:.0e})"),
    )
}

// ---------------------------------------------------------------- 2

const C2_TENSORS: usize = 100;
const C2_TOL: f64 = 1e-12;

fn c2_equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 64;
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for _ in 0..C2_TENSORS {
        let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Tensor2D::new(n, n, data).unwrap();
        for stride in 2..=4usize {
            let s = stride as isize;
            for size in 2..=5 {
                let k = binomial_kernel(size).unwrap();
                let lhs =
                    blur_downsample(&x.shift(s, s), &k, stride, PaddingMode::Circular).unwrap();
                let base = blur_downsample(&x, &k, stride, PaddingMode::Circular).unwrap();
                let rhs = base.shift(1, 1);
                // with n % stride != 0 the output grid does not tile the circle,
                // so only the translated interior (index >= 1) is comparable
                let first = if n % stride == 0 { 0 } else { 1 };
                for i in first..lhs.height() {
                    for j in first..lhs.width() {
                        worst = worst.max((lhs.get(i, j) - rhs.get(i, j)).abs());
                        compared += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst <= C2_TOL,
        format!("max |op(shift(x,s)) - shift(op(x),1)| = {worst:.2e} (<= {C2_TOL:.0e}) over {compared} outputs"),
    )
}

// ---------------------------------------------------------------- 3

const C3_SEED: u64 = 0;
const C3_CORPUS: usize = 100;
const C3_SHIFT: usize = 1;

fn c3_consistency() -> Outcome {
    let corpus = ConsistencyCorpus::generate(C3_SEED, C3_CORPUS);
    let k3 = binomial_kernel(3).unwrap();
    let pad = PaddingMode::Circular;
    let blur = Downsampler::MaxBlur {
        window: 2,
        kernel: k3,
        stride: 2,
        pad,
    };
    let naive = Downsampler::Naive {
        kind: PoolKind::Max,
        window: 2,
        stride: 2,
        pad,
    };
    let a = corpus.scores(&blur, C3_SHIFT).unwrap();
    let b = corpus.scores(&naive, C3_SHIFT).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let cb = corpus.checkerboards;
    let (all_a, all_b) = (mean(&a), mean(&b));
    let (cb_a, cb_b) = (mean(&a[..cb]), mean(&b[..cb]));
    outcome(
        all_a >= all_b && cb_a > cb_b,
        format!(
            "mean consistency max_blur_pool {all_a:.6} vs naive max {all_b:.6} (>=); checkerboards ({cb}) {cb_a:.6} vs {cb_b:.6} (>)"
        ),
    )
}

// ---------------------------------------------------------------- 4

const C4_SEED: u64 = 404;
const C4_IMAGES: usize = 50;
const C4_MATCH_IOU: f64 = 0.5;

fn corpus_config() -> SyntheticConfig {
    SyntheticConfig {
        height: 1024,
        width: 1024,
        squares: 5,
        square_size: 8,
        gap: 2,
    }
}

fn c4_sahi_recall() -> Outcome {
    let slice = SliceConfig::new(512, 512, 0.2).unwrap();
    let merge = MergeConfig::new(0.5, 0.1, false).unwrap();
    let regions = compute_slices(1024, 1024, &slice).unwrap();
    let (mut eligible, mut found, mut duplicates, mut spurious) = (0usize, 0usize, 0usize, 0usize);
    for sample in generate_corpus(C4_SEED, C4_IMAGES, &corpus_config()).unwrap() {
        let out = sahi_infer(
            &sample.image,
            &BlobDetector::default(),
            &slice,
            &merge,
            &InferOptions::default(),
        )
        .unwrap();
        for gt in &sample.boxes {
            let contained = regions.iter().any(|r| {
                gt.x1 >= r.origin_col as f64
                    && gt.y1 >= r.origin_row as f64
                    && gt.x2 <= (r.origin_col + r.width) as f64
                    && gt.y2 <= (r.origin_row + r.height) as f64
            });
            if !contained {
                continue;
            }
            eligible += 1;
            let hits = out
                .detections
                .iter()
                .filter(|d| iou_2d(&d.bbox, gt) >= C4_MATCH_IOU)
                .count();
            found += usize::from(hits >= 1);
            duplicates += hits.saturating_sub(1);
        }
        spurious += out
            .detections
            .iter()
            .filter(|d| {
                sample
                    .boxes
                    .iter()
                    .all(|g| iou_2d(&d.bbox, g) < C4_MATCH_IOU)
            })
            .count();
    }
    let recall = found as f64 / eligible as f64;
    outcome(
        recall == 1.0 && duplicates == 0 && spurious == 0,
        format!("recall {recall:.4} over {eligible} contained squares (== 1), duplicates {duplicates} (== 0), unmatched detections {spurious} (== 0)"),
    )
}

// ---------------------------------------------------------------- 5

const C5_SETS: usize = 1000;

fn c5_nms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut failures = 0usize;
    for _ in 0..C5_SETS {
        let n = rng.random_range(0..60);
        let dets: Vec<Detection> = (0..n)
            .map(|_| {
                let (x, y) = (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0));
                let (w, h) = (rng.random_range(2.0..60.0), rng.random_range(2.0..60.0));
                // coarse scores so ties are common
                let score = rng.random_range(0..=20) as f64 / 20.0;
                Detection::new(
                    BBox2D::new(x, y, x + w, y + h).unwrap(),
                    score,
                    rng.random_range(0..3),
                )
                .unwrap()
            })
            .collect();
        let cfg = MergeConfig::new(
            rng.random_range(0.2..0.8),
            rng.random_range(0.0..0.3),
            false,
        )
        .unwrap();
        let once = nms_merge(&dets, &cfg);
        let mut shuffled = dets.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        if nms_merge(&once, &cfg) != once || nms_merge(&shuffled, &cfg) != once {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "{failures} of {C5_SETS} sets violate idempotence or permutation invariance (== 0)"
        ),
    )
}

// ---------------------------------------------------------------- 6

const C6_PAIRS: usize = 50;
const C6_SAMPLES: usize = 1_000_000;
const C6_TOL: f64 = 0.01;

fn c6_iou_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let random_box = |rng: &mut ChaCha8Rng| {
        BBox3D::new(
            Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(1.0..1.6),
                rng.random_range(19.0..21.0),
            ),
            Dims3::new(
                rng.random_range(1.2..2.0),
                rng.random_range(1.4..2.2),
                rng.random_range(3.0..5.0),
            ),
            rng.random_range(-PI..PI),
        )
        .unwrap()
    };
    let mut worst = 0.0f64;
    let mut overlapping = 0;
    for _ in 0..C6_PAIRS {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        // uniform samples inside `a`, tested against `b` in b's own frame
        let (sa, ca) = a.yaw.sin_cos();
        let (sb, cb) = b.yaw.sin_cos();
        let mut hits = 0usize;
        for _ in 0..C6_SAMPLES {
            let al = (rng.random::<f64>() - 0.5) * a.dims.l;
            let aw = (rng.random::<f64>() - 0.5) * a.dims.w;
            let up = rng.random::<f64>() * a.dims.h;
            let (x, y, z) = (
                a.center.x + ca * al + sa * aw,
                a.center.y - up,
                a.center.z - sa * al + ca * aw,
            );
            let (dx, dz) = (x - b.center.x, z - b.center.z);
            let bl = cb * dx - sb * dz;
            let bw = sb * dx + cb * dz;
            let bu = b.center.y - y;
            if bl.abs() <= b.dims.l / 2.0
                && bw.abs() <= b.dims.w / 2.0
                && (0.0..=b.dims.h).contains(&bu)
            {
                hits += 1;
            }
        }
        let inter = a.volume() * hits as f64 / C6_SAMPLES as f64;
        let mc = inter / (a.volume() + b.volume() - inter);
        let exact = iou_3d(&a, &b);
        overlapping += usize::from(exact > 0.0);
        worst = worst.max((exact - mc).abs());
    }
    outcome(
        worst < C6_TOL,
        format!("max |iou_3d - monte carlo| = {worst:.4} (< {C6_TOL}) over {C6_PAIRS} pairs ({overlapping} overlapping)"),
    )
}

// ---------------------------------------------------------------- 7

const C7_PAIRS: usize = 10_000;
const C7_TOL: f64 = 1e-12;

fn c7_anchors() -> Outcome {
    let intr = CameraIntrinsics::new(721.5377, 721.5377, 609.5593, 172.854).unwrap();
    let spec = AnchorSpec::default();
    let anchors = generate_anchors(375, 1242, DEFAULT_FEATURE_STRIDE, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..C7_PAIRS {
        let a = anchors[rng.random_range(0..anchors.len())];
        let (ax, ay) = a.bbox2d.center();
        let g2 = BBox2D::from_center(
            ax + rng.random_range(-40.0..40.0),
            ay + rng.random_range(-40.0..40.0),
            rng.random_range(8.0..400.0),
            rng.random_range(8.0..300.0),
        );
        let (px, py) = g2.center();
        let z = rng.random_range(3.0..70.0);
        let center = backproject_pixel(
            py + rng.random_range(-5.0..5.0),
            px + rng.random_range(-5.0..5.0),
            z,
            &intr,
        )
        .unwrap();
        let g3 = BBox3D::new(
            center,
            Dims3::new(
                rng.random_range(1.0..3.0),
                rng.random_range(0.5..2.5),
                rng.random_range(0.5..6.0),
            ),
            rng.random_range(-PI..PI),
        )
        .unwrap();
        let d = encode_deltas(&a, &g2, &g3, &intr).unwrap();
        let (b2, b3) = decode_deltas(&a, &d, &intr).unwrap();
        let errs = [
            b2.x1 - g2.x1,
            b2.y1 - g2.y1,
            b2.x2 - g2.x2,
            b2.y2 - g2.y2,
            b3.center.x - g3.center.x,
            b3.center.y - g3.center.y,
            b3.center.z - g3.center.z,
            b3.dims.h - g3.dims.h,
            b3.dims.w - g3.dims.w,
            b3.dims.l - g3.dims.l,
            wrap_angle(b3.yaw - g3.yaw),
        ];
        worst = errs.iter().fold(worst, |m, e| m.max(e.abs()));
    }

    // every synthetic square owns a foreground anchor under the defaults
    let img_anchors = generate_anchors(1024, 1024, DEFAULT_FEATURE_STRIDE, &spec).unwrap();
    let dummy = BBox3D::new(Point3::new(0.0, 1.5, 20.0), Dims3::new(1.5, 1.6, 3.9), 0.0).unwrap();
    let (mut gts, mut covered) = (0usize, 0usize);
    for sample in generate_corpus(C4_SEED, 10, &corpus_config()).unwrap() {
        let gt: Vec<GroundTruth> = sample
            .boxes
            .iter()
            .map(|b| GroundTruth {
                bbox2d: *b,
                bbox3d: dummy,
                class_id: 0,
            })
            .collect();
        let labels = match_anchors(&img_anchors, &gt, DEFAULT_IOU_FG, DEFAULT_IOU_BG).unwrap();
        gts += gt.len();
        covered += (0..gt.len())
            .filter(|j| labels.contains(&AnchorLabel::Foreground(*j)))
            .count();
    }
    outcome(
        worst < C7_TOL && covered == gts,
        format!("max round-trip err {worst:.2e} (< {C7_TOL:.0e}) over {C7_PAIRS} pairs; {covered}/{gts} ground truths with a foreground anchor"),
    )
}

// ---------------------------------------------------------------- 8

const C8_BOXES: usize = 20;
const C8_POINTS: usize = 5000;
const C8_CENTER_M: f64 = 0.1;
const C8_DIMS_REL: f64 = 0.10;
const C8_YAW_DEG: f64 = 5.0;

fn c8_pseudo_label() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut worst_c, mut worst_d, mut worst_y) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..C8_BOXES {
        // length at least 1.5x width, so the heading axis is well defined
        let w = rng.random_range(0.6..2.0);
        let truth = BBox3D::new(
            Point3::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(1.0..2.0),
                rng.random_range(5.0..50.0),
            ),
            Dims3::new(
                rng.random_range(1.0..2.5),
                w,
                w * rng.random_range(1.5..3.0),
            ),
            rng.random_range(-PI..PI),
        )
        .unwrap();
        let (s, c) = truth.yaw.sin_cos();
        let pts: Vec<Point3> = (0..C8_POINTS)
            .map(|_| {
                let al = (rng.random::<f64>() - 0.5) * truth.dims.l;
                let aw = (rng.random::<f64>() - 0.5) * truth.dims.w;
                let up = rng.random::<f64>() * truth.dims.h;
                Point3::new(
                    truth.center.x + c * al + s * aw,
                    truth.center.y - up,
                    truth.center.z - s * al + c * aw,
                )
            })
            .collect();
        let fit = fit_pseudo_label(&pts).unwrap();
        let dc = ((fit.center.x - truth.center.x).powi(2)
            + (fit.center.y - truth.center.y).powi(2)
            + (fit.center.z - truth.center.z).powi(2))
        .sqrt();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let dd = rel(fit.dims.h, truth.dims.h)
            .max(rel(fit.dims.w, truth.dims.w))
            .max(rel(fit.dims.l, truth.dims.l));
        let dy = (fit.yaw - truth.yaw + PI / 2.0).rem_euclid(PI) - PI / 2.0;
        worst_c = worst_c.max(dc);
        worst_d = worst_d.max(dd);
        worst_y = worst_y.max(dy.abs().to_degrees());
    }
    outcome(
        worst_c < C8_CENTER_M && worst_d < C8_DIMS_REL && worst_y < C8_YAW_DEG,
        format!(
            "max center err {worst_c:.4} m (< {C8_CENTER_M}), max dims rel err {:.2}% (< {}%), max yaw err {worst_y:.3} deg mod 180 (< {C8_YAW_DEG})",
            worst_d * 100.0,
            C8_DIMS_REL * 100.0
        ),
    )
}

// ---------------------------------------------------------------- 9

const C9_DEPTH_TOL: f64 = 1.0 / 512.0;

fn c9_io() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let kinds = [
        "Car",
        "Van",
        "Truck",
        "Pedestrian",
        "Person_sitting",
        "Cyclist",
        "Tram",
        "Misc",
        "DontCare",
    ];
    // every value is a whole number of cents, as a parsed file would hold
    let mut cents_i = |lo: i64, hi: i64| rng.random_range(lo..hi);
    let mut labels = Vec::new();
    for i in 0..500 {
        let (x1, y1) = (cents_i(0, 120_000), cents_i(0, 37_000));
        let (x2, y2) = (x1 + cents_i(0, 20_000), y1 + cents_i(0, 20_000));
        let mut cents = |lo: i64, hi: i64| cents_i(lo, hi) as f64 / 100.0;
        let score = if i % 2 == 0 {
            Some(cents(0, 101))
        } else {
            None
        };
        labels.push(KittiLabel {
            kind: kinds[i % kinds.len()].to_string(),
            truncated: cents(0, 101),
            occluded: (i % 4) as i32,
            alpha: cents(-314, 315),
            bbox: BBox2D::new(
                x1 as f64 / 100.0,
                y1 as f64 / 100.0,
                x2 as f64 / 100.0,
                y2 as f64 / 100.0,
            )
            .unwrap(),
            dims: Dims3::new(cents(50, 400), cents(30, 300), cents(30, 1500)),
            location: Point3::new(cents(-4000, 4000), cents(-300, 300), cents(100, 8000)),
            rotation_y: cents(-314, 315),
            score,
        });
    }
    let text = write_label_file(&labels);
    let parsed = parse_label_file(&text).unwrap();
    let labels_ok = write_label_file(&parsed) == text && parsed == labels;

    let velo: Vec<VeloPoint> = (0..2000)
        .map(|_| VeloPoint {
            x: rng.random_range(-80.0..80.0),
            y: rng.random_range(-80.0..80.0),
            z: rng.random_range(-3.0..3.0),
            reflectance: rng.random(),
        })
        .collect();
    let velo_ok = read_velodyne_bin(&write_velodyne_bin(&velo)).unwrap() == velo;

    let (h, w) = (40, 60);
    let depth: Vec<f64> = (0..h * w)
        .map(|k| {
            if k % 11 == 0 {
                0.0
            } else {
                rng.random_range(0.01..255.99)
            }
        })
        .collect();
    let map = DepthMap::from_depths(h, w, depth.clone()).unwrap();
    let back = read_depth_png(&write_depth_png(&map).unwrap()).unwrap();
    let mut worst = 0.0f64;
    let mut validity_ok = true;
    for (k, z) in depth.iter().enumerate() {
        match back.get(k / w, k % w) {
            Some(b) if *z > 0.0 => worst = worst.max((b - z).abs()),
            None if *z == 0.0 => {}
            _ => validity_ok = false,
        }
    }
    outcome(
        labels_ok && velo_ok && validity_ok && worst <= C9_DEPTH_TOL,
        format!(
            "labels byte-stable {labels_ok}, velodyne exact {velo_ok}, depth validity kept {validity_ok}, max depth err {worst:.6e} m (<= {C9_DEPTH_TOL:.6e})"
        ),
    )
}

// ---------------------------------------------------------------- 10

/// Interpolated AP from a hand-listed precision/recall curve.
fn hand_ap(curve: &[(f64, f64)], points: usize) -> f64 {
    let mut total = 0.0;
    for i in 1..=points {
        let r = i as f64 / points as f64;
        let mut best = 0.0f64;
        for &(rec, prec) in curve {
            if rec >= r {
                best = best.max(prec);
            }
        }
        total += best;
    }
    total / points as f64
}

fn c10_ap() -> Outcome {
    let gt_text =
        "Car 0.00 0 -1.57 100.00 150.00 200.00 250.00 1.50 1.60 3.80 2.00 1.50 20.00 -1.50\n";
    let gts = vec![parse_label_file(gt_text).unwrap()];
    let opts = EvalOptions::new(0.7, EvalMode::Box3D);
    let ap = |dets: Vec<EvalDetection>| {
        evaluate_ap(&[dets], &gts, &opts)
            .unwrap()
            .class("Car")
            .unwrap()
            .ap
    };

    let perfect = ap(gts[0].iter().map(EvalDetection::from_label).collect());
    let empty = ap(Vec::new());

    let tp = |score| EvalDetection {
        score,
        ..EvalDetection::from_label(&gts[0][0])
    };
    let mut fp_label = gts[0][0].clone();
    fp_label.location.x += 10.0;
    fp_label.bbox = fp_label.bbox.translate(400.0, 0.0);
    let fp = |score| EvalDetection {
        score,
        ..EvalDetection::from_label(&fp_label)
    };
    // TP 0.9 then FP 0.8: points (recall 1, precision 1), (1, 1/2)
    let case = ap(vec![tp(0.9), fp(0.8)]);
    let case_oracle = hand_ap(&[(1.0, 1.0), (1.0, 0.5)], 40);
    // FP 0.9 then TP 0.8: points (0, 0), (1, 1/2)
    let swapped = ap(vec![tp(0.8), fp(0.9)]);
    let swapped_oracle = hand_ap(&[(0.0, 0.0), (1.0, 0.5)], 40);
    outcome(
        perfect == 1.0 && empty == 0.0 && case == case_oracle && swapped == swapped_oracle,
        format!(
            "perfect {perfect} (== 1), empty {empty} (== 0), 1 gt / 2 det {case} vs hand {case_oracle}, scores swapped {swapped} vs hand {swapped_oracle} (exact)"
        ),
    )
}

// ---------------------------------------------------------------- 11

const C11_IMAGES: usize = 50;

fn c11_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_slice3d");
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let run = |args: &[&str]| {
        let o = Command::new(bin)
            .args(args)
            .env_remove("SLICE3D_JOBS")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let p = |q: &Path| q.to_str().unwrap().to_owned();
    run(&[
        "gen-synthetic",
        "--seed",
        &C4_SEED.to_string(),
        "--count",
        &C11_IMAGES.to_string(),
        "--output-dir",
        &p(&root.join("corpus")),
    ]);
    let cfg = root.join("cfg.txt");
    std::fs::write(
        &cfg,
        "slice.patch_h = 512\nslice.patch_w = 512\nslice.overlap = 0.2\nmerge.match_threshold = 0.5\nmerge.detection_threshold = 0.1\nmerge.full_inference = true\n",
    )
    .unwrap();
    for jobs in ["1", "8"] {
        run(&[
            "infer",
            &p(&root.join("corpus/image_2")),
            "--config",
            &p(&cfg),
            "--jobs",
            jobs,
            "--output-dir",
            &p(&root.join(format!("jobs{jobs}"))),
        ]);
    }
    let (mut files, mut differing, mut lines) = (0usize, 0usize, 0usize);
    for k in 0..C11_IMAGES {
        let name = format!("{k:06}.txt");
        let a = std::fs::read(root.join("jobs1").join(&name)).unwrap();
        let b = std::fs::read(root.join("jobs8").join(&name)).unwrap();
        files += 1;
        lines += a.iter().filter(|c| **c == b'\n').count();
        differing += usize::from(a != b);
    }
    outcome(
        differing == 0 && lines > 0,
        format!("{differing} of {files} detection files differ between --jobs 1 and --jobs 8 (== 0); {lines} detection lines"),
    )
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        (
            1,
            "geometry round-trips",
            Duration::from_secs(1),
            c1_geometry,
        ),
        (
            2,
            "anti-aliasing equivariance",
            Duration::from_secs(5),
            c2_equivariance,
        ),
        (
            3,
            "anti-aliasing consistency gain",
            Duration::from_secs(10),
            c3_consistency,
        ),
        (
            4,
            "SAHI small-object recall",
            Duration::from_secs(30),
            c4_sahi_recall,
        ),
        (5, "NMS algebra", Duration::from_secs(5), c5_nms),
        (6, "3D IoU oracle", Duration::from_secs(60), c6_iou_oracle),
        (
            7,
            "anchor encode/decode",
            Duration::from_secs(5),
            c7_anchors,
        ),
        (
            8,
            "pseudo-label fit",
            Duration::from_secs(10),
            c8_pseudo_label,
        ),
        (9, "I/O fidelity", Duration::from_secs(5), c9_io),
        (10, "AP protocol", Duration::from_secs(1), c10_ap),
        (
            11,
            "determinism under concurrency",
            Duration::from_secs(60),
            c11_determinism,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed < budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {} {name}: {}; runtime {:.3} s (< {} s)",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
