use std::f64::consts::PI;

use proptest::prelude::*;
use slice3d::anchors::*;
use slice3d::dataset::*;
use slice3d::geometry::*;
use slice3d::pseudo_lidar::DepthMap;
use slice3d::sahi::{nms_merge, MergeConfig};

fn detection() -> impl Strategy<Value = Detection> {
    (
        0.0..100.0f64,
        0.0..100.0f64,
        1.0..40.0f64,
        1.0..40.0f64,
        0.0..=1.0f64,
        0u32..3,
    )
        .prop_map(|(x, y, w, h, s, c)| {
            // coarse scores so ties actually occur
            let s = (s * 20.0).round() / 20.0;
            Detection::new(BBox2D::new(x, y, x + w, y + h).unwrap(), s, c).unwrap()
        })
}

fn label() -> impl Strategy<Value = KittiLabel> {
    let cents = |lo: i64, hi: i64| (lo..hi).prop_map(|v| v as f64 / 100.0);
    (
        prop::sample::select(vec!["Car", "Van", "Pedestrian", "Cyclist", "Tram", "Misc"]),
        (cents(0, 101), 0i32..4, cents(-314, 315)),
        (
            cents(0, 100_000),
            cents(0, 30_000),
            cents(1, 50_000),
            cents(1, 30_000),
        ),
        (cents(1, 400), cents(1, 400), cents(1, 1500)),
        (
            cents(-5000, 5000),
            cents(-300, 300),
            cents(1, 10_000),
            cents(-314, 315),
        ),
        prop::option::of(cents(0, 101)),
    )
        .prop_map(
            |(kind, (tr, occ, alpha), (x1, y1, w, h), (dh, dw, dl), (x, y, z, ry), score)| {
                KittiLabel {
                    kind: kind.to_string(),
                    truncated: tr,
                    occluded: occ,
                    alpha,
                    bbox: BBox2D::new(x1, y1, x1 + w, y1 + h).unwrap(),
                    dims: Dims3::new(dh, dw, dl),
                    location: Point3::new(x, y, z),
                    rotation_y: ry,
                    score,
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nms_is_idempotent_and_order_free(
        dets in prop::collection::vec(detection(), 0..40),
        seed in any::<u64>(),
        tm in 0.1..0.9f64,
    ) {
        let cfg = MergeConfig::new(tm, 0.1, false).unwrap();
        let once = nms_merge(&dets, &cfg);
        prop_assert_eq!(&nms_merge(&once, &cfg), &once);
        let mut shuffled = dets.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(nms_merge(&shuffled, &cfg), once.clone());
        for (i, a) in once.iter().enumerate() {
            prop_assert!(a.score >= 0.1);
            for b in &once[i + 1..] {
                prop_assert!(a.class_id != b.class_id || iou_2d(&a.bbox, &b.bbox) <= tm);
            }
        }
    }

    #[test]
    fn anchor_deltas_round_trip(
        cx in 0.0..1200.0f64, cy in 0.0..370.0f64, w in 4.0..300.0f64, h in 4.0..300.0f64,
        px in 0.0..1200.0f64, py in 0.0..370.0f64, z in 2.0..80.0f64,
        dh in 0.5..4.0f64, dw in 0.3..3.0f64, dl in 0.3..12.0f64, yaw in -PI..PI,
    ) {
        let intr = CameraIntrinsics::new(721.5377, 721.5377, 609.5593, 172.854).unwrap();
        let anchors = generate_anchors(384, 1248, 16, &AnchorSpec::default()).unwrap();
        let a = anchors[(cx as usize * 7 + cy as usize) % anchors.len()];
        let g2 = BBox2D::from_center(cx, cy, w, h);
        let center = backproject_pixel(py, px, z, &intr).unwrap();
        let g3 = BBox3D::new(center, Dims3::new(dh, dw, dl), yaw).unwrap();
        let d = encode_deltas(&a, &g2, &g3, &intr).unwrap();
        let (b2, b3) = decode_deltas(&a, &d, &intr).unwrap();
        for (u, v) in [(b2.x1, g2.x1), (b2.y1, g2.y1), (b2.x2, g2.x2), (b2.y2, g2.y2)] {
            prop_assert!((u - v).abs() < 1e-9);
        }
        prop_assert!((b3.center.x - center.x).abs() < 1e-9);
        prop_assert!((b3.center.y - center.y).abs() < 1e-9);
        prop_assert!((b3.center.z - z).abs() < 1e-9);
        prop_assert!((b3.dims.l - dl).abs() < 1e-9);
        prop_assert!(wrap_angle(b3.yaw - yaw).abs() < 1e-9);
    }

    #[test]
    fn deltas_ignore_joint_translation(
        w in 4.0..300.0f64, h in 4.0..300.0f64, ox in -50.0..50.0f64, oy in -50.0..50.0f64,
        tx in -500.0..500.0f64, ty in -500.0..500.0f64,
    ) {
        let intr = CameraIntrinsics::new(700.0, 700.0, 600.0, 180.0).unwrap();
        let a = generate_anchors(384, 1248, 16, &AnchorSpec::default()).unwrap()[1000];
        let (ax, ay) = a.bbox2d.center();
        let g2 = BBox2D::from_center(ax + ox, ay + oy, w, h);
        let g3 = BBox3D::new(Point3::new(0.0, 1.0, 20.0), Dims3::new(1.5, 1.6, 3.9), 0.0).unwrap();
        let moved = Anchor { bbox2d: a.bbox2d.translate(tx, ty), ..a };
        let d0 = encode_deltas(&a, &g2, &g3, &intr).unwrap();
        let d1 = encode_deltas(&moved, &g2.translate(tx, ty), &g3, &intr).unwrap();
        prop_assert!((d0.dx - d1.dx).abs() < 1e-9 && (d0.dy - d1.dy).abs() < 1e-9);
        prop_assert!((d0.dw - d1.dw).abs() < 1e-9 && (d0.dh - d1.dh).abs() < 1e-9);
    }

    #[test]
    fn labels_round_trip(labels in prop::collection::vec(label(), 0..12)) {
        let text = write_label_file(&labels);
        let parsed = parse_label_file(&text).unwrap();
        prop_assert_eq!(write_label_file(&parsed), text);
        prop_assert_eq!(parsed.len(), labels.len());
        for (p, l) in parsed.iter().zip(&labels) {
            prop_assert_eq!(&p.kind, &l.kind);
            prop_assert_eq!(p.occluded, l.occluded);
            prop_assert!((p.location.z - l.location.z).abs() <= 0.005 + 1e-9);
        }
    }

    #[test]
    fn velodyne_round_trip(raw in prop::collection::vec(any::<[f32; 4]>(), 0..64)) {
        let pts: Vec<VeloPoint> = raw
            .iter()
            .map(|v| VeloPoint { x: v[0], y: v[1], z: v[2], reflectance: v[3] })
            .collect();
        let back = read_velodyne_bin(&write_velodyne_bin(&pts)).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        for (a, b) in back.iter().zip(&pts) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.reflectance.to_bits(), b.reflectance.to_bits());
        }
    }

    #[test]
    fn depth_png_quantization(depths in prop::collection::vec(0.0..255.99f64, 1..64)) {
        let n = depths.len();
        let d = DepthMap::from_depths(1, n, depths.clone()).unwrap();
        let back = read_depth_png(&write_depth_png(&d).unwrap()).unwrap();
        for (j, z) in depths.iter().enumerate() {
            match (d.get(0, j), back.get(0, j)) {
                (Some(_), Some(b)) if *z >= 1.0 / 512.0 => prop_assert!((b - z).abs() <= 1.0 / 512.0),
                (Some(_), Some(b)) => prop_assert_eq!(b, 1.0 / 256.0),
                (None, None) => {}
                other => prop_assert!(false, "validity changed: {:?}", other),
            }
        }
    }

    #[test]
    fn ap_ignores_detection_order(
        boxes in prop::collection::vec((0.0..200.0f64, 0.0..200.0f64, 0.0..=1.0f64), 1..12),
        seed in any::<u64>(),
    ) {
        let gt_text = "Car 0.00 0 0.00 10.00 10.00 60.00 60.00 1.50 1.60 3.80 0.00 1.50 20.00 0.00\n\
                       Car 0.00 0 0.00 100.00 100.00 150.00 150.00 1.50 1.60 3.80 3.00 1.50 20.00 0.00\n";
        let gts = vec![parse_label_file(gt_text).unwrap()];
        let dets: Vec<EvalDetection> = boxes
            .iter()
            .map(|&(x, y, s)| EvalDetection {
                kind: "Car".into(),
                bbox: BBox2D::new(x, y, x + 50.0, y + 50.0).unwrap(),
                bbox3d: None,
                score: (s * 10.0).round() / 10.0,
            })
            .collect();
        let mut rev = dets.clone();
        rev.rotate_left((seed % dets.len() as u64) as usize);
        rev.reverse();
        let opts = EvalOptions::new(0.5, EvalMode::Box2D);
        let a = evaluate_ap(std::slice::from_ref(&dets), &gts, &opts).unwrap();
        let b = evaluate_ap(&[rev], &gts, &opts).unwrap();
        prop_assert_eq!(&a, &b);
        let ap = a.class("Car").unwrap().ap;
        prop_assert!((0.0..=1.0).contains(&ap));

        // a correct detection ranked below all others never lowers AP
        let mut more = dets;
        more.push(EvalDetection {
            kind: "Car".into(),
            bbox: gts[0][1].bbox,
            bbox3d: None,
            score: -1.0,
        });
        let c = evaluate_ap(&[more], &gts, &opts).unwrap();
        prop_assert!(c.class("Car").unwrap().ap >= ap);
    }
}
