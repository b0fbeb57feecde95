use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use slice3d::anchors::{generate_anchors, AnchorSpec};
use slice3d::antialias::{consistency_bench, format_bench_table};
use slice3d::dataset::{
    evaluate_ap, parse_calib, parse_label_file, read_depth_png, read_velodyne_bin,
    write_label_file, EvalDetection, EvalOptions, KittiCalib, KittiLabel,
};
use slice3d::geometry::{CameraIntrinsics, Detection, Point3};
use slice3d::image::GrayImage;
use slice3d::pseudo_lidar::{
    depth_to_cloud, fit_pseudo_label, frustum_points, read_ply, read_xyz, write_ply, write_xyz,
    PseudoCloud,
};
use slice3d::sahi::{compute_slices, parse_detection_lines, sahi_infer};
use slice3d::synthetic::{generate_corpus, SyntheticConfig};

use crate::config::PipelineConfig;
use crate::report::RunReport;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            error,
        }
    }
}

impl From<slice3d::Error> for CliError {
    fn from(e: slice3d::Error) -> Self {
        let code = match e {
            slice3d::Error::Backend { .. } => EXIT_RUNTIME,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn read_bytes(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(CliError::runtime)?;
    }
    std::fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::runtime)
}

fn load_image(path: &Path) -> anyhow::Result<GrayImage> {
    GrayImage::decode(&read_bytes(path)?).with_context(|| format!("decoding {}", path.display()))
}

fn load_calib(path: &Path) -> anyhow::Result<KittiCalib> {
    parse_calib(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Intrinsics from `--calib`, else from the config's camera section.
fn intrinsics(
    calib: Option<&KittiCalib>,
    config: Option<&Path>,
) -> anyhow::Result<CameraIntrinsics> {
    if let Some(c) = calib {
        return Ok(c.intrinsics()?);
    }
    PipelineConfig::load_or_default(config)?
        .camera
        .ok_or_else(|| anyhow!("no camera: pass --calib or set camera.* in --config"))?
        .intrinsics()
}

pub fn format_detections(dets: &[Detection]) -> String {
    let mut sorted = dets.to_vec();
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.x1.total_cmp(&b.bbox.x1))
            .then(a.bbox.y1.total_cmp(&b.bbox.y1))
    });
    let mut out = String::new();
    for d in sorted {
        let b = d.bbox;
        let _ = writeln!(
            out,
            "{} {:.6} {:.2} {:.2} {:.2} {:.2}",
            d.class_id, d.score, b.x1, b.y1, b.x2, b.y2
        );
    }
    out
}

pub fn slice(image: &Path, config: Option<&Path>, output: Option<&Path>) -> CliResult {
    let cfg = PipelineConfig::load_or_default(config)?;
    let img = load_image(image)?;
    let regions = compute_slices(img.height(), img.width(), &cfg.slice)?;
    let manifest: String = regions
        .iter()
        .map(|r| {
            format!(
                "{} {} {} {}\n",
                r.origin_row, r.origin_col, r.height, r.width
            )
        })
        .collect();
    match output {
        Some(p) => write_output(p, manifest),
        None => {
            print!("{manifest}");
            Ok(())
        }
    }
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "png")
    )
}

fn collect_images(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image(p))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

pub fn infer(
    inputs: &[PathBuf],
    config: Option<&Path>,
    output_dir: Option<PathBuf>,
    report_path: Option<PathBuf>,
    jobs: usize,
) -> CliResult {
    let cfg = PipelineConfig::load_or_default(config)?;
    let out_dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
    let report_path = report_path.unwrap_or_else(|| out_dir.join("report.txt"));
    let images = collect_images(inputs)?;
    let mut stems = BTreeSet::new();
    for p in &images {
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !stems.insert(stem.clone()) {
            return Err(anyhow!("two inputs share the output name {stem}.txt").into());
        }
    }

    let mut report = RunReport::default();
    report.set("images", images.len());
    report.set("slices", 0);
    report.set("raw_detections", 0);
    report.set("merged_detections", 0);
    report.set("clipped_boxes", 0);
    report.set("truncated_dropped", 0);
    report.set("backend_failures", 0);
    let opts = cfg.infer_options(jobs);
    for path in &images {
        let t = Instant::now();
        let img = load_image(path)?;
        report.time("load", t);

        let t = Instant::now();
        let out = match sahi_infer(&img, cfg.detector.backend(), &cfg.slice, &cfg.merge, &opts) {
            Ok(out) => out,
            Err(e) => {
                report.add("backend_failures", 1);
                write_output(&report_path, report.render())?;
                let err = CliError::from(e);
                return Err(CliError {
                    code: err.code,
                    error: err.error.context(format!("inferring {}", path.display())),
                });
            }
        };
        report.time("infer", t);
        report.add("slices", out.slices);
        report.add("raw_detections", out.raw_detections);
        report.add("merged_detections", out.detections.len());
        report.add("clipped_boxes", out.clipped_boxes);
        report.add("truncated_dropped", out.truncated_dropped);

        let t = Instant::now();
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        write_output(
            &out_dir.join(format!("{stem}.txt")),
            format_detections(&out.detections),
        )?;
        report.time("write", t);
    }
    write_output(&report_path, report.render())
}

pub fn depth2cloud(
    depth: &Path,
    calib: Option<&Path>,
    config: Option<&Path>,
    stride: usize,
    output: &Path,
) -> CliResult {
    let calib = calib.map(load_calib).transpose()?;
    let intr = intrinsics(calib.as_ref(), config)?;
    let map = read_depth_png(&read_bytes(depth)?)
        .with_context(|| format!("decoding {}", depth.display()))?;
    let cloud = depth_to_cloud(&map, &intr, stride)?;
    let text = if output.extension().is_some_and(|e| e == "xyz") {
        write_xyz(&cloud.points)
    } else {
        write_ply(&cloud.points)
    };
    write_output(output, text)?;
    println!("points={}", cloud.len());
    Ok(())
}

fn load_cloud(path: &Path, calib: Option<&KittiCalib>) -> anyhow::Result<Vec<Point3>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => {
            let calib = calib.ok_or_else(|| {
                anyhow!("a velodyne cloud needs --calib with Tr_velo_to_cam and R0_rect")
            })?;
            let raw = read_velodyne_bin(&read_bytes(path)?)
                .with_context(|| format!("decoding {}", path.display()))?;
            raw.iter()
                .map(|p| {
                    calib
                        .velo_to_cam(&Point3::new(f64::from(p.x), f64::from(p.y), f64::from(p.z)))
                        .ok_or_else(|| anyhow!("calibration lacks Tr_velo_to_cam or R0_rect"))
                })
                .collect()
        }
        Some("ply") => {
            Ok(read_ply(&read_text(path)?)
                .with_context(|| format!("parsing {}", path.display()))?)
        }
        _ => Ok(read_xyz(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?),
    }
}

pub fn pseudolabel(
    cloud: &Path,
    calib: Option<&Path>,
    config: Option<&Path>,
    detections: &Path,
    class_names: &[String],
    output: &Path,
) -> CliResult {
    let calib = calib.map(load_calib).transpose()?;
    let intr = intrinsics(calib.as_ref(), config)?;
    let cloud = PseudoCloud::from_points(load_cloud(cloud, calib.as_ref())?);
    let dets = parse_detection_lines(&read_text(detections)?)
        .with_context(|| format!("parsing {}", detections.display()))?;
    let mut labels: Vec<KittiLabel> = Vec::new();
    let mut skipped = 0usize;
    for d in &dets {
        let name = class_names
            .get(d.class_id as usize)
            .ok_or_else(|| anyhow!("class id {} has no entry in --class-names", d.class_id))?;
        let inside = frustum_points(&cloud, &d.bbox, &intr);
        match fit_pseudo_label(&inside.points) {
            Ok(b) => labels.push(KittiLabel::from_box(
                name.clone(),
                d.bbox,
                &b,
                Some(d.score),
            )),
            Err(slice3d::Error::InsufficientEvidence { .. } | slice3d::Error::Domain(_)) => {
                skipped += 1
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_output(output, write_label_file(&labels))?;
    eprintln!("labels={} skipped={skipped}", labels.len());
    Ok(())
}

fn label_files(dir: &Path) -> anyhow::Result<BTreeSet<String>> {
    Ok(std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".txt"))
        .collect())
}

pub fn eval(detections: &Path, ground_truth: &Path, opts: &EvalOptions) -> CliResult {
    let gt_files = label_files(ground_truth)?;
    let det_files = label_files(detections)?;
    if !det_files.is_empty() && det_files != gt_files {
        let mut msg = String::from("detection and ground-truth file sets differ");
        for f in gt_files.difference(&det_files) {
            let _ = write!(msg, "\n  missing detections: {f}");
        }
        for f in det_files.difference(&gt_files) {
            let _ = write!(msg, "\n  no ground truth: {f}");
        }
        return Err(anyhow!(msg).into());
    }
    let mut gts = Vec::with_capacity(gt_files.len());
    let mut dets = Vec::with_capacity(gt_files.len());
    for name in &gt_files {
        let p = ground_truth.join(name);
        gts.push(
            parse_label_file(&read_text(&p)?)
                .with_context(|| format!("parsing {}", p.display()))?,
        );
        if det_files.is_empty() {
            dets.push(Vec::new());
        } else {
            let p = detections.join(name);
            let labels = parse_label_file(&read_text(&p)?)
                .with_context(|| format!("parsing {}", p.display()))?;
            dets.push(labels.iter().map(EvalDetection::from_label).collect());
        }
    }
    let result = evaluate_ap(&dets, &gts, opts)?;
    for c in &result.classes {
        println!("{} {:.6}", c.class, c.ap);
    }
    Ok(())
}

pub fn aa_bench(seed: u64, corpus_size: usize) -> CliResult {
    let rows = consistency_bench(seed, corpus_size)?;
    print!("{}", format_bench_table(&rows));
    Ok(())
}

pub fn anchors(height: usize, width: usize, stride: usize) -> CliResult {
    let grid = generate_anchors(height, width, stride, &AnchorSpec::default())?;
    let mut out = String::new();
    for a in &grid {
        let b = a.bbox2d;
        let _ = writeln!(
            out,
            "{} {:.2} {:.2} {:.2} {:.2} {}",
            a.template,
            b.x1,
            b.y1,
            b.x2,
            b.y2,
            u8::from(a.outside_image)
        );
    }
    print!("{out}");
    Ok(())
}

pub fn gen_synthetic(seed: u64, count: usize, cfg: &SyntheticConfig, dir: &Path) -> CliResult {
    let corpus = generate_corpus(seed, count, cfg)?;
    for (k, sample) in corpus.iter().enumerate() {
        write_output(
            &dir.join("image_2").join(format!("{k:06}.pgm")),
            sample.image.to_pgm(),
        )?;
        write_output(
            &dir.join("label_2").join(format!("{k:06}.txt")),
            write_label_file(&sample.labels()),
        )?;
    }
    Ok(())
}
