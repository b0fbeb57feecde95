//! `slice3d`: sliced 2D detection, pseudo-LiDAR lifting and KITTI evaluation.
//!
//! Exit status: 0 on success, 2 for bad input or configuration, 3 when the
//! detector backend or output writing fails.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "slice3d",
    version,
    about = "Sliced monocular 3D detection pipeline tools"
)]
struct Cli {
    /// Worker threads for region inference (default: number of CPUs).
    #[arg(long, global = true, env = "SLICE3D_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the slice manifest (`row col h w` per line) for an image.
    Slice {
        image: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the manifest here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sliced inference; writes `<stem>.txt` detections per image and a run report.
    Infer {
        /// Image files (PGM or 16-bit PNG) or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `output.dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Report path (default: `<output dir>/report.txt`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Back-project a KITTI depth PNG into a PLY (or `.xyz`) point cloud.
    Depth2cloud {
        depth: PathBuf,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit 3D pseudo-labels to the points inside each 2D detection's frustum.
    Pseudolabel {
        /// Velodyne `.bin`, `.ply` or `.xyz` cloud.
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Detections in `class_id score x1 y1 x2 y2` format.
        #[arg(long)]
        detections: PathBuf,
        /// Label names indexed by class id.
        #[arg(long, value_delimiter = ',', default_value = "Car,Pedestrian,Cyclist")]
        class_names: Vec<String>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Average precision of KITTI label files against ground truth.
    Eval {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::ThreeD)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.7)]
        iou: f64,
        #[arg(long, default_value_t = slice3d::dataset::DEFAULT_RECALL_POINTS)]
        recall_points: usize,
        #[arg(long, value_enum)]
        difficulty: Option<DifficultyArg>,
    },
    /// Shift-consistency table for the downsampling operators.
    AaBench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        corpus_size: usize,
    },
    /// List the default anchor grid: `template x1 y1 x2 y2 outside` per line.
    Anchors {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = slice3d::anchors::DEFAULT_FEATURE_STRIDE)]
        stride: usize,
    },
    /// Write a seeded corpus of bright squares (`image_2/*.pgm`, `label_2/*.txt`).
    GenSynthetic {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 1024)]
        height: usize,
        #[arg(long, default_value_t = 1024)]
        width: usize,
        #[arg(long, default_value_t = 5)]
        squares: usize,
        #[arg(long, default_value_t = 8)]
        square_size: usize,
        #[arg(long, default_value_t = 2)]
        gap: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DifficultyArg {
    Easy,
    Moderate,
    Hard,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.map(usize::from).unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, std::num::NonZeroUsize::get)
    });
    let result = match cli.command {
        Command::Slice {
            image,
            config,
            output,
        } => commands::slice(&image, config.as_deref(), output.as_deref()),
        Command::Infer {
            inputs,
            config,
            output_dir,
            report,
        } => commands::infer(&inputs, config.as_deref(), output_dir, report, jobs),
        Command::Depth2cloud {
            depth,
            calib,
            config,
            stride,
            output,
        } => commands::depth2cloud(&depth, calib.as_deref(), config.as_deref(), stride, &output),
        Command::Pseudolabel {
            cloud,
            calib,
            config,
            detections,
            class_names,
            output,
        } => commands::pseudolabel(
            &cloud,
            calib.as_deref(),
            config.as_deref(),
            &detections,
            &class_names,
            &output,
        ),
        Command::Eval {
            detections,
            ground_truth,
            mode,
            iou,
            recall_points,
            difficulty,
        } => {
            use slice3d::dataset::{Difficulty, EvalMode, EvalOptions};
            let mut opts = EvalOptions::new(
                iou,
                match mode {
                    ModeArg::TwoD => EvalMode::Box2D,
                    ModeArg::ThreeD => EvalMode::Box3D,
                },
            );
            opts.recall_points = recall_points;
            opts.difficulty = difficulty.map(|d| match d {
                DifficultyArg::Easy => Difficulty::Easy,
                DifficultyArg::Moderate => Difficulty::Moderate,
                DifficultyArg::Hard => Difficulty::Hard,
            });
            commands::eval(&detections, &ground_truth, &opts)
        }
        Command::AaBench { seed, corpus_size } => commands::aa_bench(seed, corpus_size),
        Command::Anchors {
            height,
            width,
            stride,
        } => commands::anchors(height, width, stride),
        Command::GenSynthetic {
            seed,
            count,
            output_dir,
            height,
            width,
            squares,
            square_size,
            gap,
        } => {
            let cfg = slice3d::synthetic::SyntheticConfig {
                height,
                width,
                squares,
                square_size,
                gap,
            };
            commands::gen_synthetic(seed, count, &cfg, &output_dir)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
