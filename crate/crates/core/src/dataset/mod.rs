//! KITTI on-disk formats and the AP metric.

mod calib;
mod depth_png;
mod eval;
mod label;
mod velodyne;

pub use calib::{parse_calib, KittiCalib};
pub use depth_png::{read_depth_png, write_depth_png, DEPTH_PNG_SCALE};
pub use eval::{
    evaluate_ap, recall_samples, ClassEval, Difficulty, EvalDetection, EvalMode, EvalOptions,
    EvalResult, DEFAULT_RECALL_POINTS,
};
pub use label::{parse_label_file, write_label_file, KittiLabel, DONT_CARE};
pub use velodyne::{read_velodyne_bin, write_velodyne_bin, VeloPoint};
