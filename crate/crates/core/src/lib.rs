//! Deterministic core of a sliced monocular 3D detection pipeline.
//!
//! - [`geometry`]: pinhole camera, stereo depth, 2D/3D boxes and IoU
//! - [`antialias`]: blurred downsampling and shift-consistency measurement
//! - [`sahi`]: slicing-aided inference over a pluggable 2D detector
//! - [`anchors`]: shared 2D/3D anchor grids, assignment and box deltas
//! - [`pseudo_lidar`]: depth maps to point clouds, RoI pooling, pseudo-labels
//! - [`dataset`]: KITTI labels, calibration, depth PNG, velodyne, AP metric

pub mod anchors;
pub mod antialias;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod image;
pub mod pseudo_lidar;
pub mod sahi;
pub mod synthetic;

pub use error::{Error, Result};
