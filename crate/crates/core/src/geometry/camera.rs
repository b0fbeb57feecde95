//! Pinhole camera model and stereo disparity/depth conversion.
//!
//! Camera coordinates follow the KITTI convention: x right, y down, z forward.
//! Pixel coordinates are given as (row `i`, column `j`).
//!
//! ```text
//! depth:      Z = fx · T / D
//! backproject x = (j − cx) · Z / fx
//!             y = (i − cy) · Z / fy
//! ```

use crate::error::{Error, Result};

/// Pinhole intrinsics in pixels. `fx_px` is the focal length divided by the
/// physical pixel size, which is what calibration files store.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx_px: f64,
    pub fy_px: f64,
    pub cx_px: f64,
    pub cy_px: f64,
}

impl CameraIntrinsics {
    pub fn new(fx_px: f64, fy_px: f64, cx_px: f64, cy_px: f64) -> Result<Self> {
        if !(fx_px > 0.0 && fx_px.is_finite() && fy_px > 0.0 && fy_px.is_finite()) {
            return Err(Error::domain(format!(
                "focal lengths must be positive and finite (fx={fx_px}, fy={fy_px})"
            )));
        }
        if !(cx_px.is_finite() && cy_px.is_finite()) {
            return Err(Error::domain("principal point must be finite"));
        }
        Ok(Self {
            fx_px,
            fy_px,
            cx_px,
            cy_px,
        })
    }
}

/// Two horizontally displaced cameras sharing intrinsics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRig {
    pub baseline_m: f64,
}

impl StereoRig {
    pub fn new(baseline_m: f64) -> Result<Self> {
        if !(baseline_m > 0.0 && baseline_m.is_finite()) {
            return Err(Error::domain(format!(
                "baseline must be positive, got {baseline_m}"
            )));
        }
        Ok(Self { baseline_m })
    }
}

/// A point in camera coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Image-plane location of a projected point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDepth {
    pub row: f64,
    pub col: f64,
    pub depth: f64,
}

pub fn disparity_to_depth(
    disparity_px: f64,
    intr: &CameraIntrinsics,
    rig: &StereoRig,
) -> Result<f64> {
    if !(disparity_px > 0.0 && disparity_px.is_finite()) {
        return Err(Error::domain(format!(
            "disparity must be positive and finite, got {disparity_px}"
        )));
    }
    Ok(intr.fx_px * rig.baseline_m / disparity_px)
}

pub fn depth_to_disparity(depth_m: f64, intr: &CameraIntrinsics, rig: &StereoRig) -> Result<f64> {
    if !(depth_m > 0.0 && depth_m.is_finite()) {
        return Err(Error::domain(format!(
            "depth must be positive and finite, got {depth_m}"
        )));
    }
    Ok(intr.fx_px * rig.baseline_m / depth_m)
}

/// Lifts pixel (row, col) with metric depth into camera coordinates.
pub fn backproject_pixel(
    row: f64,
    col: f64,
    depth_m: f64,
    intr: &CameraIntrinsics,
) -> Result<Point3> {
    if !(depth_m > 0.0 && depth_m.is_finite()) {
        return Err(Error::domain(format!(
            "depth must be positive and finite, got {depth_m}"
        )));
    }
    Ok(backproject_unchecked(row, col, depth_m, intr))
}

#[inline]
pub(crate) fn backproject_unchecked(row: f64, col: f64, z: f64, intr: &CameraIntrinsics) -> Point3 {
    Point3 {
        x: (col - intr.cx_px) * z / intr.fx_px,
        y: (row - intr.cy_px) * z / intr.fy_px,
        z,
    }
}

pub fn project_point(p: &Point3, intr: &CameraIntrinsics) -> Result<PixelDepth> {
    if p.z.is_nan() || p.z <= 0.0 {
        return Err(Error::BehindCamera(p.z));
    }
    Ok(PixelDepth {
        row: p.y * intr.fy_px / p.z + intr.cy_px,
        col: p.x * intr.fx_px / p.z + intr.cx_px,
        depth: p.z,
    })
}
