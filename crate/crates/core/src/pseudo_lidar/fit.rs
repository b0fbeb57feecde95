//! Geometric pseudo-label fitting.
//!
//! A simple, model-free box fit used to turn frustum points into 3D labels:
//! yaw from the principal axis of the bird's-eye (x, z) scatter, extents from
//! trimmed percentiles along the box axes and the vertical.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::{BBox3D, Dims3, Point3};

pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Lower trimming percentile, in percent.
    pub lower_pct: f64,
    /// Upper trimming percentile, in percent.
    pub upper_pct: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lower_pct: 5.0,
            upper_pct: 95.0,
        }
    }
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Robust (extent, midpoint) along one axis.
///
/// The percentile span covers `(upper − lower)%` of a uniformly filled
/// extent, so it is scaled back up by that fraction, but never beyond the
/// full min..max span of the data.
fn axis_extent(mut values: Vec<f64>, opts: &FitOptions) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let q_lo = percentile(&values, opts.lower_pct);
    let q_hi = percentile(&values, opts.upper_pct);
    let full = values[values.len() - 1] - values[0];
    let frac = (opts.upper_pct - opts.lower_pct) / 100.0;
    let extent = ((q_hi - q_lo) / frac).min(full);
    (extent, 0.5 * (q_lo + q_hi))
}

pub fn fit_pseudo_label(points: &[Point3]) -> Result<BBox3D> {
    fit_pseudo_label_with(points, &FitOptions::default())
}

/// Fits a bottom-anchored box; yaw is reported in `[−π/2, π/2)` since a
/// point set cannot tell the front of a box from its back.
pub fn fit_pseudo_label_with(points: &[Point3], opts: &FitOptions) -> Result<BBox3D> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientEvidence {
            got: points.len(),
            need: MIN_FIT_POINTS,
        });
    }
    if !(0.0 <= opts.lower_pct && opts.lower_pct < opts.upper_pct && opts.upper_pct <= 100.0) {
        return Err(Error::arg(format!("invalid percentiles {opts:?}")));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let mz = points.iter().map(|p| p.z).sum::<f64>() / n;
    let (mut cxx, mut czz, mut cxz) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dz) = (p.x - mx, p.z - mz);
        cxx += dx * dx;
        czz += dz * dz;
        cxz += dx * dz;
    }
    // major axis direction (cos t, sin t) in the (x, z) plane; the box length
    // axis is (cos yaw, −sin yaw), hence yaw = −t
    let major = 0.5 * (2.0 * cxz).atan2(cxx - czz);
    let mut yaw = -major;
    if yaw >= FRAC_PI_2 {
        yaw -= std::f64::consts::PI;
    } else if yaw < -FRAC_PI_2 {
        yaw += std::f64::consts::PI;
    }
    let (s, c) = yaw.sin_cos();

    let (l, mid_l) = axis_extent(points.iter().map(|p| c * p.x - s * p.z).collect(), opts);
    let (w, mid_w) = axis_extent(points.iter().map(|p| s * p.x + c * p.z).collect(), opts);
    let (h, mid_y) = axis_extent(points.iter().map(|p| p.y).collect(), opts);
    if !(l > 0.0 && w > 0.0 && h > 0.0) {
        return Err(Error::domain(format!(
            "points are degenerate along an axis (h={h}, w={w}, l={l})"
        )));
    }
    let center = Point3::new(
        c * mid_l + s * mid_w,
        mid_y + 0.5 * h,
        -s * mid_l + c * mid_w,
    );
    BBox3D::new(center, Dims3::new(h, w, l), yaw)
}
