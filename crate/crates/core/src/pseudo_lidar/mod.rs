//! Pseudo-LiDAR: metric depth maps lifted into camera-frame point clouds,
//! plus the 3D localization helpers built on them (RoI mean pooling,
//! front-view encoding, frustum selection and box fitting).

mod cloud_io;
mod fit;
mod pool;

use rayon::prelude::*;

pub use cloud_io::{read_ply, read_xyz, write_ply, write_xyz};
pub use fit::{fit_pseudo_label, fit_pseudo_label_with, FitOptions, MIN_FIT_POINTS};
pub use pool::{roi_mean_pool, PooledCell, RoiPool};

use crate::error::{Error, Result};
use crate::geometry::{backproject_unchecked, project_point, BBox2D, CameraIntrinsics, Point3};

/// Per-pixel metric depth with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(height: usize, width: usize, depth: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        let n = height * width;
        if depth.len() != n || valid.len() != n {
            return Err(Error::arg(format!(
                "depth map buffers must have {n} entries ({height}x{width})"
            )));
        }
        if let Some(k) = (0..n).find(|&k| valid[k] && !(depth[k] > 0.0 && depth[k].is_finite())) {
            return Err(Error::domain(format!(
                "valid pixel ({}, {}) has depth {}",
                k / width.max(1),
                k % width.max(1),
                depth[k]
            )));
        }
        Ok(Self {
            height,
            width,
            depth,
            valid,
        })
    }

    /// Pixels with positive finite depth are valid; everything else is not.
    pub fn from_depths(height: usize, width: usize, depth: Vec<f64>) -> Result<Self> {
        let valid = depth.iter().map(|d| *d > 0.0 && d.is_finite()).collect();
        let depth = depth
            .into_iter()
            .map(|d| if d > 0.0 && d.is_finite() { d } else { 0.0 })
            .collect();
        Self::new(height, width, depth, valid)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Depth at (row, col), `None` when invalid.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let k = row * self.width + col;
        self.valid[k].then(|| self.depth[k])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Back-projected points and the pixel each came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoCloud {
    pub points: Vec<Point3>,
    pub source_pixel: Vec<(usize, usize)>,
}

impl PseudoCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A cloud without pixel provenance (e.g. loaded from disk). Points with
    /// non-positive depth are dropped; source pixels are set to `(0, 0)`.
    pub fn from_points(points: impl IntoIterator<Item = Point3>) -> Self {
        let points: Vec<Point3> = points.into_iter().filter(|p| p.z > 0.0).collect();
        let source_pixel = vec![(0, 0); points.len()];
        Self {
            points,
            source_pixel,
        }
    }
}

/// Back-projects every valid pixel on the `sample_stride` lattice, row-major.
pub fn depth_to_cloud(
    d: &DepthMap,
    intr: &CameraIntrinsics,
    sample_stride: usize,
) -> Result<PseudoCloud> {
    if sample_stride == 0 {
        return Err(Error::arg("sample stride must be at least 1"));
    }
    let rows: Vec<Vec<(Point3, (usize, usize))>> = (0..d.height)
        .into_par_iter()
        .step_by(sample_stride)
        .map(|i| {
            (0..d.width)
                .step_by(sample_stride)
                .filter_map(|j| {
                    d.get(i, j)
                        .map(|z| (backproject_unchecked(i as f64, j as f64, z, intr), (i, j)))
                })
                .collect()
        })
        .collect();
    let (points, source_pixel) = rows.into_iter().flatten().unzip();
    Ok(PseudoCloud {
        points,
        source_pixel,
    })
}

/// Three per-pixel channels: camera-frame x, y and Z. Invalid pixels hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontViewEncoding {
    pub height: usize,
    pub width: usize,
    pub channels: [Vec<f64>; 3],
    pub valid: Vec<bool>,
}

pub fn front_view_encode(d: &DepthMap, intr: &CameraIntrinsics) -> FrontViewEncoding {
    let n = d.height * d.width;
    let mut channels = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (k, _) in d.valid.iter().enumerate().filter(|(_, v)| **v) {
        let p = backproject_unchecked((k / d.width) as f64, (k % d.width) as f64, d.depth[k], intr);
        channels[0][k] = p.x;
        channels[1][k] = p.y;
        channels[2][k] = p.z;
    }
    FrontViewEncoding {
        height: d.height,
        width: d.width,
        channels,
        valid: d.valid.clone(),
    }
}

/// Points whose projection lands inside `roi`, edges inclusive.
pub fn frustum_points(cloud: &PseudoCloud, roi: &BBox2D, intr: &CameraIntrinsics) -> PseudoCloud {
    let mut out = PseudoCloud::default();
    for (p, src) in cloud.points.iter().zip(&cloud.source_pixel) {
        let Ok(px) = project_point(p, intr) else {
            continue;
        };
        if px.col >= roi.x1 && px.col <= roi.x2 && px.row >= roi.y1 && px.row <= roi.y2 {
            out.points.push(*p);
            out.source_pixel.push(*src);
        }
    }
    out
}
