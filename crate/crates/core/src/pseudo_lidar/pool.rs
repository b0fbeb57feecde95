use super::DepthMap;
use crate::error::{Error, Result};
use crate::geometry::{backproject_unchecked, BBox2D, CameraIntrinsics, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PooledCell {
    /// Mean back-projected coordinate of the cell's valid pixels; zero when empty.
    pub mean: Point3,
    pub count: usize,
}

/// Row-major `grid_h x grid_w` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiPool {
    pub grid_h: usize,
    pub grid_w: usize,
    pub cells: Vec<PooledCell>,
}

impl RoiPool {
    pub fn cell(&self, row: usize, col: usize) -> &PooledCell {
        &self.cells[row * self.grid_w + col]
    }
}

/// Splits `[start, end)` into `parts` equal integer spans; the last span
/// absorbs the remainder.
fn spans(start: usize, end: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = (end - start) / parts;
    (0..parts)
        .map(|k| {
            let lo = start + k * base;
            let hi = if k + 1 == parts { end } else { lo + base };
            (lo, hi)
        })
        .collect()
}

/// RoI mean pooling over back-projected depth.
///
/// The RoI covers pixel columns `floor(x1)..ceil(x2)` and rows
/// `floor(y1)..ceil(y2)`, clipped to the image. Invalid pixels are skipped,
/// not averaged as zeros.
pub fn roi_mean_pool(
    d: &DepthMap,
    intr: &CameraIntrinsics,
    roi: &BBox2D,
    grid_h: usize,
    grid_w: usize,
) -> Result<RoiPool> {
    if grid_h == 0 || grid_w == 0 {
        return Err(Error::arg("pooling grid must be at least 1x1"));
    }
    let clip = |lo: f64, hi: f64, n: usize| {
        let a = lo.floor().max(0.0);
        let b = hi.ceil().min(n as f64);
        (a < b).then_some((a as usize, b as usize))
    };
    let (Some((c0, c1)), Some((r0, r1))) = (
        clip(roi.x1, roi.x2, d.width()),
        clip(roi.y1, roi.y2, d.height()),
    ) else {
        return Err(Error::arg(format!("RoI {roi:?} lies outside the image")));
    };
    let rows = spans(r0, r1, grid_h);
    let cols = spans(c0, c1, grid_w);
    let mut cells = Vec::with_capacity(grid_h * grid_w);
    for &(ra, rb) in &rows {
        for &(ca, cb) in &cols {
            let mut cell = PooledCell::default();
            for i in ra..rb {
                for j in ca..cb {
                    if let Some(z) = d.get(i, j) {
                        let p = backproject_unchecked(i as f64, j as f64, z, intr);
                        // running mean reproduces a constant exactly
                        cell.count += 1;
                        let k = cell.count as f64;
                        cell.mean.x += (p.x - cell.mean.x) / k;
                        cell.mean.y += (p.y - cell.mean.y) / k;
                        cell.mean.z += (p.z - cell.mean.z) / k;
                    }
                }
            }
            cells.push(cell);
        }
    }
    Ok(RoiPool {
        grid_h,
        grid_w,
        cells,
    })
}
