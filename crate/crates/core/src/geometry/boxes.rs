use std::f64::consts::PI;

use super::camera::Point3;
use crate::error::{Error, Result};

/// Axis-aligned image box, `x` along columns and `y` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox2D {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox2D {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        if ![x1, y1, x2, y2].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("box coordinates must be finite"));
        }
        if x1 > x2 || y1 > y2 {
            return Err(Error::domain(format!(
                "box corners out of order: ({x1}, {y1}, {x2}, {y2})"
            )));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self {
            x1: cx - 0.5 * w,
            y1: cy - 0.5 * h,
            x2: cx + 0.5 * w,
            y2: cy + 0.5 * h,
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
        }
    }

    /// Intersection with another box, `None` when they do not overlap with positive area.
    pub fn intersect(&self, other: &BBox2D) -> Option<BBox2D> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x2 > x1 && y2 > y1).then_some(BBox2D { x1, y1, x2, y2 })
    }
}

/// A scored 2D detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox2D,
    pub score: f64,
    pub class_id: u32,
}

impl Detection {
    pub fn new(bbox: BBox2D, score: f64, class_id: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::domain(format!(
                "score must lie in [0, 1], got {score}"
            )));
        }
        Ok(Self {
            bbox,
            score,
            class_id,
        })
    }
}

/// 7-DoF box in camera coordinates. `center` is the bottom-face center (KITTI
/// `location`), `dims` are (h, w, l) and `yaw` rotates about the camera y axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox3D {
    pub center: Point3,
    pub dims: Dims3,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dims3 {
    pub h: f64,
    pub w: f64,
    pub l: f64,
}

impl Dims3 {
    pub const fn new(h: f64, w: f64, l: f64) -> Self {
        Self { h, w, l }
    }
}

impl BBox3D {
    pub fn new(center: Point3, dims: Dims3, yaw: f64) -> Result<Self> {
        if !(dims.h > 0.0 && dims.w > 0.0 && dims.l > 0.0) {
            return Err(Error::domain(format!(
                "box dimensions must be positive, got {dims:?}"
            )));
        }
        if ![center.x, center.y, center.z, yaw]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::domain("box center and yaw must be finite"));
        }
        Ok(Self { center, dims, yaw })
    }

    pub fn volume(&self) -> f64 {
        self.dims.h * self.dims.w * self.dims.l
    }

    /// Rotates a box-frame offset (along length, vertical, along width) into camera coordinates.
    fn offset_point(&self, along_l: f64, up: f64, along_w: f64) -> Point3 {
        let (s, c) = self.yaw.sin_cos();
        Point3 {
            x: self.center.x + c * along_l + s * along_w,
            y: self.center.y + up,
            z: self.center.z - s * along_l + c * along_w,
        }
    }

    /// Bird's-eye-view footprint as counter-clockwise (x, z) vertices.
    pub fn bev_polygon(&self) -> [(f64, f64); 4] {
        let (l2, w2) = (0.5 * self.dims.l, 0.5 * self.dims.w);
        let mut poly = [(l2, w2), (l2, -w2), (-l2, -w2), (-l2, w2)].map(|(a, b)| {
            let p = self.offset_point(a, 0.0, b);
            (p.x, p.z)
        });
        if signed_area(&poly) < 0.0 {
            poly.reverse();
        }
        poly
    }

    /// True when `p` lies inside the box (boundary inclusive).
    pub fn contains(&self, p: &Point3) -> bool {
        if p.y > self.center.y || p.y < self.center.y - self.dims.h {
            return false;
        }
        let (s, c) = self.yaw.sin_cos();
        let dx = p.x - self.center.x;
        let dz = p.z - self.center.z;
        let along_l = c * dx - s * dz;
        let along_w = s * dx + c * dz;
        along_l.abs() <= 0.5 * self.dims.l && along_w.abs() <= 0.5 * self.dims.w
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// The eight corners of a box, KITTI devkit order: bottom face (indices 0-3)
/// then top face (4-7), both starting at (+l/2, +w/2) and walking
/// (+l,−w), (−l,−w), (−l,+w).
pub fn box3d_corners(b: &BBox3D) -> [Point3; 8] {
    let (l2, w2, h) = (0.5 * b.dims.l, 0.5 * b.dims.w, b.dims.h);
    let along_l = [l2, l2, -l2, -l2, l2, l2, -l2, -l2];
    let up = [0.0, 0.0, 0.0, 0.0, -h, -h, -h, -h];
    let along_w = [w2, -w2, -w2, w2, w2, -w2, -w2, w2];
    std::array::from_fn(|k| b.offset_point(along_l[k], up[k], along_w[k]))
}

pub fn iou_2d(a: &BBox2D, b: &BBox2D) -> f64 {
    let inter = a.intersect(b).map_or(0.0, |i| i.area());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Volumetric IoU of two yaw-rotated boxes: BEV polygon overlap times
/// vertical overlap of the `[y − h, y]` intervals.
pub fn iou_3d(a: &BBox3D, b: &BBox3D) -> f64 {
    let y_top = (a.center.y - a.dims.h).max(b.center.y - b.dims.h);
    let y_bottom = a.center.y.min(b.center.y);
    let vertical = y_bottom - y_top;
    if vertical <= 0.0 {
        return 0.0;
    }
    let bev = convex_intersection_area(&a.bev_polygon(), &b.bev_polygon());
    if bev <= 0.0 {
        return 0.0;
    }
    let inter = bev * vertical;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

fn signed_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        * 0.5
}

/// Area of the intersection of two counter-clockwise convex polygons
/// (Sutherland-Hodgman clipping).
pub(crate) fn convex_intersection_area(subject: &[(f64, f64)], clip: &[(f64, f64)]) -> f64 {
    let mut output: Vec<(f64, f64)> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            return 0.0;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let side = |p: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let input = std::mem::take(&mut output);
        let m = input.len();
        for k in 0..m {
            let cur = input[k];
            let prev = input[(k + m - 1) % m];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(edge_cross(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(edge_cross(prev, cur, sp, sc));
            }
        }
    }
    if output.len() < 3 {
        return 0.0;
    }
    signed_area(&output).max(0.0)
}

fn edge_cross(p: (f64, f64), q: (f64, f64), sp: f64, sq: f64) -> (f64, f64) {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}
