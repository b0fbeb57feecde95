//! Shared 2D/3D anchors.
//!
//! Every anchor is a 2D template box on a regular grid carrying a 3D prior
//! (depth, dimensions, yaw), so that a single assignment serves both the 2D
//! and the 3D regression targets.
//!
//! Regression targets relative to an anchor with center `(ax, ay)` and size
//! `(aw, ah)`:
//!
//! ```text
//! dx  = (gx − ax) / aw        dy  = (gy − ay) / ah
//! dw  = ln(gw / aw)           dh  = ln(gh / ah)
//! dxp = (up − ax) / aw        dyp = (vp − ay) / ah     (up, vp): projected 3D location
//! dz  = gz − z0               d{h,w,l}3 = ln(g / prior)
//! dyaw = wrap(gyaw − yaw0)
//! ```

use crate::error::{Error, Result};
use crate::geometry::{
    backproject_pixel, iou_2d, project_point, wrap_angle, BBox2D, BBox3D, CameraIntrinsics, Dims3,
};

pub const DEFAULT_IOU_FG: f64 = 0.5;
pub const DEFAULT_IOU_BG: f64 = 0.3;

/// Bound on decoded log-size deltas; `exp(8) ≈ 2981`.
pub const MAX_LOG_DELTA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior3D {
    pub z: f64,
    pub dims: Dims3,
    pub yaw: f64,
}

/// Anchor templates: every (scale, ratio) pair is one template. `priors`
/// holds one 3D prior per template in scale-major order, or a single prior
/// shared by all templates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSpec {
    /// Template heights in pixels.
    pub scales: Vec<f64>,
    /// Width / height.
    pub aspect_ratios: Vec<f64>,
    pub priors: Vec<Prior3D>,
}

pub const DEFAULT_FEATURE_STRIDE: usize = 16;

impl Default for AnchorSpec {
    /// Three ratios over four octave scales with one car-sized prior.
    fn default() -> Self {
        Self {
            scales: vec![32.0, 64.0, 128.0, 256.0],
            aspect_ratios: vec![0.5, 1.0, 2.0],
            priors: vec![Prior3D {
                z: 20.0,
                dims: Dims3::new(1.5, 1.6, 3.9),
                yaw: 0.0,
            }],
        }
    }
}

impl AnchorSpec {
    pub fn num_templates(&self) -> usize {
        self.scales.len() * self.aspect_ratios.len()
    }

    fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.aspect_ratios.is_empty() || self.priors.is_empty() {
            return Err(Error::arg(
                "anchor spec needs at least one scale, ratio and prior",
            ));
        }
        if self
            .scales
            .iter()
            .chain(&self.aspect_ratios)
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::arg("anchor scales and ratios must be positive"));
        }
        for p in &self.priors {
            if !(p.z > 0.0 && p.dims.h > 0.0 && p.dims.w > 0.0 && p.dims.l > 0.0) {
                return Err(Error::arg(format!("invalid 3D prior {p:?}")));
            }
        }
        if self.priors.len() != 1 && self.priors.len() != self.num_templates() {
            return Err(Error::arg(format!(
                "expected 1 or {} priors, got {}",
                self.num_templates(),
                self.priors.len()
            )));
        }
        Ok(())
    }

    fn prior(&self, template: usize) -> Prior3D {
        if self.priors.len() == 1 {
            self.priors[0]
        } else {
            self.priors[template]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub bbox2d: BBox2D,
    pub prior3d: Prior3D,
    pub template: usize,
    /// The box extends past the image border. Anchors are never clipped.
    pub outside_image: bool,
}

/// One anchor per grid cell and template, cell-major then scale then ratio.
pub fn generate_anchors(
    image_h: usize,
    image_w: usize,
    feature_stride: usize,
    spec: &AnchorSpec,
) -> Result<Vec<Anchor>> {
    if feature_stride == 0 {
        return Err(Error::arg("feature stride must be positive"));
    }
    spec.validate()?;
    let (rows, cols) = (
        image_h.div_ceil(feature_stride),
        image_w.div_ceil(feature_stride),
    );
    let s = feature_stride as f64;
    let mut out = Vec::with_capacity(rows * cols * spec.num_templates());
    for row in 0..rows {
        for col in 0..cols {
            let cx = col as f64 * s + s / 2.0;
            let cy = row as f64 * s + s / 2.0;
            for (si, &scale) in spec.scales.iter().enumerate() {
                for (ri, &ratio) in spec.aspect_ratios.iter().enumerate() {
                    let template = si * spec.aspect_ratios.len() + ri;
                    let root = ratio.sqrt();
                    let bbox2d = BBox2D::from_center(cx, cy, scale * root, scale / root);
                    let outside_image = bbox2d.x1 < 0.0
                        || bbox2d.y1 < 0.0
                        || bbox2d.x2 > image_w as f64
                        || bbox2d.y2 > image_h as f64;
                    out.push(Anchor {
                        bbox2d,
                        prior3d: spec.prior(template),
                        template,
                        outside_image,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub bbox2d: BBox2D,
    pub bbox3d: BBox3D,
    pub class_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorLabel {
    /// Matched to the ground truth at this index.
    Foreground(usize),
    Background,
    Ignore,
}

/// Threshold assignment by 2D IoU, plus a forced match of every ground truth
/// to its best still-unforced anchor (ties to the lowest anchor index), so
/// each ground truth owns at least one foreground anchor.
pub fn match_anchors(
    anchors: &[Anchor],
    gt: &[GroundTruth],
    iou_fg: f64,
    iou_bg: f64,
) -> Result<Vec<AnchorLabel>> {
    if iou_bg > iou_fg {
        return Err(Error::arg(format!(
            "background threshold {iou_bg} exceeds foreground threshold {iou_fg}"
        )));
    }
    let ious: Vec<Vec<f64>> = anchors
        .iter()
        .map(|a| gt.iter().map(|g| iou_2d(&a.bbox2d, &g.bbox2d)).collect())
        .collect();
    let mut labels: Vec<AnchorLabel> = ious
        .iter()
        .map(|row| {
            let best = row
                .iter()
                .enumerate()
                .fold(None, |acc: Option<(usize, f64)>, (j, &v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((j, v)),
                });
            match best {
                Some((j, v)) if v >= iou_fg => AnchorLabel::Foreground(j),
                Some((_, v)) if v >= iou_bg => AnchorLabel::Ignore,
                _ => AnchorLabel::Background,
            }
        })
        .collect();

    let mut forced = vec![false; anchors.len()];
    for j in 0..gt.len() {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in ious.iter().enumerate() {
            if forced[i] {
                continue;
            }
            if best.is_none_or(|(_, bv)| row[j] > bv) {
                best = Some((i, row[j]));
            }
        }
        if let Some((i, _)) = best {
            forced[i] = true;
            labels[i] = AnchorLabel::Foreground(j);
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegressionDeltas {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
    /// Projected 3D location, relative to the anchor center in anchor units.
    pub dxp: f64,
    pub dyp: f64,
    pub dz: f64,
    pub dh3: f64,
    pub dw3: f64,
    pub dl3: f64,
    pub dyaw: f64,
}

fn anchor_frame(a: &Anchor) -> (f64, f64, f64, f64) {
    let (ax, ay) = a.bbox2d.center();
    (ax, ay, a.bbox2d.width(), a.bbox2d.height())
}

pub fn encode_deltas(
    anchor: &Anchor,
    gt2d: &BBox2D,
    gt3d: &BBox3D,
    intr: &CameraIntrinsics,
) -> Result<RegressionDeltas> {
    let (ax, ay, aw, ah) = anchor_frame(anchor);
    if !(aw > 0.0 && ah > 0.0) {
        return Err(Error::domain("anchor has zero size"));
    }
    let (gw, gh) = (gt2d.width(), gt2d.height());
    if !(gw > 0.0 && gh > 0.0) {
        return Err(Error::domain(format!(
            "ground-truth 2D box has non-positive size {gt2d:?}"
        )));
    }
    let d = gt3d.dims;
    if !(d.h > 0.0 && d.w > 0.0 && d.l > 0.0) {
        return Err(Error::domain(format!(
            "ground-truth 3D box has non-positive size {d:?}"
        )));
    }
    let proj = project_point(&gt3d.center, intr).map_err(|e| Error::domain(e.to_string()))?;
    let (gx, gy) = gt2d.center();
    let p = &anchor.prior3d;
    Ok(RegressionDeltas {
        dx: (gx - ax) / aw,
        dy: (gy - ay) / ah,
        dw: (gw / aw).ln(),
        dh: (gh / ah).ln(),
        dxp: (proj.col - ax) / aw,
        dyp: (proj.row - ay) / ah,
        dz: gt3d.center.z - p.z,
        dh3: (d.h / p.dims.h).ln(),
        dw3: (d.w / p.dims.w).ln(),
        dl3: (d.l / p.dims.l).ln(),
        dyaw: wrap_angle(gt3d.yaw - p.yaw),
    })
}

/// Inverse of [`encode_deltas`]. Log-size deltas are clamped to
/// `±MAX_LOG_DELTA`.
pub fn decode_deltas(
    anchor: &Anchor,
    d: &RegressionDeltas,
    intr: &CameraIntrinsics,
) -> Result<(BBox2D, BBox3D)> {
    let all = [
        d.dx, d.dy, d.dw, d.dh, d.dxp, d.dyp, d.dz, d.dh3, d.dw3, d.dl3, d.dyaw,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("deltas must be finite"));
    }
    let clamp = |v: f64| v.clamp(-MAX_LOG_DELTA, MAX_LOG_DELTA);
    let (ax, ay, aw, ah) = anchor_frame(anchor);
    let bbox2d = BBox2D::from_center(
        ax + d.dx * aw,
        ay + d.dy * ah,
        aw * clamp(d.dw).exp(),
        ah * clamp(d.dh).exp(),
    );
    let p = &anchor.prior3d;
    let z = p.z + d.dz;
    let center = backproject_pixel(ay + d.dyp * ah, ax + d.dxp * aw, z, intr)?;
    let dims = Dims3::new(
        p.dims.h * clamp(d.dh3).exp(),
        p.dims.w * clamp(d.dw3).exp(),
        p.dims.l * clamp(d.dl3).exp(),
    );
    let bbox3d = BBox3D::new(center, dims, wrap_angle(p.yaw + d.dyaw))?;
    Ok((bbox2d, bbox3d))
}
