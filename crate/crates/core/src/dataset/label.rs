//! KITTI object label files.
//!
//! One object per line, 15 whitespace-separated fields plus an optional
//! score:
//!
//! ```text
//! type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y [score]
//! ```
//!
//! Writing prints `occluded` as an integer and every other number with two
//! decimals, so text produced by [`write_label_file`] survives a parse/write
//! cycle byte for byte.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{BBox2D, BBox3D, Dims3, Point3};

pub const DONT_CARE: &str = "DontCare";

#[derive(Debug, Clone, PartialEq)]
pub struct KittiLabel {
    /// Category name, kept verbatim.
    pub kind: String,
    pub truncated: f64,
    pub occluded: i32,
    pub alpha: f64,
    pub bbox: BBox2D,
    pub dims: Dims3,
    /// Bottom-face center in camera coordinates.
    pub location: Point3,
    pub rotation_y: f64,
    pub score: Option<f64>,
}

impl KittiLabel {
    pub fn is_dont_care(&self) -> bool {
        self.kind == DONT_CARE
    }

    pub fn bbox3d(&self) -> Result<BBox3D> {
        BBox3D::new(self.location, self.dims, self.rotation_y)
    }

    /// Label for a fitted 3D box, with alpha derived from the viewing ray.
    pub fn from_box(kind: impl Into<String>, bbox: BBox2D, b: &BBox3D, score: Option<f64>) -> Self {
        let alpha = crate::geometry::wrap_angle(b.yaw - b.center.x.atan2(b.center.z));
        Self {
            kind: kind.into(),
            truncated: 0.0,
            occluded: 0,
            alpha,
            bbox,
            dims: b.dims,
            location: b.center,
            rotation_y: b.yaw,
            score,
        }
    }
}

pub fn parse_label_file(text: &str) -> Result<Vec<KittiLabel>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 15 && fields.len() != 16 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 15 or 16 fields, found {}", fields.len()),
            });
        }
        let num = |k: usize| -> Result<f64> {
            fields[k].parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("field {} is not a number: {:?}", k + 1, fields[k]),
            })
        };
        let occluded = fields[2].parse::<i32>().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("occlusion is not an integer: {:?}", fields[2]),
        })?;
        let bbox = BBox2D::new(num(4)?, num(5)?, num(6)?, num(7)?).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        out.push(KittiLabel {
            kind: fields[0].to_string(),
            truncated: num(1)?,
            occluded,
            alpha: num(3)?,
            bbox,
            dims: Dims3::new(num(8)?, num(9)?, num(10)?),
            location: Point3::new(num(11)?, num(12)?, num(13)?),
            rotation_y: num(14)?,
            score: if fields.len() == 16 {
                Some(num(15)?)
            } else {
                None
            },
        });
    }
    Ok(out)
}

pub fn write_label_file(labels: &[KittiLabel]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = write!(
            out,
            "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
            l.kind,
            l.truncated,
            l.occluded,
            l.alpha,
            l.bbox.x1,
            l.bbox.y1,
            l.bbox.x2,
            l.bbox.y2,
            l.dims.h,
            l.dims.w,
            l.dims.l,
            l.location.x,
            l.location.y,
            l.location.z,
            l.rotation_y
        );
        if let Some(s) = l.score {
            let _ = write!(out, " {s:.2}");
        }
        out.push('\n');
    }
    out
}
