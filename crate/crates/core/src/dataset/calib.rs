//! KITTI calibration files: `KEY: v1 v2 ...` lines.
//!
//! `P2` (3x4, row-major) is required. `R0_rect` (3x3) and `Tr_velo_to_cam`
//! (3x4) are read when present and used to move LiDAR points into the
//! rectified camera frame.

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Point3};

#[derive(Debug, Clone, PartialEq)]
pub struct KittiCalib {
    pub p2: [f64; 12],
    pub r0_rect: Option<[f64; 9]>,
    pub tr_velo_to_cam: Option<[f64; 12]>,
}

impl KittiCalib {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::new(self.p2[0], self.p2[5], self.p2[2], self.p2[6])
    }

    /// LiDAR frame to rectified camera frame, `None` without the transforms.
    pub fn velo_to_cam(&self, p: &Point3) -> Option<Point3> {
        let tr = self.tr_velo_to_cam.as_ref()?;
        let r0 = self.r0_rect.as_ref()?;
        let t = [
            tr[0] * p.x + tr[1] * p.y + tr[2] * p.z + tr[3],
            tr[4] * p.x + tr[5] * p.y + tr[6] * p.z + tr[7],
            tr[8] * p.x + tr[9] * p.y + tr[10] * p.z + tr[11],
        ];
        let row = |k: usize| r0[3 * k] * t[0] + r0[3 * k + 1] * t[1] + r0[3 * k + 2] * t[2];
        Some(Point3::new(row(0), row(1), row(2)))
    }
}

fn values<const N: usize>(rest: &str, line: usize, key: &str) -> Result<[f64; N]> {
    let nums: Vec<f64> = rest
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{key}: invalid number {t:?}"),
            })
        })
        .collect::<Result<_>>()?;
    nums.try_into().map_err(|v: Vec<f64>| Error::Parse {
        line,
        message: format!("{key}: expected {N} numbers, found {}", v.len()),
    })
}

pub fn parse_calib(text: &str) -> Result<KittiCalib> {
    let (mut p2, mut r0, mut tr) = (None, None, None);
    for (idx, line) in text.lines().enumerate() {
        let Some((key, rest)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        match key {
            "P2" => p2 = Some(values::<12>(rest, idx + 1, key)?),
            "R0_rect" | "R_rect" => r0 = Some(values::<9>(rest, idx + 1, key)?),
            "Tr_velo_to_cam" | "Tr_velo_cam" => tr = Some(values::<12>(rest, idx + 1, key)?),
            _ => {}
        }
    }
    let p2 = p2.ok_or(Error::Parse {
        line: 0,
        message: "calibration has no P2 entry".into(),
    })?;
    let calib = KittiCalib {
        p2,
        r0_rect: r0,
        tr_velo_to_cam: tr,
    };
    calib.intrinsics().map_err(|e| Error::Parse {
        line: 0,
        message: format!("P2 does not describe a camera: {e}"),
    })?;
    Ok(calib)
}
