//! KITTI velodyne scans: packed little-endian `f32` quadruples
//! `(x, y, z, reflectance)` in the LiDAR frame.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VeloPoint {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub reflectance: f32,
}

pub fn read_velodyne_bin(bytes: &[u8]) -> Result<Vec<VeloPoint>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Format(format!(
            "velodyne scan length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let f = |k: usize| f32::from_le_bytes([c[k], c[k + 1], c[k + 2], c[k + 3]]);
            VeloPoint {
                x: f(0),
                y: f(4),
                z: f(8),
                reflectance: f(12),
            }
        })
        .collect())
}

pub fn write_velodyne_bin(points: &[VeloPoint]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * 16);
    for p in points {
        for v in [p.x, p.y, p.z, p.reflectance] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
