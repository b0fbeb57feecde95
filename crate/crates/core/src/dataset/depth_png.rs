//! KITTI depth-map PNGs: 16-bit grayscale, meters = value / 256, 0 = no data.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::image::decode_png;
use crate::pseudo_lidar::DepthMap;

pub const DEPTH_PNG_SCALE: f64 = 256.0;

pub fn read_depth_png(bytes: &[u8]) -> Result<DepthMap> {
    let (info, raw) = decode_png(bytes)?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(Error::Format(format!(
            "depth PNG must be 16-bit grayscale, got {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let depth = raw
        .chunks_exact(2)
        .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / DEPTH_PNG_SCALE)
        .collect();
    DepthMap::from_depths(info.height as usize, info.width as usize, depth)
}

/// Encodes a depth map. Depths beyond 255.996 m saturate; valid depths too
/// small to represent are stored as the smallest nonzero value so they stay
/// valid.
pub fn write_depth_png(d: &DepthMap) -> Result<Vec<u8>> {
    let (h, w) = (d.height(), d.width());
    if h == 0 || w == 0 {
        return Err(Error::arg("cannot encode an empty depth map"));
    }
    let mut raw = Vec::with_capacity(2 * h * w);
    for i in 0..h {
        for j in 0..w {
            let v = match d.get(i, j) {
                None => 0u16,
                Some(z) => (z * DEPTH_PNG_SCALE).round().clamp(1.0, 65535.0) as u16,
            };
            raw.extend_from_slice(&v.to_be_bytes());
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(Cursor::new(&mut out), w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Format(format!("PNG: {e}")))?;
        writer
            .write_image_data(&raw)
            .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    }
    Ok(out)
}
