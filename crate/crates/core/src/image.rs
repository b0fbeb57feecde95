//! Grayscale images and the two on-disk formats the pipeline reads: binary
//! PGM (P5, 8 or 16 bit) and 16-bit grayscale PNG.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::sahi::SliceRegion;

/// Grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::arg("image dimensions must be positive"));
        }
        if pixels.len() != height * width {
            return Err(Error::arg(format!(
                "pixel buffer of length {} does not match {height}x{width}",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0.0; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f32) {
        self.pixels[row * self.width + col] = v;
    }

    /// Copies out a region. The region must lie inside the image.
    pub fn crop(&self, region: &SliceRegion) -> Result<GrayImage> {
        if region.origin_row + region.height > self.height
            || region.origin_col + region.width > self.width
            || region.height == 0
            || region.width == 0
        {
            return Err(Error::arg(format!(
                "region {region:?} does not fit a {}x{} image",
                self.height, self.width
            )));
        }
        let mut pixels = Vec::with_capacity(region.height * region.width);
        for r in region.origin_row..region.origin_row + region.height {
            let start = r * self.width + region.origin_col;
            pixels.extend_from_slice(&self.pixels[start..start + region.width]);
        }
        GrayImage::new(region.height, region.width, pixels)
    }

    /// Nearest-neighbor upscaling by an integer factor.
    pub fn upscale(&self, factor: usize) -> Result<GrayImage> {
        if factor == 0 {
            return Err(Error::arg("upscale factor must be positive"));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let (h, w) = (self.height * factor, self.width * factor);
        let mut pixels = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                pixels.push(self.get(r / factor, c / factor));
            }
        }
        GrayImage::new(h, w, pixels)
    }

    /// Binary PGM with maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(
            self.pixels
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
        );
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<GrayImage> {
        let mut pos = 0usize;
        let magic = pgm_token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::Format("not a binary PGM (P5) image".into()));
        }
        let width = pgm_number(bytes, &mut pos)?;
        let height = pgm_number(bytes, &mut pos)?;
        let maxval = pgm_number(bytes, &mut pos)?;
        if !(1..=65535).contains(&maxval) {
            return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
        }
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Format("truncated PGM header".into()));
        }
        pos += 1;
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let raster = &bytes[pos..];
        if raster.len() < n * bpp {
            return Err(Error::Format(format!(
                "PGM raster has {} bytes, expected {}",
                raster.len(),
                n * bpp
            )));
        }
        let scale = maxval as f32;
        let pixels = if bpp == 1 {
            raster[..n].iter().map(|&b| f32::from(b) / scale).collect()
        } else {
            raster[..2 * n]
                .chunks_exact(2)
                .map(|c| f32::from(u16::from_be_bytes([c[0], c[1]])) / scale)
                .collect()
        };
        GrayImage::new(height, width, pixels).map_err(|e| Error::Format(e.to_string()))
    }

    /// 16-bit (or 8-bit) single-channel PNG, normalized by the bit depth's maximum.
    pub fn from_png(bytes: &[u8]) -> Result<GrayImage> {
        let (info, raw) = decode_png(bytes)?;
        if info.color_type != png::ColorType::Grayscale {
            return Err(Error::Format(format!(
                "expected single-channel PNG, got {:?}",
                info.color_type
            )));
        }
        let (h, w) = (info.height as usize, info.width as usize);
        let pixels = match info.bit_depth {
            png::BitDepth::Eight => raw.iter().map(|&b| f32::from(b) / 255.0).collect(),
            png::BitDepth::Sixteen => raw
                .chunks_exact(2)
                .map(|c| f32::from(u16::from_be_bytes([c[0], c[1]])) / 65535.0)
                .collect(),
            other => {
                return Err(Error::Format(format!(
                    "unsupported PNG bit depth {other:?}"
                )))
            }
        };
        GrayImage::new(h, w, pixels).map_err(|e| Error::Format(e.to_string()))
    }

    /// Decodes by signature: PNG or binary PGM.
    pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
        if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
            Self::from_png(bytes)
        } else {
            Self::from_pgm(bytes)
        }
    }
}

pub(crate) fn decode_png(bytes: &[u8]) -> Result<(png::OutputInfo, Vec<u8>)> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    buf.truncate(info.buffer_size());
    Ok((info, buf))
}

fn pgm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn pgm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let tok = pgm_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("malformed PGM header field".into()))
}
