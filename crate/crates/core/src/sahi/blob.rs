use super::DetectorBackend;
use crate::error::Result;
use crate::geometry::{BBox2D, Detection};
use crate::image::GrayImage;

/// Connected bright regions as detections.
///
/// Pixels brighter than `intensity_threshold` are grouped into 4-connected
/// components; components of at least `min_pixels` pixels become class-0
/// detections with their tight pixel bounding box and the mean component
/// intensity as score. Output follows the row-major position of each
/// component's first pixel.
pub fn blob_detect(
    image: &GrayImage,
    intensity_threshold: f32,
    min_pixels: usize,
) -> Vec<Detection> {
    let (h, w) = (image.height(), image.width());
    let px = image.pixels();
    let mut seen = vec![false; h * w];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for start in 0..h * w {
        if seen[start] || px[start] <= intensity_threshold {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0, usize::MAX, 0);
        let mut count = 0usize;
        let mut sum = 0.0f64;
        while let Some(k) = stack.pop() {
            let (r, c) = (k / w, k % w);
            count += 1;
            sum += f64::from(px[k]);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            cmin = cmin.min(c);
            cmax = cmax.max(c);
            let mut visit = |n: usize| {
                if !seen[n] && px[n] > intensity_threshold {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if r > 0 {
                visit(k - w);
            }
            if r + 1 < h {
                visit(k + w);
            }
            if c > 0 {
                visit(k - 1);
            }
            if c + 1 < w {
                visit(k + 1);
            }
        }
        if count >= min_pixels.max(1) {
            out.push(Detection {
                bbox: BBox2D {
                    x1: cmin as f64,
                    y1: rmin as f64,
                    x2: (cmax + 1) as f64,
                    y2: (rmax + 1) as f64,
                },
                score: (sum / count as f64).clamp(0.0, 1.0),
                class_id: 0,
            });
        }
    }
    out
}

/// Built-in reference backend wrapping [`blob_detect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobDetector {
    pub intensity_threshold: f32,
    pub min_pixels: usize,
}

impl Default for BlobDetector {
    fn default() -> Self {
        Self {
            intensity_threshold: 0.5,
            min_pixels: 4,
        }
    }
}

impl DetectorBackend for BlobDetector {
    fn detect(&self, patch: &GrayImage) -> Result<Vec<Detection>> {
        Ok(blob_detect(
            patch,
            self.intensity_threshold,
            self.min_pixels,
        ))
    }

    fn concurrency_safe(&self) -> bool {
        true
    }
}
