//! Seeded small-object corpus: bright axis-aligned squares on a black
//! background, with exact ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::KittiLabel;
use crate::error::{Error, Result};
use crate::geometry::{BBox2D, Dims3, Point3};
use crate::image::GrayImage;

pub const SQUARE_KIND: &str = "Square";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub height: usize,
    pub width: usize,
    pub squares: usize,
    pub square_size: usize,
    /// Minimum number of background pixels between two squares.
    pub gap: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            height: 1024,
            width: 1024,
            squares: 5,
            square_size: 8,
            gap: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    pub image: GrayImage,
    /// Pixel extent of each square: `(col, row, col + size, row + size)`.
    pub boxes: Vec<BBox2D>,
}

impl SyntheticImage {
    pub fn labels(&self) -> Vec<KittiLabel> {
        self.boxes
            .iter()
            .map(|b| KittiLabel {
                kind: SQUARE_KIND.to_string(),
                truncated: 0.0,
                occluded: 0,
                alpha: -10.0,
                bbox: *b,
                dims: Dims3::new(-1.0, -1.0, -1.0),
                location: Point3::new(-1000.0, -1000.0, -1000.0),
                rotation_y: -10.0,
                score: None,
            })
            .collect()
    }
}

/// `count` images from one ChaCha8 stream, so image `k` depends on the seed
/// and on `k` only through the draws before it.
pub fn generate_corpus(
    seed: u64,
    count: usize,
    cfg: &SyntheticConfig,
) -> Result<Vec<SyntheticImage>> {
    let s = cfg.square_size;
    if s == 0 || s > cfg.height || s > cfg.width {
        return Err(Error::arg(format!(
            "square size {s} does not fit a {}x{} image",
            cfg.height, cfg.width
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut image = GrayImage::zeros(cfg.height, cfg.width)?;
        let mut placed: Vec<(usize, usize)> = Vec::with_capacity(cfg.squares);
        let mut attempts = 0usize;
        while placed.len() < cfg.squares {
            attempts += 1;
            if attempts > 10_000 * cfg.squares.max(1) {
                return Err(Error::arg(format!(
                    "cannot place {} squares of size {s} with gap {} in {}x{}",
                    cfg.squares, cfg.gap, cfg.height, cfg.width
                )));
            }
            let r = rng.random_range(0..=cfg.height - s);
            let c = rng.random_range(0..=cfg.width - s);
            let reach = s + cfg.gap;
            if placed
                .iter()
                .any(|&(pr, pc)| r.abs_diff(pr) < reach && c.abs_diff(pc) < reach)
            {
                continue;
            }
            placed.push((r, c));
        }
        let mut boxes = Vec::with_capacity(placed.len());
        for (r, c) in placed {
            for i in r..r + s {
                for j in c..c + s {
                    image.set(i, j, 1.0);
                }
            }
            boxes.push(BBox2D::new(
                c as f64,
                r as f64,
                (c + s) as f64,
                (r + s) as f64,
            )?);
        }
        out.push(SyntheticImage { image, boxes });
    }
    Ok(out)
}
