//! Anti-aliased downsampling.
//!
//! Plain max-pooling, strided subsampling and average-pooling alias high
//! frequencies, so a one-pixel input shift can change the output a lot. The
//! anti-aliased variants low-pass the signal with a normalized binomial kernel
//! before subsampling:
//!
//! ```text
//! max-pool(stride s)   ->  dense max(stride 1)  ->  blur + subsample(s)
//! strided conv / avg   ->  blur + subsample(s)
//! ```
//!
//! Every operator samples output `o` at input index `o * stride` and produces
//! `ceil(dim / stride)` samples per axis.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense row-major 2D grid of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2D {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor2D {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::arg("tensor dimensions must be positive"));
        }
        if data.len() != height * width {
            return Err(Error::arg(format!(
                "tensor data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("tensor values must be finite"));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    /// A 1 x n tensor.
    pub fn row(values: &[f64]) -> Result<Self> {
        Self::new(1, values.len(), values.to_vec())
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..height * width)
            .map(|k| f(k / width, k % width))
            .collect();
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Circular shift: the value at (r, c) moves to (r + dy, c + dx).
    pub fn shift(&self, dy: isize, dx: isize) -> Tensor2D {
        let (h, w) = (self.height as isize, self.width as isize);
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..h {
            let sr = (r - dy).rem_euclid(h) as usize;
            for c in 0..w {
                let sc = (c - dx).rem_euclid(w) as usize;
                data.push(self.get(sr, sc));
            }
        }
        Tensor2D {
            height: self.height,
            width: self.width,
            data,
        }
    }
}

/// Normalized, symmetric low-pass taps.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    taps: Vec<f64>,
}

impl BlurKernel {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if !(2..=7).contains(&taps.len()) {
            return Err(Error::arg(format!(
                "kernel length must be in 2..=7, got {}",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::arg("kernel taps must be finite and non-negative"));
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("kernel taps must sum to 1, got {sum}")));
        }
        if taps.iter().zip(taps.iter().rev()).any(|(a, b)| a != b) {
            return Err(Error::arg("kernel taps must be symmetric"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Offset of tap 0 relative to the output sample; even kernels lean forward.
    fn origin(&self) -> isize {
        ((self.taps.len() - 1) / 2) as isize
    }
}

/// Normalized Pascal-triangle row of the given length.
pub fn binomial_kernel(size: usize) -> Result<BlurKernel> {
    if !(2..=7).contains(&size) {
        return Err(Error::arg(format!(
            "binomial kernel size must be in 2..=7, got {size}"
        )));
    }
    let mut row = vec![1.0f64];
    for _ in 1..size {
        let mut next = vec![1.0; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    let total: f64 = row.iter().sum();
    BlurKernel::new(row.into_iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaddingMode {
    /// Periodic boundary.
    Circular,
    /// Mirror without repeating the edge sample (`d c b | a b c d | c b a`).
    Reflect,
}

impl PaddingMode {
    pub fn name(self) -> &'static str {
        match self {
            PaddingMode::Circular => "circular",
            PaddingMode::Reflect => "reflect",
        }
    }

    #[inline]
    fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            PaddingMode::Circular => i.rem_euclid(n) as usize,
            PaddingMode::Reflect => {
                if n == 1 {
                    return 0;
                }
                let period = 2 * (n - 1);
                let m = i.rem_euclid(period);
                (if m < n { m } else { period - m }) as usize
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Max,
    Average,
    /// Pure subsampling; the window is ignored.
    Stride,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Max => "max",
            PoolKind::Average => "average",
            PoolKind::Stride => "stride",
        }
    }
}

fn check_stride(stride: usize) -> Result<()> {
    if stride < 2 {
        return Err(Error::arg(format!(
            "stride must be at least 2, got {stride}"
        )));
    }
    Ok(())
}

/// Filters may not be longer than a non-singleton axis. Singleton axes are
/// constant under both paddings, so 1 x n tensors behave as 1D signals.
fn check_extent(len: usize, x: &Tensor2D, what: &str) -> Result<()> {
    let too_long = |dim: usize| dim > 1 && len > dim;
    if too_long(x.height) || too_long(x.width) {
        return Err(Error::arg(format!(
            "{what} of length {len} exceeds the {}x{} input",
            x.height, x.width
        )));
    }
    Ok(())
}

/// Separable blur (rows then columns) followed by subsampling.
pub fn blur_downsample(
    x: &Tensor2D,
    k: &BlurKernel,
    stride: usize,
    pad: PaddingMode,
) -> Result<Tensor2D> {
    check_stride(stride)?;
    check_extent(k.len(), x, "kernel")?;
    let (h, w) = (x.height, x.width);
    let (oh, ow) = (h.div_ceil(stride), w.div_ceil(stride));
    let origin = k.origin();
    let taps = k.taps();

    // horizontal pass, evaluated only on the retained columns
    let mut tmp = vec![0.0; h * ow];
    for r in 0..h {
        for oc in 0..ow {
            let base = (oc * stride) as isize - origin;
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                acc += tap * x.get(r, pad.index(base + t as isize, w));
            }
            tmp[r * ow + oc] = acc;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for or in 0..oh {
        let base = (or * stride) as isize - origin;
        for oc in 0..ow {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                acc += tap * tmp[pad.index(base + t as isize, h) * ow + oc];
            }
            out[or * ow + oc] = acc;
        }
    }
    Ok(Tensor2D {
        height: oh,
        width: ow,
        data: out,
    })
}

/// Stride-1 max over the forward `window x window` neighborhood of every sample.
fn dense_max(x: &Tensor2D, window: usize, pad: PaddingMode) -> Tensor2D {
    let (h, w) = (x.height, x.width);
    let mut data = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let mut m = f64::NEG_INFINITY;
            for dr in 0..window {
                let rr = pad.index((r + dr) as isize, h);
                for dc in 0..window {
                    m = m.max(x.get(rr, pad.index((c + dc) as isize, w)));
                }
            }
            data.push(m);
        }
    }
    Tensor2D {
        height: h,
        width: w,
        data,
    }
}

/// Anti-aliased max-pooling: dense max, then blur and subsample.
pub fn max_blur_pool(
    x: &Tensor2D,
    window: usize,
    k: &BlurKernel,
    stride: usize,
    pad: PaddingMode,
) -> Result<Tensor2D> {
    check_stride(stride)?;
    if window < 2 {
        return Err(Error::arg(format!(
            "pool window must be at least 2, got {window}"
        )));
    }
    check_extent(window, x, "pool window")?;
    check_extent(k.len(), x, "kernel")?;
    blur_downsample(&dense_max(x, window, pad), k, stride, pad)
}

/// Un-antialiased baselines. Output `o` pools `[o * stride, o * stride + window)`.
pub fn naive_pool(
    x: &Tensor2D,
    kind: PoolKind,
    window: usize,
    stride: usize,
    pad: PaddingMode,
) -> Result<Tensor2D> {
    check_stride(stride)?;
    if kind != PoolKind::Stride {
        if window == 0 {
            return Err(Error::arg("pool window must be positive"));
        }
        check_extent(window, x, "pool window")?;
    }
    let (h, w) = (x.height, x.width);
    let (oh, ow) = (h.div_ceil(stride), w.div_ceil(stride));
    let mut data = Vec::with_capacity(oh * ow);
    for or in 0..oh {
        for oc in 0..ow {
            let (r0, c0) = (or * stride, oc * stride);
            let v = match kind {
                PoolKind::Stride => x.get(r0, c0),
                PoolKind::Max | PoolKind::Average => {
                    let mut m = f64::NEG_INFINITY;
                    let mut sum = 0.0;
                    for dr in 0..window {
                        let rr = pad.index((r0 + dr) as isize, h);
                        for dc in 0..window {
                            let v = x.get(rr, pad.index((c0 + dc) as isize, w));
                            m = m.max(v);
                            sum += v;
                        }
                    }
                    if kind == PoolKind::Max {
                        m
                    } else {
                        sum / (window * window) as f64
                    }
                }
            };
            data.push(v);
        }
    }
    Ok(Tensor2D {
        height: oh,
        width: ow,
        data,
    })
}

/// A configured downsampling operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Downsampler {
    Identity,
    Blur {
        kernel: BlurKernel,
        stride: usize,
        pad: PaddingMode,
    },
    MaxBlur {
        window: usize,
        kernel: BlurKernel,
        stride: usize,
        pad: PaddingMode,
    },
    Naive {
        kind: PoolKind,
        window: usize,
        stride: usize,
        pad: PaddingMode,
    },
}

impl Downsampler {
    pub fn apply(&self, x: &Tensor2D) -> Result<Tensor2D> {
        match self {
            Downsampler::Identity => Ok(x.clone()),
            Downsampler::Blur {
                kernel,
                stride,
                pad,
            } => blur_downsample(x, kernel, *stride, *pad),
            Downsampler::MaxBlur {
                window,
                kernel,
                stride,
                pad,
            } => max_blur_pool(x, *window, kernel, *stride, *pad),
            Downsampler::Naive {
                kind,
                window,
                stride,
                pad,
            } => naive_pool(x, *kind, *window, *stride, *pad),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Downsampler::Identity => "identity".into(),
            Downsampler::Blur { kernel, .. } => format!("blur_downsample(k{})", kernel.len()),
            Downsampler::MaxBlur { window, kernel, .. } => {
                format!("max_blur_pool(w{window},k{})", kernel.len())
            }
            Downsampler::Naive { kind, window, .. } => match kind {
                PoolKind::Stride => "naive_stride".into(),
                _ => format!("naive_{}(w{window})", kind.name()),
            },
        }
    }

    pub fn padding(&self) -> Option<PaddingMode> {
        match self {
            Downsampler::Identity => None,
            Downsampler::Blur { pad, .. }
            | Downsampler::MaxBlur { pad, .. }
            | Downsampler::Naive { pad, .. } => Some(*pad),
        }
    }
}

/// Cosine similarity between `op(shift(x))` and the best circular alignment
/// of `op(x)`. The input is shifted by `shift_px` along both axes.
pub fn shift_consistency<F>(x: &Tensor2D, op: F, shift_px: usize) -> Result<f64>
where
    F: Fn(&Tensor2D) -> Result<Tensor2D>,
{
    if shift_px == 0 {
        return Err(Error::arg("shift must be at least 1 pixel"));
    }
    let s = shift_px as isize;
    let base = op(x)?;
    let moved = op(&x.shift(s, s))?;
    if base.height != moved.height || base.width != moved.width {
        return Err(Error::arg("operator output shape depends on input shift"));
    }
    let norm_base = base.data.iter().map(|v| v * v).sum::<f64>();
    let norm_moved = moved.data.iter().map(|v| v * v).sum::<f64>();
    match (norm_base == 0.0, norm_moved == 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let denom = (norm_base * norm_moved).sqrt();
    let (h, w) = (base.height, base.width);
    let mut best = f64::NEG_INFINITY;
    for dy in 0..h {
        for dx in 0..w {
            let mut dot = 0.0;
            for r in 0..h {
                let br = (r + h - dy) % h;
                for c in 0..w {
                    dot += moved.get(r, c) * base.get(br, (c + w - dx) % w);
                }
            }
            best = best.max(dot);
        }
    }
    Ok((best / denom).clamp(0.0, 1.0))
}

/// Fixed-seed evaluation corpus: checkerboards with random cell size and
/// phase, followed by uniform noise images.
#[derive(Debug, Clone)]
pub struct ConsistencyCorpus {
    pub images: Vec<Tensor2D>,
    /// Number of leading images that are pure checkerboards.
    pub checkerboards: usize,
}

impl ConsistencyCorpus {
    pub const SIDE: usize = 32;

    pub fn generate(seed: u64, count: usize) -> ConsistencyCorpus {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = Self::SIDE;
        let checkerboards = count / 2;
        let mut images = Vec::with_capacity(count);
        for _ in 0..checkerboards {
            let cell = rng.random_range(2..=4usize);
            let (pr, pc) = (rng.random_range(0..cell), rng.random_range(0..cell));
            let img = Tensor2D::from_fn(n, n, |r, c| {
                (((r + pr) / cell + (c + pc) / cell) % 2) as f64
            })
            .expect("checkerboard dims are positive");
            images.push(img);
        }
        for _ in checkerboards..count {
            let data = (0..n * n).map(|_| rng.random::<f64>()).collect();
            images.push(Tensor2D::new(n, n, data).expect("noise dims are positive"));
        }
        ConsistencyCorpus {
            images,
            checkerboards,
        }
    }

    /// Per-image consistency scores, in corpus order.
    pub fn scores(&self, op: &Downsampler, shift_px: usize) -> Result<Vec<f64>> {
        self.images
            .par_iter()
            .map(|img| shift_consistency(img, |t| op.apply(t), shift_px))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub op: String,
    pub padding: &'static str,
    pub shift: usize,
    pub mean: f64,
    pub min: f64,
}

/// The operator set compared by the consistency benchmark (stride 2).
pub fn bench_operators() -> Vec<Downsampler> {
    let k3 = binomial_kernel(3).expect("valid size");
    let mut ops = Vec::new();
    for pad in [PaddingMode::Circular, PaddingMode::Reflect] {
        ops.push(Downsampler::Naive {
            kind: PoolKind::Max,
            window: 2,
            stride: 2,
            pad,
        });
        ops.push(Downsampler::MaxBlur {
            window: 2,
            kernel: k3.clone(),
            stride: 2,
            pad,
        });
        ops.push(Downsampler::Naive {
            kind: PoolKind::Average,
            window: 2,
            stride: 2,
            pad,
        });
        ops.push(Downsampler::Naive {
            kind: PoolKind::Stride,
            window: 1,
            stride: 2,
            pad,
        });
        ops.push(Downsampler::Blur {
            kernel: k3.clone(),
            stride: 2,
            pad,
        });
    }
    ops
}

/// Mean/min consistency of every benchmark operator at a one-pixel shift and
/// at a stride-sized shift.
pub fn consistency_bench(seed: u64, corpus_size: usize) -> Result<Vec<BenchRow>> {
    let corpus = ConsistencyCorpus::generate(seed, corpus_size);
    let mut rows = Vec::new();
    for shift in [1usize, 2] {
        for op in bench_operators() {
            let scores = corpus.scores(&op, shift)?;
            let (mean, min) = if scores.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (
                    scores.iter().sum::<f64>() / scores.len() as f64,
                    scores.iter().copied().fold(f64::INFINITY, f64::min),
                )
            };
            rows.push(BenchRow {
                op: op.name(),
                padding: op.padding().map_or("-", PaddingMode::name),
                shift,
                mean,
                min,
            });
        }
    }
    Ok(rows)
}

pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<24} {:<9} {:>5} {:>10} {:>10}\n",
        "op", "padding", "shift", "mean", "min"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<24} {:<9} {:>5} {:>10.6} {:>10.6}\n",
            r.op, r.padding, r.shift, r.mean, r.min
        ));
    }
    out
}
