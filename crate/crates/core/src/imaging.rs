//! Square images with samples in `[0, 1]`, binary PGM/PPM I/O, noise and
//! quality metrics.

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::C64;

/// An `n × n` image with one (gray) or three (RGB) channels.
///
/// Samples are nominally in `[0, 1]`; solvers may push them outside and
/// [`write_image`] clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    channels: Vec<DMatrix<f64>>,
}

impl ImagePlane {
    pub fn new(channels: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::InvalidConfig("image needs at least one channel".into()));
        };
        let n = first.nrows();
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::InvalidConfig(format!("expected 1 or 3 channels, got {}", channels.len())));
        }
        for c in &channels {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::InvalidConfig(format!("image must be square, got {}x{}", c.ncols(), c.nrows())));
            }
        }
        Ok(Self { channels })
    }

    pub fn gray(data: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![data])
    }

    pub fn n(&self) -> usize {
        self.channels[0].nrows()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[DMatrix<f64>] {
        &self.channels
    }

    pub fn channel(&self, k: usize) -> &DMatrix<f64> {
        &self.channels[k]
    }

    /// Applies `f` to each channel independently.
    pub fn map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    {
        Self::new(self.channels.iter().map(&mut f).collect::<Result<Vec<_>>>()?)
    }

    pub fn clamped(&self) -> Self {
        Self { channels: self.channels.iter().map(|c| c.map(|v| v.clamp(0.0, 1.0))).collect() }
    }

    /// Affinely maps each channel onto `[0, 1]`; constant channels are
    /// clamped instead.
    pub fn renormalized(&self) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let (lo, hi) = (c.min(), c.max());
                if hi > lo {
                    c.map(|v| (v - lo) / (hi - lo))
                } else {
                    c.map(|v| v.clamp(0.0, 1.0))
                }
            })
            .collect();
        Self { channels }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() || self.channel_count() != other.channel_count() {
            return Err(Error::InvalidConfig(format!(
                "image shape mismatch: {}x{}x{} vs {}x{}x{}",
                self.n(),
                self.n(),
                self.channel_count(),
                other.n(),
                other.n(),
                other.channel_count()
            )));
        }
        Ok(())
    }
}

/// Column-major `vec` of a real image channel.
pub fn channel_to_vec(x: &DMatrix<f64>) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Inverse of [`channel_to_vec`]; keeps the real part.
pub fn vec_to_channel(n: usize, v: &[C64]) -> Result<DMatrix<f64>> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: v.len() });
    }
    Ok(DMatrix::from_iterator(n, n, v.iter().map(|c| c.re)))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Image { offset: self.pos, message: message.into() }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image { offset: start, message: format!("{what} out of range") })
    }
}

/// Parses a binary PGM (P5) or PPM (P6) image with maxval 255.
pub fn decode_image(bytes: &[u8]) -> Result<ImagePlane> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(cur.err("missing P5/P6 magic"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        _ => return Err(cur.err("unsupported magic (only binary P5 and P6)")),
    };
    cur.pos = 2;
    let width_at = cur.pos;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Image { offset: maxval_at, message: format!("unsupported maxval {maxval}") });
    }
    if width != height {
        return Err(Error::Image { offset: width_at, message: format!("image must be square, got {width}x{height}") });
    }
    if width == 0 {
        return Err(Error::Image { offset: width_at, message: "empty image".into() });
    }
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(cur.err("expected a single whitespace byte after maxval"));
    }
    cur.pos += 1;
    let n = width;
    let need = n * n * channels;
    let have = bytes.len() - cur.pos;
    if have < need {
        return Err(Error::Image {
            offset: bytes.len(),
            message: format!("truncated pixel data: missing {} bytes", need - have),
        });
    }
    let data = &bytes[cur.pos..cur.pos + need];
    let planes =
        (0..channels).map(|k| DMatrix::from_fn(n, n, |i, j| data[(i * n + j) * channels + k] as f64 / 255.0)).collect();
    ImagePlane::new(planes)
}

/// Encodes as P5 (one channel) or P6 (three), clamping samples to `[0, 1]`.
pub fn encode_image(plane: &ImagePlane) -> Vec<u8> {
    let n = plane.n();
    let ch = plane.channel_count();
    let magic = if ch == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{n} {n}\n255\n").into_bytes();
    out.reserve(n * n * ch);
    for i in 0..n {
        for j in 0..n {
            for c in plane.channels() {
                out.push((c[(i, j)].clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImagePlane> {
    decode_image(&std::fs::read(path)?)
}

pub fn write_image(plane: &ImagePlane, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_image(plane))?;
    Ok(())
}

/// `10 log10(1 / MSE)` with peak value 1. Identical images give `f64::INFINITY`.
pub fn psnr(x: &ImagePlane, y: &ImagePlane) -> Result<f64> {
    x.same_shape(y)?;
    let count = (x.n() * x.n() * x.channel_count()) as f64;
    let sse: f64 = x.channels().iter().zip(y.channels()).map(|(a, b)| (a - b).norm_squared()).sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (count / sse).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;

fn gaussian_window() -> Vec<f64> {
    let h = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let t = i as f64 - h;
            (-t * t / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering with the normalized Gaussian window.
fn filter_valid(x: &DMatrix<f64>, g: &[f64]) -> DMatrix<f64> {
    let n = x.nrows();
    let w = g.len();
    let m = n + 1 - w;
    let rows = DMatrix::<f64>::from_fn(m, n, |i, j| (0..w).map(|k| g[k] * x[(i + k, j)]).sum::<f64>());
    DMatrix::from_fn(m, m, |i, j| (0..w).map(|k| g[k] * rows[(i, j + k)]).sum::<f64>())
}

fn ssim_channel(x: &DMatrix<f64>, y: &DMatrix<f64>, g: &[f64]) -> f64 {
    let mx = filter_valid(x, g);
    let my = filter_valid(y, g);
    let sxx = filter_valid(&x.component_mul(x), g);
    let syy = filter_valid(&y.component_mul(y), g);
    let sxy = filter_valid(&x.component_mul(y), g);
    let count = mx.len() as f64;
    let mut total = 0.0;
    for k in 0..mx.len() {
        let (ux, uy) = (mx[k], my[k]);
        let vx = sxx[k] - ux * ux;
        let vy = syy[k] - uy * uy;
        let cxy = sxy[k] - ux * uy;
        let num = (2.0 * ux * uy + SSIM_C1) * (2.0 * cxy + SSIM_C2);
        let den = (ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2);
        total += num / den;
    }
    total / count
}

/// Mean local SSIM over channels: 11×11 Gaussian window (σ = 1.5),
/// `C1 = 0.01²`, `C2 = 0.03²`, dynamic range 1.
pub fn ssim(x: &ImagePlane, y: &ImagePlane) -> Result<f64> {
    x.same_shape(y)?;
    if x.n() < SSIM_WINDOW {
        return Err(Error::InvalidConfig(format!("ssim needs n >= {SSIM_WINDOW}, got {}", x.n())));
    }
    let g = gaussian_window();
    let sum: f64 = x.channels().iter().zip(y.channels()).map(|(a, b)| ssim_channel(a, b, &g)).sum();
    Ok(sum / x.channel_count() as f64)
}

/// `plane + sigma · N(0, 1)` sample-wise, deterministic per seed.
pub fn add_noise(plane: &ImagePlane, sigma: f64, seed: u64) -> ImagePlane {
    if sigma == 0.0 {
        return plane.clone();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let channels = plane
        .channels()
        .iter()
        .map(|c| {
            let mut out = c.clone();
            for v in out.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * z;
            }
            out
        })
        .collect();
    ImagePlane { channels }
}

/// Synthetic test scene spanning `[0, 1]`: a soft background gradient, a
/// bright disk, a black rectangle and a coarse bar pattern. `color` gives the
/// three channels different gradients.
pub fn phantom(n: usize, color: bool) -> ImagePlane {
    let nf = n.max(1) as f64;
    let bar = (n / 8).max(1);
    let base = |i: usize, j: usize, shift: f64| {
        let (y, x) = (i as f64 / nf, j as f64 / nf);
        let mut v = 0.15 + 0.3 * (x + shift).fract() * (1.0 - 0.5 * y);
        let (dy, dx) = (y - 0.35, x - 0.62);
        if dx * dx + dy * dy < 0.045 {
            v = 1.0;
        }
        if (0.6..0.85).contains(&y) && (0.15..0.45).contains(&x) {
            v = 0.0;
        }
        if (0.62..0.9).contains(&y) && (0.6..0.9).contains(&x) && (j / bar).is_multiple_of(2) {
            v = 0.7;
        }
        v
    };
    let shifts: &[f64] = if color { &[0.0, 0.3, 0.6] } else { &[0.0] };
    ImagePlane { channels: shifts.iter().map(|&s| DMatrix::from_fn(n, n, |i, j| base(i, j, s))).collect() }
}
