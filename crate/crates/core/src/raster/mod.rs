//! Pixel buffers and the numeric kernels behind obfuscation: separable
//! Gaussian convolution, box-mask rasterization and convex compositing.

pub mod codec;
mod gaussian;

pub use gaussian::{gaussian_blur, GaussianKernel};

use crate::annotations::BBox;
use crate::error::{Error, Result};

/// `height × width × C` raster of values in `[0, 1]`, row-major and
/// channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer<const C: usize> {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// RGB image.
pub type ImageBuffer = Buffer<3>;
/// Single-channel mask.
pub type MaskBuffer = Buffer<1>;

impl<const C: usize> Buffer<C> {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "buffer dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height * C {
            return Err(Error::Argument(format!(
                "expected {} values for a {width}x{height}x{C} buffer, got {}",
                width * height * C,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Argument(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Buffer {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: [f64; C]) -> Result<Self> {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * C)
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape<const D: usize>(&self, other: &Buffer<D>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; C] {
        let i = (row * self.width + col) * C;
        let mut px = [0.0; C];
        px.copy_from_slice(&self.data[i..i + C]);
        px
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, value: [f64; C]) {
        let i = (row * self.width + col) * C;
        self.data[i..i + C].copy_from_slice(&value);
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width * C) {
            for px in row.chunks_exact(C).rev() {
                data.extend_from_slice(px);
            }
        }
        Buffer {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Per-channel (min, max) over the whole buffer.
    pub fn channel_range(&self) -> [(f64, f64); C] {
        let mut range = [(f64::INFINITY, f64::NEG_INFINITY); C];
        for px in self.data.chunks_exact(C) {
            for (r, v) in range.iter_mut().zip(px) {
                r.0 = r.0.min(*v);
                r.1 = r.1.max(*v);
            }
        }
        range
    }

    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * C);
        Buffer {
            width,
            height,
            data,
        }
    }
}

/// Half-open column (or row) index range whose pixel centers fall in `[lo, hi)`.
fn center_span(lo: f64, hi: f64, len: usize) -> std::ops::Range<usize> {
    let inside = |j: usize| {
        let c = j as f64 + 0.5;
        c >= lo && c < hi
    };
    let guess = (lo - 0.5).ceil().max(0.0).min(len as f64) as usize;
    let mut start = guess.saturating_sub(1);
    while start < len && !inside(start) {
        start += 1;
        if start > guess + 1 {
            return 0..0;
        }
    }
    let mut end = start;
    while end < len && inside(end) {
        end += 1;
    }
    start..end
}

/// Mask with 1 at every pixel whose center lies in the union of `boxes`.
pub fn rasterize_mask(boxes: &[BBox], height: usize, width: usize) -> Result<MaskBuffer> {
    let mut mask = MaskBuffer::filled(width, height, [0.0])?;
    for b in boxes {
        let cols = center_span(b.x0, b.x1, width);
        if cols.is_empty() {
            continue;
        }
        for row in center_span(b.y0, b.y1, height) {
            mask.data[row * width + cols.start..row * width + cols.end].fill(1.0);
        }
    }
    Ok(mask)
}

/// `mask · blurred + (1 − mask) · image`, per pixel and channel.
///
/// Each output value is clamped to the interval spanned by its two inputs.
pub fn composite(
    image: &ImageBuffer,
    blurred: &ImageBuffer,
    mask: &MaskBuffer,
) -> Result<ImageBuffer> {
    if !image.same_shape(blurred) || !image.same_shape(mask) {
        return Err(Error::Argument(format!(
            "composite needs matching shapes, got image {}x{}, blurred {}x{}, mask {}x{}",
            image.width, image.height, blurred.width, blurred.height, mask.width, mask.height
        )));
    }
    let data = image
        .data
        .chunks_exact(3)
        .zip(blurred.data.chunks_exact(3))
        .zip(&mask.data)
        .flat_map(|((px, bl), &m)| {
            let mut out = [0.0; 3];
            for c in 0..3 {
                let (a, b) = (px[c], bl[c]);
                let v = m * b + (1.0 - m) * a;
                out[c] = v.clamp(a.min(b), a.max(b));
            }
            out
        })
        .collect();
    Ok(ImageBuffer::from_parts(image.width, image.height, data))
}
