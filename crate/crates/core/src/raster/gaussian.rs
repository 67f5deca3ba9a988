use rayon::prelude::*;

use super::Buffer;
use crate::error::{Error, Result};

/// Sampled, truncated and renormalized 1-D Gaussian.
///
/// Only the non-negative half is stored: `weights[0]` is the center tap and
/// `weights[k]` applies to offsets `±k`, for `k ≤ radius = ceil(3σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Argument(format!(
                "gaussian sigma must be positive and finite, got {sigma}"
            )));
        }
        let radius = (3.0 * sigma).ceil() as usize;
        let denom = 2.0 * sigma * sigma;
        let raw: Vec<f64> = (0..=radius)
            .map(|k| (-((k * k) as f64) / denom).exp())
            .collect();
        let total = raw[0] + 2.0 * raw[1..].iter().sum::<f64>();
        Ok(GaussianKernel {
            sigma,
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.weights.len() - 1
    }

    /// Weight for a signed offset; zero outside the support.
    pub fn weight(&self, offset: isize) -> f64 {
        self.weights
            .get(offset.unsigned_abs())
            .copied()
            .unwrap_or(0.0)
    }

    pub fn half(&self) -> &[f64] {
        &self.weights
    }

    /// Full symmetric tap list, offsets `-radius..=radius`.
    pub fn taps(&self) -> Vec<f64> {
        let r = self.radius() as isize;
        (-r..=r).map(|k| self.weight(k)).collect()
    }
}

/// Separable Gaussian blur with replicated borders, applied per channel.
///
/// Symmetric taps are summed pairwise (`w_k · (left + right)`), which makes the
/// result bitwise invariant under mirroring the input. Output values are
/// finally clamped into the input's per-channel range, which the convex
/// kernel guarantees up to rounding.
pub fn gaussian_blur<const C: usize>(buf: &Buffer<C>, sigma: f64) -> Result<Buffer<C>> {
    let kernel = GaussianKernel::new(sigma)?;
    let (w, h) = (buf.width(), buf.height());
    let r = kernel.radius();
    let taps = kernel.half();
    let stride = w * C;

    let mut horiz = vec![0.0; buf.data().len()];
    horiz
        .par_chunks_mut(stride)
        .zip(buf.data().par_chunks(stride))
        .for_each_init(
            || Vec::with_capacity((w + 2 * r) * C),
            |padded, (out, src)| {
                padded.clear();
                for _ in 0..r {
                    padded.extend_from_slice(&src[..C]);
                }
                padded.extend_from_slice(src);
                for _ in 0..r {
                    padded.extend_from_slice(&src[stride - C..]);
                }
                for (j, px) in out.chunks_exact_mut(C).enumerate() {
                    let center = (j + r) * C;
                    for (c, v) in px.iter_mut().enumerate() {
                        let mut acc = taps[0] * padded[center + c];
                        for (k, tap) in taps.iter().enumerate().skip(1) {
                            acc += tap * (padded[center + c - k * C] + padded[center + c + k * C]);
                        }
                        *v = acc;
                    }
                }
            },
        );

    let range = buf.channel_range();
    let mut out = vec![0.0; buf.data().len()];
    out.par_chunks_mut(stride)
        .enumerate()
        .for_each(|(i, out_row)| {
            let row = |idx: isize| {
                let idx = idx.clamp(0, h as isize - 1) as usize;
                &horiz[idx * stride..(idx + 1) * stride]
            };
            let center = row(i as isize);
            for (o, v) in out_row.iter_mut().zip(center) {
                *o = taps[0] * v;
            }
            for (k, tap) in taps.iter().enumerate().skip(1) {
                let up = row(i as isize - k as isize);
                let down = row(i as isize + k as isize);
                for ((o, a), b) in out_row.iter_mut().zip(up).zip(down) {
                    *o += tap * (a + b);
                }
            }
            for px in out_row.chunks_exact_mut(C) {
                for (v, (lo, hi)) in px.iter_mut().zip(range) {
                    *v = v.clamp(lo, hi);
                }
            }
        });

    Ok(Buffer::from_parts(w, h, out))
}
