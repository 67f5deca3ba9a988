//! Face obfuscation: feathered Gaussian blurring and solid-color overlays.
//!
//! Blurring enlarges every face box by a tenth of its diagonal, rasterizes the
//! union into a mask, blurs both the mask and the image with
//! `σ = d_max / 10`, and composites the two images through the blurred mask so
//! there is no hard seam at the box edges.

mod dataset;

pub use dataset::{obfuscate_dataset, DatasetOptions, DatasetReport, Mode, Skipped};

use serde::{Deserialize, Serialize};

use crate::annotations::BBox;
use crate::error::{Error, Result};
use crate::raster::{composite, gaussian_blur, rasterize_mask, ImageBuffer};

/// Dataset-mean gray used for overlays.
pub const MEAN_COLOR: OverlayColor = OverlayColor {
    r: 0.485,
    g: 0.456,
    b: 0.406,
};
pub const RED: OverlayColor = OverlayColor::new_unchecked(1.0, 0.0, 0.0);
pub const GREEN: OverlayColor = OverlayColor::new_unchecked(0.0, 1.0, 0.0);
pub const BLUE: OverlayColor = OverlayColor::new_unchecked(0.0, 0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl OverlayColor {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self> {
        if [r, g, b].iter().all(|v| (0.0..=1.0).contains(v)) {
            Ok(OverlayColor { r, g, b })
        } else {
            Err(Error::Argument(format!(
                "overlay color ({r}, {g}, {b}) has components outside [0, 1]"
            )))
        }
    }

    const fn new_unchecked(r: f64, g: f64, b: f64) -> Self {
        OverlayColor { r, g, b }
    }

    /// `mean`, `red`, `green`, `blue`, or a comma-separated `r,g,b` triple.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "gray" | "grey" => Ok(MEAN_COLOR),
            "red" => Ok(RED),
            "green" => Ok(GREEN),
            "blue" => Ok(BLUE),
            other => {
                let parts: Vec<f64> = other
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Argument(format!("unrecognized color {s:?}")))?;
                match parts[..] {
                    [r, g, b] => OverlayColor::new(r, g, b),
                    _ => Err(Error::Argument(format!(
                        "color triple needs 3 components, got {s:?}"
                    ))),
                }
            }
        }
    }

    pub fn rgb(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

/// Which boxes define `d_max` for the blur strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalSource {
    #[default]
    Original,
    Enlarged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurOptions {
    pub diagonal_source: DiagonalSource,
    /// Gaussian σ as a multiple of the blur radius `d_max / 10`.
    pub sigma_per_radius: f64,
}

impl Default for BlurOptions {
    fn default() -> Self {
        BlurOptions {
            diagonal_source: DiagonalSource::Original,
            sigma_per_radius: 1.0,
        }
    }
}

/// Pads each side by a tenth of the box diagonal, then clamps to the frame.
pub fn enlarge_box(b: &BBox, height: usize, width: usize) -> BBox {
    let pad = b.diagonal() / 10.0;
    BBox::new(b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad).clamp(width as f64, height as f64)
}

/// The σ `blur_faces` would use, or `None` when there are no faces.
pub fn blur_sigma(faces: &[BBox], height: usize, width: usize, opts: &BlurOptions) -> Option<f64> {
    let d_max = match opts.diagonal_source {
        DiagonalSource::Original => faces.iter().map(BBox::diagonal).fold(None, max_opt),
        DiagonalSource::Enlarged => faces
            .iter()
            .map(|b| enlarge_box(b, height, width).diagonal())
            .fold(None, max_opt),
    }?;
    Some(d_max / 10.0 * opts.sigma_per_radius)
}

fn max_opt(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

pub fn blur_faces(image: &ImageBuffer, faces: &[BBox]) -> Result<ImageBuffer> {
    blur_faces_with(image, faces, &BlurOptions::default())
}

pub fn blur_faces_with(
    image: &ImageBuffer,
    faces: &[BBox],
    opts: &BlurOptions,
) -> Result<ImageBuffer> {
    let (h, w) = (image.height(), image.width());
    let Some(sigma) = blur_sigma(faces, h, w, opts) else {
        return Ok(image.clone());
    };
    let enlarged: Vec<BBox> = faces.iter().map(|b| enlarge_box(b, h, w)).collect();
    let mask = rasterize_mask(&enlarged, h, w)?;
    let mask_blurred = gaussian_blur(&mask, sigma)?;
    let image_blurred = gaussian_blur(image, sigma)?;
    composite(image, &image_blurred, &mask_blurred)
}

/// Paints every pixel whose center lies in the union of `faces` with `color`.
pub fn overlay_faces(
    image: &ImageBuffer,
    faces: &[BBox],
    color: OverlayColor,
    enlarge: bool,
) -> Result<ImageBuffer> {
    let (h, w) = (image.height(), image.width());
    let region: Vec<BBox> = if enlarge {
        faces.iter().map(|b| enlarge_box(b, h, w)).collect()
    } else {
        faces.to_vec()
    };
    let mask = rasterize_mask(&region, h, w)?;
    let mut out = image.clone();
    let rgb = color.rgb();
    for (i, m) in mask.data().iter().enumerate() {
        if *m == 1.0 {
            out.set_pixel(i / w, i % w, rgb);
        }
    }
    Ok(out)
}
