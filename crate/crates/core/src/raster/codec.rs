//! 8-bit PNG/JPEG decoding and encoding.
//!
//! Decoding maps a byte `b` to `b / 255`; encoding maps `v` to
//! `round(v · 255)` with halves rounded away from zero.

use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

use super::ImageBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Png,
    Jpeg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Png => "png",
            Format::Jpeg => "jpg",
        }
    }

    pub fn sniff(bytes: &[u8]) -> Option<Format> {
        match image::guess_format(bytes).ok()? {
            image::ImageFormat::Png => Some(Format::Png),
            image::ImageFormat::Jpeg => Some(Format::Jpeg),
            _ => None,
        }
    }
}

pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<ImageBuffer> {
    ImageBuffer::new(
        width,
        height,
        bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
}

pub fn to_rgb8(buf: &ImageBuffer) -> Vec<u8> {
    buf.data()
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Decodes PNG or JPEG bytes; `origin` is only used in error messages.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<(ImageBuffer, Format)> {
    let format = Format::sniff(bytes)
        .ok_or_else(|| Error::Argument(format!("{}: not a PNG or JPEG file", origin.display())))?;
    let img = image::load_from_memory(bytes).map_err(|source| Error::Image {
        path: origin.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok((from_rgb8(w as usize, h as usize, rgb.as_raw())?, format))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<(ImageBuffer, Format)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

pub fn encode(buf: &ImageBuffer, format: Format, jpeg_quality: u8) -> Result<Vec<u8>> {
    let rgb = to_rgb8(buf);
    let (w, h) = (buf.width() as u32, buf.height() as u32);
    let mut out = Cursor::new(Vec::new());
    let res = match format {
        Format::Png => PngEncoder::new(&mut out).write_image(&rgb, w, h, ExtendedColorType::Rgb8),
        Format::Jpeg => JpegEncoder::new_with_quality(&mut out, jpeg_quality).write_image(
            &rgb,
            w,
            h,
            ExtendedColorType::Rgb8,
        ),
    };
    res.map_err(|source| Error::Image {
        path: "<encoder>".into(),
        source,
    })?;
    Ok(out.into_inner())
}
