use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{blur_faces_with, overlay_faces, BlurOptions, OverlayColor};
use crate::annotations::{AnnotationSet, ImageRecord};
use crate::error::{Error, Result};
use crate::raster::codec::{self, Format, DEFAULT_JPEG_QUALITY};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Blur(BlurOptions),
    Overlay { color: OverlayColor, enlarge: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetOptions {
    pub mode: Mode,
    /// Write every output as PNG regardless of the input format.
    pub force_png: bool,
    pub jpeg_quality: u8,
}

impl DatasetOptions {
    pub fn new(mode: Mode) -> Self {
        DatasetOptions {
            mode,
            force_png: false,
            jpeg_quality: DEFAULT_JPEG_QUALITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub image_id: String,
    pub reason: String,
}

/// Per-run totals. `processed + copied + skipped.len()` equals the record count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetReport {
    pub records: usize,
    /// Images with faces that were obfuscated and re-encoded.
    pub processed: usize,
    /// Images without faces passed through.
    pub copied: usize,
    pub skipped: Vec<Skipped>,
}

enum Outcome {
    Processed,
    Copied,
}

/// Obfuscates every record's image under `image_root` into `out_root`,
/// preserving relative paths.
///
/// Records are processed in parallel on the current rayon pool. Missing or
/// undecodable images are skipped and listed in the report, in `image_id`
/// order.
pub fn obfuscate_dataset(
    set: &AnnotationSet,
    image_root: &Path,
    out_root: &Path,
    opts: &DatasetOptions,
) -> DatasetReport {
    let outcomes: Vec<Result<Outcome>> = set
        .records()
        .par_iter()
        .map(|r| process_one(r, image_root, out_root, opts))
        .collect();

    let mut report = DatasetReport {
        records: set.len(),
        ..Default::default()
    };
    for (r, outcome) in set.records().iter().zip(outcomes) {
        match outcome {
            Ok(Outcome::Processed) => report.processed += 1,
            Ok(Outcome::Copied) => report.copied += 1,
            Err(e) => {
                log::warn!("skipping {}: {e}", r.image_id);
                report.skipped.push(Skipped {
                    image_id: r.image_id.clone(),
                    reason: e.to_string(),
                })
            }
        }
    }
    report
}

fn output_path(out_root: &Path, rel: &str, format: Format, force_png: bool) -> PathBuf {
    let path = out_root.join(rel);
    if force_png && format != Format::Png {
        path.with_extension(Format::Png.extension())
    } else {
        path
    }
}

fn process_one(
    r: &ImageRecord,
    image_root: &Path,
    out_root: &Path,
    opts: &DatasetOptions,
) -> Result<Outcome> {
    let src = image_root.join(r.file_path());
    let bytes = fs::read(&src).map_err(|e| Error::io(&src, e))?;
    let format = Format::sniff(&bytes)
        .ok_or_else(|| Error::Argument(format!("{}: not a PNG or JPEG file", src.display())))?;
    let dst = output_path(out_root, r.file_path(), format, opts.force_png);
    if let Some(parent) = dst.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }

    let out_format = if opts.force_png { Format::Png } else { format };
    if r.faces.is_empty() && out_format == format {
        fs::write(&dst, &bytes).map_err(|e| Error::io(&dst, e))?;
        return Ok(Outcome::Copied);
    }

    let (image, _) = codec::decode(&bytes, &src)?;
    if (image.width(), image.height()) != (r.width as usize, r.height as usize) {
        return Err(Error::Validation(format!(
            "{} is {}x{} but the annotation says {}x{}",
            src.display(),
            image.width(),
            image.height(),
            r.width,
            r.height
        )));
    }
    let result = match opts.mode {
        Mode::Blur(blur) => blur_faces_with(&image, &r.faces, &blur)?,
        Mode::Overlay { color, enlarge } => overlay_faces(&image, &r.faces, color, enlarge)?,
    };
    let encoded = codec::encode(&result, out_format, opts.jpeg_quality)?;
    fs::write(&dst, encoded).map_err(|e| Error::io(&dst, e))?;
    Ok(if r.faces.is_empty() {
        Outcome::Copied
    } else {
        Outcome::Processed
    })
}
