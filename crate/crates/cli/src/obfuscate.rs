use anyhow::{bail, Context, Result};
use obscura_core::annotations::load_annotations;
use obscura_core::obfuscate::{
    obfuscate_dataset, BlurOptions, DatasetOptions, DatasetReport, DiagonalSource, Mode,
    OverlayColor,
};
use obscura_core::raster::codec::DEFAULT_JPEG_QUALITY;
use serde::Serialize;

use crate::args::{BlurArgs, DatasetArgs, OverlayArgs, SigmaFrom};
use crate::config::switch;
use crate::output::emit;
use crate::{Ctx, Status};

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    dropped_boxes: usize,
    #[serde(flatten)]
    dataset: DatasetReport,
}

pub fn blur(a: BlurArgs, ctx: &Ctx) -> Result<Status> {
    let cfg = &ctx.config;
    let diagonal_source = match a
        .sigma_from
        .or(cfg.sigma_from)
        .unwrap_or(SigmaFrom::Original)
    {
        SigmaFrom::Original => DiagonalSource::Original,
        SigmaFrom::Enlarged => DiagonalSource::Enlarged,
    };
    let sigma_per_radius = a.sigma_scale.or(cfg.sigma_scale).unwrap_or(1.0);
    if !(sigma_per_radius.is_finite() && sigma_per_radius > 0.0) {
        bail!("--sigma-scale must be positive, got {sigma_per_radius}");
    }
    let opts = BlurOptions {
        diagonal_source,
        sigma_per_radius,
    };
    run_dataset("blur", a.dataset, Mode::Blur(opts), ctx)
}

pub fn overlay(a: OverlayArgs, ctx: &Ctx) -> Result<Status> {
    let cfg = &ctx.config;
    let name = a
        .color
        .as_deref()
        .or(cfg.color.as_deref())
        .unwrap_or("mean");
    let color = OverlayColor::parse(name)?;
    let enlarge = switch(a.enlarge, cfg.enlarge);
    run_dataset("overlay", a.dataset, Mode::Overlay { color, enlarge }, ctx)
}

fn run_dataset(command: &str, a: DatasetArgs, mode: Mode, ctx: &Ctx) -> Result<Status> {
    let loaded = load_annotations(&a.annotations)?;
    if loaded.dropped_boxes > 0 {
        log::warn!(
            "dropped {} degenerate boxes while loading",
            loaded.dropped_boxes
        );
    }
    let mut opts = DatasetOptions::new(mode);
    opts.force_png = switch(a.png, ctx.config.png);
    opts.jpeg_quality = a
        .jpeg_quality
        .or(ctx.config.jpeg_quality)
        .unwrap_or(DEFAULT_JPEG_QUALITY);
    if !(1..=100).contains(&opts.jpeg_quality) {
        bail!(
            "JPEG quality must lie in 1..=100, got {}",
            opts.jpeg_quality
        );
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let dataset = obfuscate_dataset(&loaded.set, &a.images, &a.out, &opts);
    log::info!(
        "{command}: {} processed, {} copied, {} skipped",
        dataset.processed,
        dataset.copied,
        dataset.skipped.len()
    );
    let partial = !dataset.skipped.is_empty();
    let report = RunReport {
        command,
        dropped_boxes: loaded.dropped_boxes,
        dataset,
    };
    emit(a.report.as_deref(), &ctx.writer.line(&report)?)?;
    Ok(if partial {
        Status::Partial
    } else {
        Status::Success
    })
}
