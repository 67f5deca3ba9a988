use std::collections::BTreeMap;

use anyhow::Result;
use obscura_core::annotations::{load_annotations, load_hierarchy};
use obscura_core::stats::{
    category_blurred_fraction, category_overlap, dataset_face_stats, BlurredRegion,
};
use obscura_core::{AnnotationSet, CategoryId, Hierarchy};
use serde_json::json;

use crate::args::{Region, ReportArgs, StatsCommand};
use crate::output::{emit, Writer};
use crate::{Ctx, Status};

pub fn run(cmd: StatsCommand, ctx: &Ctx) -> Result<Status> {
    match cmd {
        StatsCommand::Faces {
            annotations,
            hierarchy,
            report,
        } => {
            let set = load_annotations(&annotations)?.set;
            let hierarchy = match hierarchy {
                Some(path) => load_hierarchy(path)?,
                None => Hierarchy::default(),
            };
            faces(&set, &hierarchy, &report, &ctx.writer)
        }
        StatsCommand::Blurred {
            annotations,
            region,
            report,
        } => {
            let set = load_annotations(&annotations)?.set;
            let region = match region.or(ctx.config.region).unwrap_or(Region::Enlarged) {
                Region::Enlarged => BlurredRegion::Enlarged,
                Region::Raw => BlurredRegion::Raw,
            };
            let fractions = category_blurred_fraction(&set, region);
            per_category(&set, &fractions, "blurred_fraction", &report, &ctx.writer)
        }
        StatsCommand::Overlap {
            annotations,
            report,
        } => {
            let set = load_annotations(&annotations)?.set;
            let overlap = category_overlap(&set);
            per_category(&set, &overlap, "face_overlap", &report, &ctx.writer)
        }
    }
}

fn faces(
    set: &AnnotationSet,
    hierarchy: &Hierarchy,
    report: &ReportArgs,
    w: &Writer,
) -> Result<Status> {
    let stats = dataset_face_stats(set, hierarchy);
    let mut out = w.tagged(
        "summary",
        &json!({
            "images": stats.images,
            "images_with_faces": stats.images_with_faces,
            "fraction_with_faces": stats.fraction_with_faces,
        }),
    )?;
    for row in &stats.categories {
        out += &w.tagged("category", row)?;
    }
    for (faces, images) in &stats.histogram {
        out += &w.tagged("histogram", &json!({ "faces": faces, "images": images }))?;
    }
    for row in &stats.supercategories {
        out += &w.tagged("supercategory", row)?;
    }
    emit(report.out.as_deref(), &out)?;
    if let Some(plot) = &report.plot {
        let mut rows: Vec<_> = stats
            .categories
            .iter()
            .map(|r| (r.category, r.fraction))
            .collect();
        rows.sort_by_key(|r| r.0);
        let table = w.table(
            ("category", "fraction_with_faces"),
            rows.into_iter().map(|(c, f)| (c.to_string(), f)),
        );
        emit(Some(plot), &table)?;
    }
    Ok(Status::Success)
}

fn per_category(
    set: &AnnotationSet,
    values: &BTreeMap<CategoryId, f64>,
    field: &str,
    report: &ReportArgs,
    w: &Writer,
) -> Result<Status> {
    let mut out = String::new();
    for (c, v) in values {
        let mut row = serde_json::Map::new();
        row.insert("category".into(), json!(c));
        row.insert(
            "name".into(),
            json!(set.category_name(*c).unwrap_or_default()),
        );
        row.insert(field.into(), json!(v));
        out += &w.line(&row)?;
    }
    emit(report.out.as_deref(), &out)?;
    if let Some(plot) = &report.plot {
        let table = w.table(
            ("category", field),
            values.iter().map(|(c, v)| (c.to_string(), *v)),
        );
        emit(Some(plot), &table)?;
    }
    Ok(Status::Success)
}
