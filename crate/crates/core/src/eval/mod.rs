//! Classifier evaluation: top-k accuracy, average precision, Pearson
//! correlation with p-values, binned drop curves and multi-run aggregation.

mod accuracy;
mod correlation;
pub mod special;

use std::collections::BTreeMap;

use serde::Serialize;

pub use accuracy::{
    average_precision, delta_report, per_category_accuracy, top_k_accuracy, AccuracyReport,
    CategoryAccuracy, CategoryDelta, DeltaReport,
};
pub use correlation::{aggregate_runs, pearson, CorrelationResult, RunSummary};

use crate::annotations::CategoryId;
use crate::error::{Error, Result};

/// Default drop-curve edges, in percent of image area.
pub const DEFAULT_BIN_EDGES_PERCENT: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropBin {
    pub lower: f64,
    /// `None` for the last, unbounded bin.
    pub upper: Option<f64>,
    pub categories: usize,
    pub mean_drop: f64,
}

/// Groups categories into `[e_i, e_{i+1})` bins by `fractions` (plus a final
/// `[e_last, ∞)` bin) and averages their `drops`. Empty bins are omitted.
pub fn bin_drop_curve(
    fractions: &BTreeMap<CategoryId, f64>,
    drops: &BTreeMap<CategoryId, f64>,
    edges: &[f64],
) -> Result<Vec<DropBin>> {
    if !fractions.keys().eq(drops.keys()) {
        return Err(Error::Validation(
            "fraction and drop tables cover different categories".into(),
        ));
    }
    if edges.is_empty()
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Argument(format!(
            "bin edges must be non-empty and strictly ascending, got {edges:?}"
        )));
    }
    let mut sums = vec![(0.0, 0usize); edges.len()];
    for (c, f) in fractions {
        let bin = edges.partition_point(|e| e <= f);
        if bin == 0 {
            return Err(Error::Argument(format!(
                "category {c} has value {f} below the first bin edge {}",
                edges[0]
            )));
        }
        let slot = &mut sums[bin - 1];
        slot.0 += drops[c];
        slot.1 += 1;
    }
    Ok(sums
        .iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(i, &(sum, n))| DropBin {
            lower: edges[i],
            upper: edges.get(i + 1).copied(),
            categories: n,
            mean_drop: sum / n as f64,
        })
        .collect())
}
