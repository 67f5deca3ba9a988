use std::collections::BTreeMap;

use serde::Serialize;

use super::correlation::aggregate_runs;
use crate::annotations::{CategoryId, PredictionRecord, PredictionSet};
use crate::error::{Error, Result};

fn check_k(preds: &PredictionSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    if preds.is_empty() {
        return Err(Error::Undefined(
            "top-k accuracy of an empty prediction set".into(),
        ));
    }
    if let Some(r) = preds.records().iter().find(|r| r.ranked().len() < k) {
        return Err(Error::Argument(format!(
            "prediction {:?} ranks only {} categories, fewer than k={k}",
            r.image_id,
            r.ranked().len()
        )));
    }
    Ok(())
}

/// Fraction of records whose label is among their first `k` ranked categories.
pub fn top_k_accuracy(preds: &PredictionSet, k: usize) -> Result<f64> {
    check_k(preds, k)?;
    let hits = preds.records().iter().filter(|r| r.hit_at(k)).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// [`top_k_accuracy`] grouped by ground-truth label.
pub fn per_category_accuracy(preds: &PredictionSet, k: usize) -> Result<BTreeMap<CategoryId, f64>> {
    check_k(preds, k)?;
    let mut acc: BTreeMap<CategoryId, (usize, usize)> = BTreeMap::new();
    for r in preds.records() {
        let e = acc.entry(r.label).or_default();
        e.0 += usize::from(r.hit_at(k));
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(c, (hits, n))| (c, hits as f64 / n as f64))
        .collect())
}

/// Non-interpolated average precision of `category` over the whole set.
///
/// Images are ranked by their score for `category` (descending, ties by
/// ascending `image_id`); AP is the mean of the precision at each positive.
pub fn average_precision(preds: &PredictionSet, category: CategoryId) -> Result<f64> {
    let mut scored: Vec<(&PredictionRecord, f64)> = Vec::with_capacity(preds.len());
    for r in preds.records() {
        let s = r.score_for(category).ok_or_else(|| {
            Error::Argument(format!(
                "prediction {:?} carries no score for category {category}",
                r.image_id
            ))
        })?;
        scored.push((r, s));
    }
    // records are already in image_id order, so a stable sort keeps the tie-break
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, (r, _)) in scored.iter().enumerate() {
        if r.label == category {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::Undefined(format!(
            "no positives for category {category}"
        )));
    }
    Ok(sum / hits as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryAccuracy {
    pub images: usize,
    pub top1: f64,
    pub top5: f64,
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub images: usize,
    pub top1: f64,
    pub top5: f64,
    pub per_category: BTreeMap<CategoryId, CategoryAccuracy>,
}

impl AccuracyReport {
    /// Top-1/top-5 accuracy overall and per label; with `with_ap`, also the
    /// AP of every label category, which needs its score in every record.
    pub fn from_predictions(preds: &PredictionSet, with_ap: bool) -> Result<Self> {
        let top1 = per_category_accuracy(preds, 1)?;
        let top5 = per_category_accuracy(preds, 5)?;
        let mut counts: BTreeMap<CategoryId, usize> = BTreeMap::new();
        for r in preds.records() {
            *counts.entry(r.label).or_default() += 1;
        }
        let mut per_category = BTreeMap::new();
        for (c, images) in counts {
            let ap = if with_ap {
                Some(average_precision(preds, c)?)
            } else {
                None
            };
            per_category.insert(
                c,
                CategoryAccuracy {
                    images,
                    top1: top1[&c],
                    top5: top5[&c],
                    ap,
                },
            );
        }
        Ok(AccuracyReport {
            images: preds.len(),
            top1: top_k_accuracy(preds, 1)?,
            top5: top_k_accuracy(preds, 5)?,
            per_category,
        })
    }

    /// Averages several runs (e.g. seeds) value by value.
    pub fn mean_of(runs: &[AccuracyReport]) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::Undefined("no runs to average".into()))?;
        for r in &runs[1..] {
            if !r.per_category.keys().eq(first.per_category.keys()) {
                return Err(Error::Validation(
                    "runs cover different category sets".into(),
                ));
            }
        }
        let mean = |f: &dyn Fn(&AccuracyReport) -> f64| -> Result<f64> {
            Ok(aggregate_runs(&runs.iter().map(f).collect::<Vec<_>>())?.mean)
        };
        let mut per_category = BTreeMap::new();
        for (&c, base) in &first.per_category {
            let ap = if runs.iter().all(|r| r.per_category[&c].ap.is_some()) {
                Some(mean(&|r| r.per_category[&c].ap.unwrap_or_default())?)
            } else {
                None
            };
            per_category.insert(
                c,
                CategoryAccuracy {
                    images: base.images,
                    top1: mean(&|r| r.per_category[&c].top1)?,
                    top5: mean(&|r| r.per_category[&c].top5)?,
                    ap,
                },
            );
        }
        Ok(AccuracyReport {
            images: first.images,
            top1: mean(&|r| r.top1)?,
            top5: mean(&|r| r.top5)?,
            per_category,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryDelta {
    pub top1: f64,
    pub top5: f64,
    pub ap: Option<f64>,
}

/// Baseline minus treatment, per category and on average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub per_category: BTreeMap<CategoryId, CategoryDelta>,
    /// Difference of the overall accuracies.
    pub overall_top1: f64,
    pub overall_top5: f64,
    /// Means of the per-category deltas.
    pub mean_top1: f64,
    pub mean_top5: f64,
    pub mean_ap: Option<f64>,
}

pub fn delta_report(baseline: &AccuracyReport, treatment: &AccuracyReport) -> Result<DeltaReport> {
    if !baseline
        .per_category
        .keys()
        .eq(treatment.per_category.keys())
    {
        return Err(Error::Validation(
            "baseline and treatment cover different categories".into(),
        ));
    }
    if baseline.per_category.is_empty() {
        return Err(Error::Undefined("no categories to compare".into()));
    }
    let per_category: BTreeMap<CategoryId, CategoryDelta> = baseline
        .per_category
        .iter()
        .map(|(c, b)| {
            let t = &treatment.per_category[c];
            let ap = b.ap.zip(t.ap).map(|(b, t)| b - t);
            (
                *c,
                CategoryDelta {
                    top1: b.top1 - t.top1,
                    top5: b.top5 - t.top5,
                    ap,
                },
            )
        })
        .collect();
    let n = per_category.len() as f64;
    let mean = |f: fn(&CategoryDelta) -> f64| per_category.values().map(f).sum::<f64>() / n;
    let mean_ap = per_category
        .values()
        .map(|d| d.ap)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    Ok(DeltaReport {
        overall_top1: baseline.top1 - treatment.top1,
        overall_top5: baseline.top5 - treatment.top5,
        mean_top1: mean(|d| d.top1),
        mean_top5: mean(|d| d.top5),
        mean_ap,
        per_category,
    })
}
