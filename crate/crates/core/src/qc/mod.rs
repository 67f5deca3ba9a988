//! Annotation quality control: IoU matching, false-positive/false-negative
//! audits, gold-standard checks, the per-HIT lives game, and merging worker
//! edits over detector output.

mod session;

use std::collections::BTreeMap;

use serde::Serialize;

pub use session::{
    session_step, HitImage, QcSession, SessionEvent, StepOutcome, GOLD_PER_HIT, HIT_SIZE,
    STARTING_LIVES,
};

use crate::annotations::{AnnotationSet, BBox, CategoryId, Fitted, ImageRecord};
use crate::error::{Error, Result};

pub const DEFAULT_AUDIT_IOU: f64 = 0.5;
pub const DEFAULT_GOLD_IOU: f64 = 0.5;
/// Boxes at or above this IoU with an earlier box are treated as duplicates.
pub const DUPLICATE_IOU: f64 = 0.95;

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    /// `(pred index, gt index, iou)` in the order they were matched.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

fn check_threshold(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "IoU threshold must lie in (0, 1], got {tau}"
        )))
    }
}

/// Greedy one-to-one matching by descending IoU; ties go to the lower
/// `(pred, gt)` index pair. Pairs below `tau` never match.
pub fn match_boxes(pred: &[BBox], gt: &[BBox], tau: f64) -> Result<Matching> {
    check_threshold(tau)?;
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let v = iou(p, g);
            if v >= tau {
                candidates.push((i, j, v));
            }
        }
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut pred_used = vec![false; pred.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for (i, j, v) in candidates {
        if !pred_used[i] && !gt_used[j] {
            pred_used[i] = true;
            gt_used[j] = true;
            pairs.push((i, j, v));
        }
    }
    let unmatched = |used: &[bool]| {
        used.iter()
            .enumerate()
            .filter(|(_, u)| !**u)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(Matching {
        unmatched_pred: unmatched(&pred_used),
        unmatched_gt: unmatched(&gt_used),
        pairs,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub images: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AuditResult {
    pub rows: BTreeMap<CategoryId, AuditRow>,
    /// Arithmetic means over the rows.
    pub mean_false_positives: f64,
    pub mean_false_negatives: f64,
}

impl AuditResult {
    pub fn from_rows(rows: BTreeMap<CategoryId, AuditRow>) -> Self {
        let n = rows.len().max(1) as f64;
        let fp: usize = rows.values().map(|r| r.false_positives).sum();
        let fns: usize = rows.values().map(|r| r.false_negatives).sum();
        AuditResult {
            mean_false_positives: fp as f64 / n,
            mean_false_negatives: fns as f64 / n,
            rows,
        }
    }
}

/// Counts unmatched annotation boxes (false positives) and unmatched
/// ground-truth boxes (false negatives) per category.
pub fn audit_fp_fn(
    annotations: &AnnotationSet,
    ground_truth: &AnnotationSet,
    tau: f64,
) -> Result<AuditResult> {
    check_threshold(tau)?;
    if annotations.image_ids() != ground_truth.image_ids() {
        return Err(Error::Validation(
            "annotation and ground-truth sets cover different images".into(),
        ));
    }
    let mut rows: BTreeMap<CategoryId, AuditRow> = BTreeMap::new();
    for (a, g) in annotations.records().iter().zip(ground_truth.records()) {
        let m = match_boxes(&a.faces, &g.faces, tau)?;
        let row = rows.entry(g.category).or_default();
        row.images += 1;
        row.false_positives += m.unmatched_pred.len();
        row.false_negatives += m.unmatched_gt.len();
    }
    Ok(AuditResult::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldOutcome {
    Correct,
    Mistake,
}

/// A submission on a gold image is correct only if every box matches.
pub fn gold_check(worker: &[BBox], gold: &[BBox], tau_gold: f64) -> Result<GoldOutcome> {
    let m = match_boxes(worker, gold, tau_gold)?;
    Ok(
        if m.unmatched_pred.is_empty() && m.unmatched_gt.is_empty() {
            GoldOutcome::Correct
        } else {
            GoldOutcome::Mistake
        },
    )
}

/// Clamps, drops degenerate boxes and removes near-duplicates (IoU ≥ 0.95
/// with an earlier kept box).
fn clean_boxes(boxes: &[BBox], width: u32, height: u32, image_id: &str) -> Result<Vec<BBox>> {
    let mut kept: Vec<BBox> = Vec::with_capacity(boxes.len());
    for b in boxes {
        let b = match b.fit(width, height) {
            Fitted::Kept(b) => b,
            Fitted::Degenerate => continue,
            Fitted::Outside | Fitted::NonFinite => {
                return Err(Error::Validation(format!(
                    "image {image_id:?}: box {:?} is unusable",
                    <[f64; 4]>::from(*b)
                )))
            }
        };
        if kept.iter().all(|k| iou(k, &b) < DUPLICATE_IOU) {
            kept.push(b);
        }
    }
    Ok(kept)
}

/// Replaces detector boxes with worker boxes on every image the worker
/// touched, then re-validates all boxes.
pub fn merge_worker_edits(
    detector: &AnnotationSet,
    worker: &AnnotationSet,
) -> Result<AnnotationSet> {
    if let Some(unknown) = worker
        .records()
        .iter()
        .find(|w| detector.get(&w.image_id).is_none())
    {
        return Err(Error::Validation(format!(
            "worker edited unknown image {:?}",
            unknown.image_id
        )));
    }
    let records: Vec<ImageRecord> = detector
        .records()
        .iter()
        .map(|d| {
            let source = worker.get(&d.image_id).map_or(&d.faces, |w| &w.faces);
            let faces = clean_boxes(source, d.width, d.height, &d.image_id)?;
            Ok(ImageRecord { faces, ..d.clone() })
        })
        .collect::<Result<_>>()?;
    AnnotationSet::new(records, detector.categories().clone())
}
