use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use obscura_core::annotations::{load_annotations, save_annotations};
use obscura_core::qc::{
    audit_fp_fn, merge_worker_edits, HitImage, QcSession, DEFAULT_AUDIT_IOU, DEFAULT_GOLD_IOU,
    GOLD_PER_HIT, HIT_SIZE,
};
use obscura_core::{AnnotationSet, BBox};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::args::QcCommand;
use crate::output::{emit, Writer};
use crate::{Ctx, Status};

/// One line of a worker submission log.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Submission {
    session_id: String,
    image_id: String,
    boxes: Vec<BBox>,
    #[allow(dead_code)]
    timestamp: serde_json::Value,
}

/// Above this many steps a synthetic worker is abandoned as never finishing.
const SYNTHETIC_STEP_CAP: usize = 100_000;

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1))
        })
        .collect()
}

pub fn run(cmd: QcCommand, ctx: &Ctx) -> Result<Status> {
    let w = &ctx.writer;
    match cmd {
        QcCommand::Audit {
            annotations,
            ground_truth,
            tau,
            out,
        } => {
            let ann = load_annotations(&annotations)?.set;
            let gt = load_annotations(&ground_truth)?.set;
            let tau = tau.or(ctx.config.tau).unwrap_or(DEFAULT_AUDIT_IOU);
            let res = audit_fp_fn(&ann, &gt, tau)?;
            let mut text = String::new();
            for (c, row) in &res.rows {
                let mut v = w.value(row)?;
                v["category"] = json!(c);
                v["name"] = json!(gt.category_name(*c).unwrap_or_default());
                text += &w.tagged("category", &v)?;
            }
            text += &w.tagged(
                "average",
                &json!({
                    "categories": res.rows.len(),
                    "false_positives": res.mean_false_positives,
                    "false_negatives": res.mean_false_negatives,
                }),
            )?;
            emit(out.as_deref(), &text)?;
            Ok(Status::Success)
        }
        QcCommand::Merge {
            detector,
            submissions,
            out,
        } => merge(&detector, &submissions, &out, w),
        QcCommand::Simulate {
            hit,
            submissions,
            synthetic,
            mistake_rate,
            seed,
            tau_gold,
            out,
        } => {
            let tau_gold = tau_gold.or(ctx.config.tau_gold).unwrap_or(DEFAULT_GOLD_IOU);
            let (text, status) = match (hit, submissions, synthetic) {
                (Some(hit), Some(subs), _) => replay(&hit, &subs, tau_gold, w)?,
                (None, _, Some(workers)) => {
                    let seed = seed.or(ctx.config.seed).unwrap_or(0);
                    (
                        synthetic_run(workers, mistake_rate, seed, tau_gold, w)?,
                        Status::Success,
                    )
                }
                _ => bail!("give either --hit with --submissions, or --synthetic"),
            };
            emit(out.as_deref(), &text)?;
            Ok(status)
        }
    }
}

fn merge(detector: &Path, submissions: &Path, out: &Path, w: &Writer) -> Result<Status> {
    let detector = load_annotations(detector)?.set;
    // the last submission for an image wins
    let mut latest: BTreeMap<String, Submission> = BTreeMap::new();
    for s in read_jsonl::<Submission>(submissions)? {
        latest.insert(s.image_id.clone(), s);
    }
    let mut dropped = 0;
    let mut edits = Vec::with_capacity(latest.len());
    for (id, s) in latest {
        let Some(base) = detector.get(&id) else {
            bail!(
                "submission for unknown image {id:?} (session {:?})",
                s.session_id
            );
        };
        let mut rec = base.clone().with_faces(s.boxes);
        dropped += rec.normalize()?;
        edits.push(rec);
    }
    let worker = AnnotationSet::new(edits, detector.categories().clone())?;
    let merged = merge_worker_edits(&detector, &worker)?;
    save_annotations(&merged, out)?;
    let faces: usize = merged.records().iter().map(|r| r.faces.len()).sum();
    emit(
        None,
        &w.line(&json!({
            "images": merged.len(),
            "edited": worker.len(),
            "dropped_boxes": dropped,
            "faces": faces,
        }))?,
    )?;
    Ok(Status::Success)
}

fn session_lines(id: &str, session: &QcSession, w: &Writer) -> Result<String> {
    let mut text = String::new();
    for e in session.events() {
        let mut v = w.value(e)?;
        v["session_id"] = json!(id);
        text += &w.tagged("event", &v)?;
    }
    Ok(text)
}

fn session_row(
    id: &str,
    session: &QcSession,
    steps: usize,
    error: Option<String>,
) -> serde_json::Value {
    json!({
        "session_id": id,
        "steps": steps,
        "completed": session.is_completed(),
        "restarts": session.restarts(),
        "index": session.index(),
        "lives": session.lives(),
        "error": error,
    })
}

fn replay(hit: &Path, submissions: &Path, tau_gold: f64, w: &Writer) -> Result<(String, Status)> {
    let images: Vec<HitImage> = read_jsonl(hit)?;
    QcSession::with_threshold(images.clone(), tau_gold)?;
    let mut by_session: BTreeMap<String, Vec<Submission>> = BTreeMap::new();
    for s in read_jsonl::<Submission>(submissions)? {
        by_session.entry(s.session_id.clone()).or_default().push(s);
    }
    let mut text = String::new();
    let mut status = Status::Success;
    for (id, subs) in &by_session {
        let mut session = QcSession::with_threshold(images.clone(), tau_gold)?;
        let mut error = None;
        let mut steps = 0;
        for s in subs {
            let Some(current) = session.current() else {
                error = Some(format!("submission for {:?} after completion", s.image_id));
                break;
            };
            if current.image_id != s.image_id {
                error = Some(format!(
                    "submission for {:?} while the session is at {:?}",
                    s.image_id, current.image_id
                ));
                break;
            }
            session.step(&s.boxes)?;
            steps += 1;
        }
        if let Some(e) = &error {
            log::warn!("session {id}: {e}");
            status = Status::Partial;
        }
        text += &session_lines(id, &session, w)?;
        text += &w.tagged("session", &session_row(id, &session, steps, error))?;
    }
    Ok((text, status))
}

fn synthetic_run(
    workers: usize,
    mistake_rate: f64,
    seed: u64,
    tau_gold: f64,
    w: &Writer,
) -> Result<String> {
    if !(0.0..1.0).contains(&mistake_rate) {
        bail!("--mistake-rate must lie in [0, 1), got {mistake_rate}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let golds = sample(&mut rng, HIT_SIZE, GOLD_PER_HIT).into_vec();
    let images: Vec<HitImage> = (0..HIT_SIZE)
        .map(|i| HitImage {
            image_id: format!("img{i:03}"),
            gold: golds.contains(&i).then(|| {
                let (x, y) = (rng.gen_range(0.0..60.0), rng.gen_range(0.0..60.0));
                vec![BBox::new(
                    x,
                    y,
                    x + rng.gen_range(10.0..40.0),
                    y + rng.gen_range(10.0..40.0),
                )]
            }),
        })
        .collect();

    let mut gold_indices = golds.clone();
    gold_indices.sort_unstable();

    let mut text = String::new();
    let (mut completed, mut restarts) = (0, 0);
    for worker in 0..workers {
        let id = format!("worker{worker:03}");
        let mut session = QcSession::with_threshold(images.clone(), tau_gold)?;
        let mut steps = 0;
        while let Some(current) = session.current() {
            if steps == SYNTHETIC_STEP_CAP {
                break;
            }
            let submission = match &current.gold {
                Some(gold) if !rng.gen_bool(mistake_rate) => gold.clone(),
                _ => Vec::new(),
            };
            session.step(&submission)?;
            steps += 1;
        }
        completed += usize::from(session.is_completed());
        restarts += session.restarts();
        text += &session_lines(&id, &session, w)?;
        text += &w.tagged("session", &session_row(&id, &session, steps, None))?;
    }
    text += &w.tagged(
        "summary",
        &json!({
            "seed": seed,
            "sessions": workers,
            "completed": completed,
            "restarts": restarts,
            "gold_indices": gold_indices,
        }),
    )?;
    Ok(text)
}
