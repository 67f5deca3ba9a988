use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use obscura_core::annotations::load_predictions;
use obscura_core::eval::{
    aggregate_runs, bin_drop_curve, delta_report, pearson, AccuracyReport, RunSummary,
    DEFAULT_BIN_EDGES_PERCENT,
};
use obscura_core::CategoryId;
use serde::Serialize;
use serde_json::json;

use crate::args::{EvalCommand, Metric};
use crate::output::{emit, read_table};
use crate::{Ctx, Status};

#[derive(Serialize)]
struct RunsSummary {
    runs: usize,
    images: usize,
    top1: RunSummary,
    top5: RunSummary,
}

struct Runs {
    mean: AccuracyReport,
    summary: RunsSummary,
}

fn load_runs(paths: &[PathBuf], with_ap: bool) -> Result<Runs> {
    let runs = paths
        .iter()
        .map(|p| AccuracyReport::from_predictions(&load_predictions(p)?, with_ap))
        .collect::<obscura_core::Result<Vec<_>>>()?;
    let mean = AccuracyReport::mean_of(&runs)?;
    let summary = RunsSummary {
        runs: runs.len(),
        images: mean.images,
        top1: aggregate_runs(&runs.iter().map(|r| r.top1).collect::<Vec<_>>())?,
        top5: aggregate_runs(&runs.iter().map(|r| r.top5).collect::<Vec<_>>())?,
    };
    Ok(Runs { mean, summary })
}

pub fn run(cmd: EvalCommand, ctx: &Ctx) -> Result<Status> {
    let w = &ctx.writer;
    match cmd {
        EvalCommand::Accuracy {
            predictions,
            ap,
            report,
        } => {
            let runs = load_runs(&predictions, ap)?;
            let mut out = w.tagged("overall", &runs.summary)?;
            for (c, row) in &runs.mean.per_category {
                let mut v = w.value(row)?;
                v["category"] = json!(c);
                out += &w.tagged("category", &v)?;
            }
            emit(report.out.as_deref(), &out)?;
            if let Some(plot) = &report.plot {
                let rows = runs
                    .mean
                    .per_category
                    .iter()
                    .map(|(c, r)| (c.to_string(), r.top1));
                emit(Some(plot), &w.table(("category", "top1"), rows))?;
            }
        }
        EvalCommand::Delta {
            baseline,
            treatment,
            ap,
            metric,
            report,
        } => {
            let base = load_runs(&baseline, ap || metric == Metric::Ap)?;
            let treat = load_runs(&treatment, ap || metric == Metric::Ap)?;
            let delta = delta_report(&base.mean, &treat.mean)?;
            let mut out = w.tagged(
                "overall",
                &json!({
                    "baseline": w.value(&base.summary)?,
                    "treatment": w.value(&treat.summary)?,
                    "overall_top1": delta.overall_top1,
                    "overall_top5": delta.overall_top5,
                    "mean_top1": delta.mean_top1,
                    "mean_top5": delta.mean_top5,
                    "mean_ap": delta.mean_ap,
                }),
            )?;
            for (c, row) in &delta.per_category {
                let mut v = w.value(row)?;
                v["category"] = json!(c);
                out += &w.tagged("category", &v)?;
            }
            emit(report.out.as_deref(), &out)?;
            if let Some(plot) = &report.plot {
                let (name, rows): (&str, Vec<(String, f64)>) = match metric {
                    Metric::Top1 => ("delta_top1", pick(&delta.per_category, |d| Some(d.top1))),
                    Metric::Top5 => ("delta_top5", pick(&delta.per_category, |d| Some(d.top5))),
                    Metric::Ap => ("delta_ap", pick(&delta.per_category, |d| d.ap)),
                };
                emit(Some(plot), &w.table(("category", name), rows))?;
            }
        }
        EvalCommand::Correlate { x, y, out } => {
            let xs = read_table(&x)?;
            let ys = read_table(&y)?;
            let (a, b) = paired(&xs, &ys)?;
            let res = pearson(&a, &b)?;
            let line = w.line(&json!({
                "n": res.n,
                "r": res.r,
                "p": res.p,
                "ln_p": res.ln_p,
                "log10_p": res.ln_p / std::f64::consts::LN_10,
            }))?;
            emit(out.as_deref(), &line)?;
        }
        EvalCommand::Bins {
            fractions,
            drops,
            edges,
            report,
        } => {
            let edges = edges
                .or_else(|| ctx.config.edges.clone())
                .unwrap_or_else(|| DEFAULT_BIN_EDGES_PERCENT.to_vec());
            let percent: BTreeMap<CategoryId, f64> = read_table(&fractions)?
                .into_iter()
                .map(|(c, f)| (c, f * 100.0))
                .collect();
            let drops = read_table(&drops)?;
            let bins = bin_drop_curve(&percent, &drops, &edges)?;
            emit(report.out.as_deref(), &w.lines(&bins)?)?;
            if let Some(plot) = &report.plot {
                let rows = bins.iter().map(|b| (w.num(b.lower), b.mean_drop));
                emit(
                    Some(plot),
                    &w.table(("bin_lower_percent", "mean_drop"), rows),
                )?;
            }
        }
    }
    Ok(Status::Success)
}

fn pick<T>(rows: &BTreeMap<CategoryId, T>, f: impl Fn(&T) -> Option<f64>) -> Vec<(String, f64)> {
    rows.iter()
        .filter_map(|(c, r)| f(r).map(|v| (c.to_string(), v)))
        .collect()
}

/// Values of both tables in shared category order; the key sets must agree.
fn paired(
    x: &BTreeMap<CategoryId, f64>,
    y: &BTreeMap<CategoryId, f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(c) = x.keys().find(|c| !y.contains_key(c)) {
        bail!("category {c} appears in --x but not in --y");
    }
    if let Some(c) = y.keys().find(|c| !x.contains_key(c)) {
        bail!("category {c} appears in --y but not in --x");
    }
    Ok((x.values().copied().collect(), y.values().copied().collect()))
}
