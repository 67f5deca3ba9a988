//! Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
//! tolerance and wall-clock limit. Exits nonzero if any criterion fails.

#[path = "../../core/tests/support/pearson_oracle.rs"]
mod pearson_oracle;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use obscura_core::eval::{
    average_precision, delta_report, pearson, per_category_accuracy, top_k_accuracy, AccuracyReport,
};
use obscura_core::obfuscate::{blur_faces, enlarge_box, overlay_faces, OverlayColor, MEAN_COLOR};
use obscura_core::qc::{
    audit_fp_fn, HitImage, QcSession, SessionEvent, StepOutcome, HIT_SIZE, STARTING_LIVES,
};
use obscura_core::reference::{brute_force_ap, grid_union_area, naive_blur_faces};
use obscura_core::stats::{coverage_fraction, rect_union_area};
use obscura_core::{
    AnnotationSet, BBox, ImageBuffer, ImageRecord, PredictionRecord, PredictionSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "audit-fixture-averages",
            limit: Duration::from_secs(1),
            run: audit_fixture,
        },
        Criterion {
            id: 2,
            name: "blur-pipeline-invariants",
            limit: Duration::from_secs(30),
            run: blur_invariants,
        },
        Criterion {
            id: 3,
            name: "overlay-mean-color-and-support",
            limit: Duration::from_secs(5),
            run: overlay_checks,
        },
        Criterion {
            id: 4,
            name: "enlarge-box-table",
            limit: Duration::from_secs(1),
            run: enlarge_table,
        },
        Criterion {
            id: 5,
            name: "union-area-vs-grid",
            limit: Duration::from_secs(10),
            run: union_vs_grid,
        },
        Criterion {
            id: 6,
            name: "average-precision-vs-brute-force",
            limit: Duration::from_secs(20),
            run: ap_permutations,
        },
        Criterion {
            id: 7,
            name: "pearson-vs-bigfloat-oracle",
            limit: Duration::from_secs(10),
            run: pearson_vs_oracle,
        },
        Criterion {
            id: 8,
            name: "accuracy-and-delta-vs-brute-force",
            limit: Duration::from_secs(5),
            run: accuracy_brute_force,
        },
        Criterion {
            id: 9,
            name: "qc-session-state-machine",
            limit: Duration::from_secs(5),
            run: qc_session,
        },
        Criterion {
            id: 10,
            name: "end-to-end-determinism",
            limit: Duration::from_secs(10),
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {:<36} {:>8.3}s (limit {}s)  {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

/// (category, FP after detection, FP after crowdsourcing, FN after detection, FN after crowdsourcing)
const AUDIT_FIXTURE: [(&str, usize, usize, usize, usize); 20] = [
    ("irish setter", 12, 3, 0, 0),
    ("gorilla", 32, 7, 0, 0),
    ("cheetah", 3, 1, 0, 0),
    ("basset", 10, 0, 0, 0),
    ("lynx", 9, 1, 0, 0),
    ("rottweiler", 11, 4, 0, 0),
    ("sorrel", 2, 1, 0, 0),
    ("impala", 1, 0, 0, 0),
    ("bernese mt. dog", 20, 3, 0, 0),
    ("silky terrier", 4, 0, 0, 0),
    ("maypole", 0, 0, 7, 5),
    ("basketball", 0, 0, 7, 2),
    ("volleyball", 0, 0, 10, 5),
    ("balance beam", 0, 0, 9, 5),
    ("unicycle", 0, 1, 6, 1),
    ("stage", 0, 0, 0, 0),
    ("torch", 2, 1, 1, 1),
    ("baseball player", 0, 0, 0, 0),
    ("military uniform", 3, 2, 2, 0),
    ("steel drum", 1, 1, 1, 0),
];

/// 50 images per category, each with one true face. The annotation set misses
/// the true face on the first `fns` images and carries a spurious box on the
/// first `fps` images; kept faces are jittered but still overlap well.
fn fixture_sets(
    pick: impl Fn(&(&str, usize, usize, usize, usize)) -> (usize, usize),
) -> (AnnotationSet, AnnotationSet) {
    let face = BBox::new(10.0, 10.0, 30.0, 30.0);
    let jittered = face.translate(2.0, 2.0);
    let spurious = BBox::new(60.0, 60.0, 80.0, 80.0);
    let (mut gt, mut ann) = (Vec::new(), Vec::new());
    let mut names = BTreeMap::new();
    for (c, row) in AUDIT_FIXTURE.iter().enumerate() {
        names.insert(c as u32, row.0.to_string());
        let (fps, fns) = pick(row);
        for i in 0..50 {
            let id = format!("c{c:02}_{i:02}");
            gt.push(ImageRecord::new(&id, 100, 100, c as u32).with_faces(vec![face]));
            let mut faces = Vec::new();
            if i >= fns {
                faces.push(jittered);
            }
            if i < fps {
                faces.push(spurious);
            }
            ann.push(ImageRecord::new(&id, 100, 100, c as u32).with_faces(faces));
        }
    }
    (
        AnnotationSet::new(ann, names.clone()).unwrap(),
        AnnotationSet::new(gt, names).unwrap(),
    )
}

fn audit_fixture() -> Outcome {
    let (auto, gt) = fixture_sets(|r| (r.1, r.3));
    let (human, _) = fixture_sets(|r| (r.2, r.4));
    let a = audit_fp_fn(&auto, &gt, 0.5).map_err(|e| e.to_string())?;
    let h = audit_fp_fn(&human, &gt, 0.5).map_err(|e| e.to_string())?;
    for (c, row) in AUDIT_FIXTURE.iter().enumerate() {
        let (ra, rh) = (&a.rows[&(c as u32)], &h.rows[&(c as u32)]);
        ensure!(
            (
                ra.false_positives,
                rh.false_positives,
                ra.false_negatives,
                rh.false_negatives,
                ra.images
            ) == (row.1, row.2, row.3, row.4, 50),
            "row {} does not round-trip",
            row.0
        );
    }
    let got = [
        a.mean_false_positives,
        h.mean_false_positives,
        a.mean_false_negatives,
        h.mean_false_negatives,
    ];
    let printed: Vec<String> = got.iter().map(|v| format!("{v:.2}")).collect();
    ensure!(
        printed == ["5.50", "1.25", "2.15", "0.95"],
        "averages {printed:?}"
    );
    ensure!(
        got == [5.50, 1.25, 2.15, 0.95],
        "averages not exact: {got:?}"
    );
    Ok(format!(
        "FP {} -> {}, FN {} -> {}",
        printed[0], printed[1], printed[2], printed[3]
    ))
}

// ---------------------------------------------------------------- 2

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::new(w, h, (0..w * h * 3).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

fn random_box(rng: &mut ChaCha8Rng, w: f64, h: f64, max_side: f64) -> BBox {
    let bw = rng.gen_range(2.0..max_side);
    let bh = rng.gen_range(2.0..max_side);
    let x0 = rng.gen_range(0.0..w - bw);
    let y0 = rng.gen_range(0.0..h - bh);
    BBox::new(x0, y0, x0 + bw, y0 + bh)
}

fn blur_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_const, mut worst_far, mut worst_oracle) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..50 {
        let img = random_image(&mut rng, 64, 64);
        let n = rng.gen_range(0..=4);
        let faces: Vec<BBox> = (0..n)
            .map(|_| random_box(&mut rng, 64.0, 64.0, 40.0))
            .collect();

        // (a)
        let same = blur_faces(&img, &[]).map_err(|e| e.to_string())?;
        ensure!(same == img, "case {case}: empty box list changed the image");

        // (b)
        let v: f64 = rng.gen();
        let flat = ImageBuffer::filled(64, 64, [v, v * 0.5, 1.0 - v]).unwrap();
        let out = blur_faces(&flat, &faces).map_err(|e| e.to_string())?;
        for (a, b) in out.data().iter().zip(flat.data()) {
            worst_const = worst_const.max((a - b).abs());
        }

        let out = blur_faces(&img, &faces).map_err(|e| e.to_string())?;
        if n == 0 {
            ensure!(out == img, "case {case}: no faces but output differs");
            continue;
        }
        // (c)
        let d_max = faces.iter().map(BBox::diagonal).fold(0.0, f64::max);
        let reach = (3.0 * d_max / 10.0).ceil() + 1.0;
        let grown: Vec<BBox> = faces.iter().map(|b| enlarge_box(b, 64, 64)).collect();
        for row in 0..64 {
            for col in 0..64 {
                let (cx, cy) = (col as f64 + 0.5, row as f64 + 0.5);
                let far = grown.iter().all(|e| {
                    let dx = (e.x0 - cx).max(cx - e.x1).max(0.0);
                    let dy = (e.y0 - cy).max(cy - e.y1).max(0.0);
                    dx > reach || dy > reach
                });
                if far {
                    let (p, q) = (out.pixel(row, col), img.pixel(row, col));
                    for c in 0..3 {
                        worst_far = worst_far.max((p[c] - q[c]).abs());
                    }
                }
            }
        }
        // (d)
        let naive = naive_blur_faces(&img, &faces);
        for (a, b) in out.data().iter().zip(&naive) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
    }
    ensure!(
        worst_const <= 1e-12,
        "constant image drifted by {worst_const:e}"
    );
    ensure!(
        worst_far <= 1.0 / 255.0,
        "far pixel changed by {worst_far:e}"
    );
    ensure!(worst_oracle <= 1e-9, "oracle mismatch {worst_oracle:e}");
    Ok(format!(
        "const {worst_const:.1e} <= 1e-12, far {worst_far:.1e} <= 1/255, oracle {worst_oracle:.1e} <= 1e-9"
    ))
}

// ---------------------------------------------------------------- 3

fn overlay_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let img = random_image(&mut rng, 37, 23);
    let out = overlay_faces(&img, &[BBox::new(0.0, 0.0, 37.0, 23.0)], MEAN_COLOR, false)
        .map_err(|e| e.to_string())?;
    ensure!(
        out.data()
            .chunks_exact(3)
            .all(|p| p == [0.485, 0.456, 0.406]),
        "whole-image overlay is not exactly the mean color"
    );

    let mut changed_total = 0;
    for case in 0..100 {
        let (w, h) = (rng.gen_range(8..48), rng.gen_range(8..48));
        let img = random_image(&mut rng, w, h);
        let n = rng.gen_range(0..=4);
        let faces: Vec<BBox> = (0..n)
            .map(|_| random_box(&mut rng, w as f64, h as f64, (w.min(h) as f64) / 2.0))
            .collect();
        let enlarge = rng.gen_bool(0.5);
        // random draws never reach 1.0, so every covered pixel changes
        let color = OverlayColor::new(1.0, 0.0, 1.0).unwrap();
        let out = overlay_faces(&img, &faces, color, enlarge).map_err(|e| e.to_string())?;
        let region: Vec<BBox> = if enlarge {
            faces.iter().map(|b| enlarge_box(b, h, w)).collect()
        } else {
            faces.clone()
        };
        for row in 0..h {
            for col in 0..w {
                let (cx, cy) = (col as f64 + 0.5, row as f64 + 0.5);
                let covered = region
                    .iter()
                    .any(|b| cx > b.x0 && cx < b.x1 && cy > b.y0 && cy < b.y1);
                let changed = out.pixel(row, col) != img.pixel(row, col);
                ensure!(
                    covered == changed,
                    "case {case}: pixel ({row},{col}) covered={covered} changed={changed}"
                );
                changed_total += usize::from(changed);
            }
        }
    }
    Ok(format!(
        "exact mean color; 100 cases, {changed_total} changed pixels all in support"
    ))
}

// ---------------------------------------------------------------- 4

fn enlarge_table() -> Outcome {
    let r2 = 2f64.sqrt();
    let r13 = 13f64.sqrt();
    // (frame w, frame h, box, expected)
    let table: [(usize, usize, [f64; 4], [f64; 4]); 20] = [
        (100, 100, [10.0, 10.0, 40.0, 50.0], [5.0, 5.0, 45.0, 55.0]),
        (100, 100, [0.0, 0.0, 30.0, 40.0], [0.0, 0.0, 35.0, 45.0]),
        (
            100,
            100,
            [70.0, 60.0, 100.0, 100.0],
            [65.0, 55.0, 100.0, 100.0],
        ),
        (50, 50, [20.0, 20.0, 26.0, 28.0], [19.0, 19.0, 27.0, 29.0]),
        (
            200,
            150,
            [20.0, 30.0, 80.0, 110.0],
            [10.0, 20.0, 90.0, 120.0],
        ),
        (10, 10, [1.0, 1.0, 4.0, 5.0], [0.5, 0.5, 4.5, 5.5]),
        (40, 40, [0.0, 5.0, 12.0, 21.0], [0.0, 3.0, 14.0, 23.0]),
        (30, 30, [20.0, 15.0, 29.0, 27.0], [18.5, 13.5, 30.0, 28.5]),
        (64, 64, [10.0, 10.0, 34.0, 20.0], [7.4, 7.4, 36.6, 22.6]),
        (64, 48, [50.0, 30.0, 55.0, 42.0], [48.7, 28.7, 56.3, 43.3]),
        (20, 20, [2.0, 2.0, 10.0, 17.0], [0.3, 0.3, 11.7, 18.7]),
        (100, 50, [79.0, 29.0, 99.0, 50.0], [76.1, 26.1, 100.0, 50.0]),
        (32, 32, [1.0, 4.0, 8.0, 28.0], [0.0, 1.5, 10.5, 30.5]),
        (
            1000,
            1000,
            [100.0, 200.0, 700.0, 1000.0],
            [0.0, 100.0, 800.0, 1000.0],
        ),
        (100, 100, [0.0, 0.0, 100.0, 100.0], [0.0, 0.0, 100.0, 100.0]),
        (
            100,
            100,
            [45.0, 45.0, 55.0, 55.0],
            [45.0 - r2, 45.0 - r2, 55.0 + r2, 55.0 + r2],
        ),
        (
            640,
            480,
            [300.0, 200.0, 330.0, 240.0],
            [295.0, 195.0, 335.0, 245.0],
        ),
        (
            640,
            480,
            [0.0, 440.0, 30.0, 480.0],
            [0.0, 435.0, 35.0, 480.0],
        ),
        (
            50,
            80,
            [10.0, 60.0, 40.0, 80.0],
            [10.0 - r13, 60.0 - r13, 40.0 + r13, 80.0],
        ),
        (12, 12, [3.0, 4.0, 9.0, 12.0], [2.0, 3.0, 10.0, 12.0]),
    ];
    let mut worst = 0.0f64;
    for (i, (w, h, b, want)) in table.iter().enumerate() {
        let got: [f64; 4] = enlarge_box(&BBox::new(b[0], b[1], b[2], b[3]), *h, *w).into();
        for k in 0..4 {
            let err = (got[k] - want[k]).abs();
            worst = worst.max(err);
            ensure!(
                err <= 1e-12,
                "case {i}: {b:?} in {w}x{h} -> {got:?}, expected {want:?}"
            );
        }
    }
    Ok(format!("20 cases, max error {worst:.1e} <= 1e-12"))
}

// ---------------------------------------------------------------- 5

fn union_vs_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = |rng: &mut ChaCha8Rng, lo: u32, hi: u32| rng.gen_range(lo..hi) as f64 * 0.25;
    for case in 0..200 {
        let n = rng.gen_range(0..=12);
        let boxes: Vec<BBox> = (0..n)
            .map(|_| {
                let (x0, y0) = (q(&mut rng, 0, 240), q(&mut rng, 0, 240));
                let (w, h) = (q(&mut rng, 1, 80), q(&mut rng, 1, 80));
                BBox::new(x0, y0, (x0 + w).min(64.0), (y0 + h).min(64.0))
            })
            .collect();
        let (fast, grid) = (rect_union_area(&boxes), grid_union_area(&boxes, 0.25));
        ensure!(fast == grid, "case {case}: union {fast} vs grid {grid}");
        let region = {
            let (x0, y0) = (q(&mut rng, 0, 240), q(&mut rng, 0, 240));
            BBox::new(x0, y0, x0 + q(&mut rng, 1, 16), y0 + q(&mut rng, 1, 16))
        };
        let f = coverage_fraction(&region, &boxes).map_err(|e| e.to_string())?;
        ensure!((0.0..=1.0).contains(&f), "case {case}: coverage {f}");
    }
    Ok("200 instances exact; coverage within [0,1]".into())
}

// ---------------------------------------------------------------- 6

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn ap_permutations() -> Outcome {
    let mut cases = 0usize;
    let mut worst = 0.0f64;
    for n in 1..=8 {
        for positives in 0..=n {
            let mut perm: Vec<usize> = (0..n).collect();
            loop {
                // item j is positive when j < positives and scores perm[j]
                let records: Vec<PredictionRecord> = (0..n)
                    .map(|j| {
                        let label = if j < positives { 0 } else { 1 };
                        let mut ranked = vec![(0, perm[j] as f64)];
                        ranked.extend((1..5).map(|c| (c, -(c as f64))));
                        PredictionRecord::new(format!("item{j}"), label, ranked).unwrap()
                    })
                    .collect();
                let set = PredictionSet::new(records, None).unwrap();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| perm[b].cmp(&perm[a]));
                let relevant: Vec<bool> = order.iter().map(|&j| j < positives).collect();
                match (average_precision(&set, 0), brute_force_ap(&relevant)) {
                    (Ok(got), Some(want)) => {
                        let err = (got - want).abs();
                        worst = worst.max(err);
                        ensure!(err <= 1e-12, "n={n} pattern {relevant:?}: {got} vs {want}");
                    }
                    (Err(_), None) => {}
                    (got, want) => return Err(format!("n={n} {relevant:?}: {got:?} vs {want:?}")),
                }
                cases += 1;
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
    }
    Ok(format!("{cases} rankings, max error {worst:.1e} <= 1e-12"))
}

// ---------------------------------------------------------------- 7

fn pearson_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_r, mut worst_p, mut extreme, mut smallest) = (0.0f64, 0.0f64, 0, 0.0f64);
    for case in 0..100 {
        let (slope, noise, n) = match case % 5 {
            // near-deterministic relations push p far below 1e-40
            0 => {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (sign, rng.gen_range(0.02..0.3), rng.gen_range(200..=1000))
            }
            // the strength of relation behind a p around 1e-49 at n = 1000
            1 => (0.44, 0.9, rng.gen_range(5..=1000)),
            _ => (rng.gen_range(-1.0..1.0), 1.0, rng.gen_range(5..=1000)),
        };
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| slope * v + noise * rng.gen_range(-1.0..1.0))
            .collect();
        let got = pearson(&x, &y).map_err(|e| e.to_string())?;
        let want = pearson_oracle::pearson_oracle(&x, &y);
        let dr = (got.r - want.r).abs();
        let rel_p = ((got.ln_p - want.ln_p).exp() - 1.0).abs();
        worst_r = worst_r.max(dr);
        worst_p = worst_p.max(rel_p);
        ensure!(
            dr <= 1e-10,
            "case {case} (n={n}): r {} vs {}",
            got.r,
            want.r
        );
        ensure!(
            rel_p <= 0.05,
            "case {case} (n={n}): ln p {} vs {}",
            got.ln_p,
            want.ln_p
        );
        if want.ln_p < 1e-40f64.ln() {
            extreme += 1;
        }
        smallest = smallest.min(want.ln_p);
    }
    ensure!(extreme >= 10, "only {extreme} cases reached p < 1e-40");
    Ok(format!(
        "max |dr| {worst_r:.1e} <= 1e-10, max rel dp {worst_p:.1e} <= 5%, {extreme} cases p < 1e-40 (min log10 p {:.0})",
        smallest / std::f64::consts::LN_10
    ))
}

// ---------------------------------------------------------------- 8

fn random_predictions(rng: &mut ChaCha8Rng, n: usize, categories: u32) -> PredictionSet {
    let records = (0..n)
        .map(|i| {
            let label = rng.gen_range(0..categories);
            // coarse scores so ties are common
            let ranked = (0..categories)
                .map(|c| (c, rng.gen_range(0..8) as f64 / 8.0))
                .collect();
            PredictionRecord::new(format!("img{i:05}"), label, ranked).unwrap()
        })
        .collect();
    PredictionSet::new(records, None).unwrap()
}

/// Rank of the label after sorting by descending score, ties by category.
fn brute_rank(r: &PredictionRecord) -> usize {
    let mut ranked = r.ranked().to_vec();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
        .iter()
        .position(|(c, _)| *c == r.label)
        .map_or(usize::MAX, |p| p + 1)
}

fn brute_per_category(preds: &PredictionSet, k: usize) -> BTreeMap<u32, f64> {
    let mut counts: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for r in preds.records() {
        let e = counts.entry(r.label).or_default();
        e.1 += 1;
        if brute_rank(r) <= k {
            e.0 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(c, (h, n))| (c, h as f64 / n as f64))
        .collect()
}

fn accuracy_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base = random_predictions(&mut rng, 1000, 12);
    let treat = random_predictions(&mut rng, 1000, 12);
    let mut worst = 0.0f64;
    for preds in [&base, &treat] {
        for k in [1, 5] {
            let hits = preds
                .records()
                .iter()
                .filter(|r| brute_rank(r) <= k)
                .count();
            let overall = top_k_accuracy(preds, k).map_err(|e| e.to_string())?;
            ensure!(
                overall == hits as f64 / 1000.0,
                "top-{k} {overall} vs {hits}/1000"
            );
            let per = per_category_accuracy(preds, k).map_err(|e| e.to_string())?;
            let brute = brute_per_category(preds, k);
            ensure!(
                per == brute,
                "per-category top-{k} differs from brute force"
            );
            let mut weights: BTreeMap<u32, usize> = BTreeMap::new();
            for r in preds.records() {
                *weights.entry(r.label).or_default() += 1;
            }
            let weighted: f64 =
                per.iter().map(|(c, a)| a * weights[c] as f64).sum::<f64>() / 1000.0;
            worst = worst.max((weighted - overall).abs());
            ensure!(
                (weighted - overall).abs() <= 1e-12,
                "weighted mean {weighted} vs {overall}"
            );
        }
        let report = AccuracyReport::from_predictions(preds, false).map_err(|e| e.to_string())?;
        ensure!(report.top1 <= report.top5, "overall top-1 above top-5");
        ensure!(
            report.per_category.values().all(|c| c.top1 <= c.top5),
            "category top-1 above top-5"
        );
    }
    let rb = AccuracyReport::from_predictions(&base, false).map_err(|e| e.to_string())?;
    let rt = AccuracyReport::from_predictions(&treat, false).map_err(|e| e.to_string())?;
    let delta = delta_report(&rb, &rt).map_err(|e| e.to_string())?;
    let (b1, t1) = (brute_per_category(&base, 1), brute_per_category(&treat, 1));
    let (b5, t5) = (brute_per_category(&base, 5), brute_per_category(&treat, 5));
    for (c, d) in &delta.per_category {
        ensure!(
            d.top1 == b1[c] - t1[c] && d.top5 == b5[c] - t5[c],
            "delta for category {c}"
        );
    }
    ensure!(delta.overall_top1 == rb.top1 - rt.top1, "overall delta");
    Ok(format!(
        "1000 records x 2 runs, weighted-mean error {worst:.1e} <= 1e-12"
    ))
}

// ---------------------------------------------------------------- 9

fn hit(golds: &[usize]) -> Vec<HitImage> {
    (0..HIT_SIZE)
        .map(|i| HitImage {
            image_id: format!("img{i:02}"),
            gold: golds
                .contains(&i)
                .then(|| vec![BBox::new(5.0, 5.0, 25.0, 30.0)]),
        })
        .collect()
}

fn qc_session() -> Outcome {
    let right = [BBox::new(5.0, 5.0, 25.0, 30.0)];
    let wrong = [BBox::new(50.0, 50.0, 60.0, 60.0)];
    let mut s = QcSession::new(hit(&[7, 20, 41])).map_err(|e| e.to_string())?;
    for _ in 0..7 {
        ensure!(
            s.step(&[]).unwrap() == StepOutcome::Advanced,
            "plain image did not advance"
        );
    }
    let first = s.step(&wrong).unwrap();
    ensure!(
        first == StepOutcome::Mistake { lives_left: 1 },
        "first mistake gave {first:?}"
    );
    ensure!(
        (s.index(), s.lives()) == (7, 1),
        "after first mistake at {} with {} lives",
        s.index(),
        s.lives()
    );
    let second = s.step(&wrong).unwrap();
    ensure!(
        second == StepOutcome::Restarted,
        "second mistake gave {second:?}"
    );
    ensure!(
        (s.index(), s.lives(), s.restarts()) == (0, STARTING_LIVES, 1),
        "restart state wrong"
    );
    let mut last = StepOutcome::Advanced;
    for i in 0..HIT_SIZE {
        let gold = s.current().unwrap().gold.is_some();
        last = s.step(if gold { &right } else { &[] }).unwrap();
        ensure!(
            i == HIT_SIZE - 1 || !s.is_completed(),
            "completed early at {i}"
        );
    }
    ensure!(
        last == StepOutcome::Completed && s.is_completed(),
        "clean pass did not complete"
    );
    ensure!(
        s.restarts() == 1 && s.lives() == 2,
        "final state restarts {} lives {}",
        s.restarts(),
        s.lives()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total_restarts = 0;
    for seq in 0..1000 {
        let mut golds: Vec<usize> = Vec::new();
        while golds.len() < 3 {
            let g = rng.gen_range(0..HIT_SIZE);
            if !golds.contains(&g) {
                golds.push(g);
            }
        }
        let mut s = QcSession::new(hit(&golds)).unwrap();
        let p_wrong = rng.gen_range(0.0..0.9);
        let (mut lives, mut exhausted) = (STARTING_LIVES, 0);
        for _ in 0..rng.gen_range(1..400) {
            let Some(cur) = s.current() else { break };
            let gold = cur.gold.is_some();
            let err = rng.gen_bool(p_wrong);
            s.step(if err { &wrong } else { &right }).unwrap();
            if gold && err {
                lives -= 1;
                if lives == 0 {
                    exhausted += 1;
                    lives = STARTING_LIVES;
                }
            }
        }
        let logged = s
            .events()
            .iter()
            .filter(|e| matches!(e, SessionEvent::Restarted { .. }))
            .count();
        ensure!(
            s.restarts() == exhausted && logged == exhausted && s.lives() == lives,
            "sequence {seq}: restarts {} logged {logged} vs exhaustions {exhausted}",
            s.restarts()
        );
        total_restarts += exhausted;
    }
    Ok(format!(
        "scripted scenario ok; 1000 fuzzed sequences, {total_restarts} restarts all matched"
    ))
}

// ---------------------------------------------------------------- 10

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for jobs in ["1", "8"] {
        let out = tmp.path().join(format!("jobs{jobs}"));
        let report = tmp.path().join(format!("report{jobs}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_obscura"))
            .args(["blur", "--png", "--jobs", jobs])
            .arg("--annotations")
            .arg(toy.join("annotations.jsonl"))
            .arg("--images")
            .arg(&toy)
            .arg("--out")
            .arg(&out)
            .arg("--report")
            .arg(&report)
            .status()
            .map_err(|e| e.to_string())?;
        ensure!(
            status.code() == Some(0),
            "--jobs {jobs} exited with {status}"
        );
        outputs.push((
            files_under(&out),
            fs::read(&report).map_err(|e| e.to_string())?,
        ));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure!(a.0.len() == 20, "expected 20 outputs, got {}", a.0.len());
    ensure!(
        a.0.keys()
            .all(|p| p.extension().is_some_and(|e| e == "png")),
        "non-PNG output"
    );
    ensure!(
        a.0 == b.0,
        "image bytes differ between --jobs 1 and --jobs 8"
    );
    ensure!(a.1 == b.1, "reports differ between --jobs 1 and --jobs 8");
    Ok("20 PNGs and report byte-identical across --jobs 1/8".into())
}
