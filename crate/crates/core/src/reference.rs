//! Slow, direct reference implementations used as oracles for the fast
//! paths, plus the embedded self-check suite built on them.
//!
//! Nothing here shares code with the production kernels: the union area is
//! counted on a grid, convolution is done with the full 2-D kernel, and AP is
//! recomputed from scratch for every prefix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annotations::{BBox, PredictionRecord, PredictionSet};
use crate::eval::average_precision;
use crate::obfuscate::blur_faces;
use crate::raster::{gaussian_blur, Buffer, ImageBuffer};
use crate::stats::rect_union_area;

/// Union area by counting `cell × cell` grid cells whose centers are covered.
/// Exact when every coordinate is a multiple of `cell`.
pub fn grid_union_area(boxes: &[BBox], cell: f64) -> f64 {
    if boxes.is_empty() {
        return 0.0;
    }
    let lo_x = boxes.iter().map(|b| b.x0).fold(f64::INFINITY, f64::min);
    let lo_y = boxes.iter().map(|b| b.y0).fold(f64::INFINITY, f64::min);
    let hi_x = boxes.iter().map(|b| b.x1).fold(f64::NEG_INFINITY, f64::max);
    let hi_y = boxes.iter().map(|b| b.y1).fold(f64::NEG_INFINITY, f64::max);
    let nx = ((hi_x - lo_x) / cell).round() as usize;
    let ny = ((hi_y - lo_y) / cell).round() as usize;
    let mut count = 0usize;
    for iy in 0..ny {
        let cy = lo_y + (iy as f64 + 0.5) * cell;
        for ix in 0..nx {
            let cx = lo_x + (ix as f64 + 0.5) * cell;
            if boxes
                .iter()
                .any(|b| cx > b.x0 && cx < b.x1 && cy > b.y0 && cy < b.y1)
            {
                count += 1;
            }
        }
    }
    count as f64 * cell * cell
}

fn direct_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|k| (-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Direct 2-D convolution with the outer-product kernel and replicated borders.
pub fn direct_gaussian_blur<const C: usize>(buf: &Buffer<C>, sigma: f64) -> Vec<f64> {
    let taps = direct_taps(sigma);
    let r = (taps.len() / 2) as i64;
    let (w, h) = (buf.width() as i64, buf.height() as i64);
    let mut out = vec![0.0; buf.data().len()];
    for i in 0..h {
        for j in 0..w {
            for c in 0..C {
                let mut acc = 0.0;
                for a in -r..=r {
                    let y = (i + a).clamp(0, h - 1) as usize;
                    for b in -r..=r {
                        let x = (j + b).clamp(0, w - 1) as usize;
                        acc += taps[(a + r) as usize]
                            * taps[(b + r) as usize]
                            * buf.data()[(y * w as usize + x) * C + c];
                    }
                }
                out[((i * w + j) as usize) * C + c] = acc;
            }
        }
    }
    out
}

/// The whole feathered-blur pipeline spelled out with naive pieces.
pub fn naive_blur_faces(image: &ImageBuffer, faces: &[BBox]) -> Vec<f64> {
    if faces.is_empty() {
        return image.data().to_vec();
    }
    let (w, h) = (image.width(), image.height());
    let enlarged: Vec<[f64; 4]> = faces
        .iter()
        .map(|f| {
            let d = ((f.x1 - f.x0).powi(2) + (f.y1 - f.y0).powi(2)).sqrt();
            [
                (f.x0 - d / 10.0).max(0.0),
                (f.y0 - d / 10.0).max(0.0),
                (f.x1 + d / 10.0).min(w as f64),
                (f.y1 + d / 10.0).min(h as f64),
            ]
        })
        .collect();
    let d_max = faces
        .iter()
        .map(|f| ((f.x1 - f.x0).powi(2) + (f.y1 - f.y0).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let sigma = d_max / 10.0;
    let mut mask = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            let (cx, cy) = (j as f64 + 0.5, i as f64 + 0.5);
            let inside = enlarged
                .iter()
                .any(|e| cx >= e[0] && cx < e[2] && cy >= e[1] && cy < e[3]);
            mask.push(if inside { 1.0 } else { 0.0 });
        }
    }
    let mask = Buffer::<1>::new(w, h, mask).expect("mask values are 0 or 1");
    let mask_blurred = direct_gaussian_blur(&mask, sigma);
    let image_blurred = direct_gaussian_blur(image, sigma);
    image
        .data()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let m = mask_blurred[k / 3];
            m * image_blurred[k] + (1.0 - m) * v
        })
        .collect()
}

/// AP from a relevance list already in rank order: for every prefix ending on
/// a positive, count positives in the prefix from scratch.
pub fn brute_force_ap(relevant_in_rank_order: &[bool]) -> Option<f64> {
    let positives = relevant_in_rank_order.iter().filter(|r| **r).count();
    if positives == 0 {
        return None;
    }
    let mut total = 0.0;
    for end in 1..=relevant_in_rank_order.len() {
        if relevant_in_rank_order[end - 1] {
            let hits = relevant_in_rank_order[..end].iter().filter(|r| **r).count();
            total += hits as f64 / end as f64;
        }
    }
    Some(total / positives as f64)
}

/// Prediction set whose scores for category 0 rank the records exactly in
/// `relevant` order; relevant records carry label 0.
pub fn ranked_prediction_set(relevant: &[bool]) -> PredictionSet {
    let n = relevant.len();
    let records = relevant
        .iter()
        .enumerate()
        .map(|(i, rel)| {
            let score = (n - i) as f64;
            let ranked = vec![(0, score), (1, 0.0), (2, -1.0), (3, -2.0), (4, -3.0)];
            let label = if *rel { 0 } else { 1 };
            PredictionRecord::new(format!("img{i:04}"), label, ranked).expect("valid record")
        })
        .collect();
    PredictionSet::new(records, None).expect("unique ids")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn lattice_box<R: Rng>(rng: &mut R, extent: u32) -> BBox {
    let q = |rng: &mut R| f64::from(rng.gen_range(0..=extent * 4)) / 4.0;
    loop {
        let (a, b, c, d) = (q(rng), q(rng), q(rng), q(rng));
        let bx = BBox::new(a.min(c), b.min(d), a.max(c), b.max(d));
        if !bx.is_degenerate() {
            return bx;
        }
    }
}

fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::new(w, h, (0..w * h * 3).map(|_| rng.gen::<f64>()).collect())
        .expect("values in [0, 1)")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs every oracle comparison on seeded random inputs.
pub fn run_selfcheck(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();

    let mut err = 0.0f64;
    let cases = 60;
    for _ in 0..cases {
        let n = rng.gen_range(0..=10);
        let boxes: Vec<BBox> = (0..n).map(|_| lattice_box(&mut rng, 32)).collect();
        err = err.max((rect_union_area(&boxes) - grid_union_area(&boxes, 0.25)).abs());
    }
    results.push(CheckResult {
        name: "union_area_vs_grid_count",
        cases,
        max_error: err,
        tolerance: 0.0,
        passed: err == 0.0,
    });

    let mut err = 0.0f64;
    let sigmas = [0.5, 1.0, 3.0, 7.0];
    for &sigma in &sigmas {
        let img = random_image(&mut rng, 24, 20);
        let fast = gaussian_blur(&img, sigma).expect("positive sigma");
        err = err.max(max_abs_diff(
            fast.data(),
            &direct_gaussian_blur(&img, sigma),
        ));
    }
    results.push(CheckResult {
        name: "separable_blur_vs_direct_convolution",
        cases: sigmas.len(),
        max_error: err,
        tolerance: 1e-9,
        passed: err <= 1e-9,
    });

    let mut err = 0.0f64;
    let cases = 4;
    for _ in 0..cases {
        let img = random_image(&mut rng, 32, 32);
        let faces: Vec<BBox> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let x = rng.gen_range(0.0..24.0);
                let y = rng.gen_range(0.0..24.0);
                BBox::new(
                    x,
                    y,
                    x + rng.gen_range(2.0..8.0),
                    y + rng.gen_range(2.0..8.0),
                )
            })
            .collect();
        let fast = blur_faces(&img, &faces).expect("valid inputs");
        err = err.max(max_abs_diff(fast.data(), &naive_blur_faces(&img, &faces)));
    }
    results.push(CheckResult {
        name: "blur_pipeline_vs_naive_pipeline",
        cases,
        max_error: err,
        tolerance: 1e-9,
        passed: err <= 1e-9,
    });

    let mut err = 0.0f64;
    let mut cases = 0;
    for n in 1..=6usize {
        for pattern in 1u32..(1 << n) {
            let relevant: Vec<bool> = (0..n).map(|i| pattern >> i & 1 == 1).collect();
            let fast = average_precision(&ranked_prediction_set(&relevant), 0)
                .expect("pattern has a positive");
            let slow = brute_force_ap(&relevant).expect("pattern has a positive");
            err = err.max((fast - slow).abs());
            cases += 1;
        }
    }
    results.push(CheckResult {
        name: "average_precision_vs_brute_force",
        cases,
        max_error: err,
        tolerance: 1e-12,
        passed: err <= 1e-12,
    });

    results
}
