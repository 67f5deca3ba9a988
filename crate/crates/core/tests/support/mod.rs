#![allow(dead_code)]

pub mod pearson_oracle;

use obscura_core::{BBox, ImageBuffer};
use proptest::prelude::*;

/// Non-degenerate box inside a `w × h` frame.
pub fn bbox_in(w: f64, h: f64) -> impl Strategy<Value = BBox> {
    (0.0..w - 1.0, 0.0..h - 1.0, 0.5..w, 0.5..h)
        .prop_map(move |(x0, y0, bw, bh)| BBox::new(x0, y0, (x0 + bw).min(w), (y0 + bh).min(h)))
}

/// Box with corners on an integer grid, possibly partly outside `[0, n]²`.
pub fn grid_box(n: i32) -> impl Strategy<Value = BBox> {
    (-2..n, -2..n, 1..n / 2, 1..n / 2)
        .prop_map(|(x, y, w, h)| BBox::new(x as f64, y as f64, (x + w) as f64, (y + h) as f64))
}

pub fn image(w: usize, h: usize) -> impl Strategy<Value = ImageBuffer> {
    proptest::collection::vec(0.0..=1.0f64, w * h * 3)
        .prop_map(move |data| ImageBuffer::new(w, h, data).unwrap())
}
