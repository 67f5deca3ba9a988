use serde::{Deserialize, Serialize};

/// Axis-aligned box in continuous pixel coordinates.
///
/// The origin is the top-left corner of the image, x grows rightward and y
/// downward. A box covers the half-open region `[x0, x1) × [y0, y1)`, so a
/// pixel `(row i, col j)` belongs to it when its center `(j + 0.5, i + 0.5)`
/// does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for BBox {
    fn from([x0, y0, x1, y1]: [f64; 4]) -> Self {
        BBox { x0, y0, x1, y1 }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

/// Outcome of fitting a raw box to an image frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fitted {
    Kept(BBox),
    /// Zero or negative width or height.
    Degenerate,
    /// No overlap with the frame at all.
    Outside,
    NonFinite,
}

impl BBox {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Length of the diagonal.
    pub fn diagonal(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.y0.is_finite() && self.x1.is_finite() && self.y1.is_finite()
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x0 < self.x1 && self.y0 < self.y1)
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (!b.is_degenerate()).then_some(b)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.area())
    }

    /// Half-open point membership.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn contains(&self, other: &BBox) -> bool {
        other.x0 >= self.x0 && other.y0 >= self.y0 && other.x1 <= self.x1 && other.y1 <= self.y1
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    /// Clamps x into `[0, width]` and y into `[0, height]`.
    pub fn clamp(&self, width: f64, height: f64) -> BBox {
        // `+ 0.0` folds a negative zero into positive zero so output formatting is canonical.
        BBox {
            x0: self.x0.clamp(0.0, width) + 0.0,
            y0: self.y0.clamp(0.0, height) + 0.0,
            x1: self.x1.clamp(0.0, width) + 0.0,
            y1: self.y1.clamp(0.0, height) + 0.0,
        }
    }

    /// Applies the load-time policy: degenerate boxes are reported as such,
    /// boxes with no overlap with the frame are rejected, the rest are clamped.
    pub fn fit(&self, width: u32, height: u32) -> Fitted {
        if !self.is_finite() {
            return Fitted::NonFinite;
        }
        if self.is_degenerate() {
            return Fitted::Degenerate;
        }
        let (w, h) = (f64::from(width), f64::from(height));
        if self.x1 <= 0.0 || self.y1 <= 0.0 || self.x0 >= w || self.y0 >= h {
            return Fitted::Outside;
        }
        Fitted::Kept(self.clamp(w, h))
    }
}
