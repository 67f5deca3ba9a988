//! Face obfuscation and dataset evaluation toolkit.
//!
//! * [`annotations`]: face boxes, labels, hierarchy and prediction files
//! * [`raster`]: pixel buffers, Gaussian blur, masks, compositing, PNG/JPEG
//! * [`obfuscate`]: feathered face blurring and color overlays
//! * [`stats`]: face prevalence, exact union areas, coverage fractions
//! * [`eval`]: accuracy, average precision, correlation, drop curves
//! * [`qc`]: IoU matching, audits, gold-standard sessions, edit merging

pub mod annotations;
pub mod error;
pub mod eval;
pub mod obfuscate;
pub mod qc;
pub mod raster;
pub mod reference;
pub mod stats;

pub use annotations::{
    AnnotationSet, BBox, CategoryId, Hierarchy, ImageRecord, PredictionRecord, PredictionSet,
};
pub use error::{Error, Result};
pub use raster::{ImageBuffer, MaskBuffer};
