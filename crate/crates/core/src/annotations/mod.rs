//! Face annotations, category labels, the supercategory hierarchy and
//! classifier predictions, plus their line-delimited file formats.

mod bbox;
mod io;

use std::collections::{BTreeMap, BTreeSet};

pub use bbox::{BBox, Fitted};
pub use io::{
    load_annotations, load_hierarchy, load_predictions, parse_annotations, parse_hierarchy,
    parse_predictions, save_annotations, save_predictions, write_annotations, write_predictions,
    LoadedAnnotations,
};

use crate::error::{Error, Result};

/// Upper bound on faces per image inherited from the upstream detector.
pub const MAX_FACES_PER_IMAGE: usize = 100;

/// Minimum ranked entries per prediction; the top-5 metric needs five.
pub const MIN_RANKED: usize = 5;

pub type CategoryId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub image_id: String,
    /// Path of the image file relative to an image root. Defaults to `image_id`.
    pub file: Option<String>,
    pub width: u32,
    pub height: u32,
    pub category: CategoryId,
    pub faces: Vec<BBox>,
    /// Object boxes from a localization ground truth, when available.
    pub objects: Option<Vec<BBox>>,
}

impl ImageRecord {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32, category: CategoryId) -> Self {
        ImageRecord {
            image_id: image_id.into(),
            file: None,
            width,
            height,
            category,
            faces: Vec::new(),
            objects: None,
        }
    }

    pub fn with_faces(mut self, faces: Vec<BBox>) -> Self {
        self.faces = faces;
        self
    }

    pub fn with_objects(mut self, objects: Vec<BBox>) -> Self {
        self.objects = Some(objects);
        self
    }

    pub fn file_path(&self) -> &str {
        self.file.as_deref().unwrap_or(&self.image_id)
    }

    pub fn frame(&self) -> BBox {
        BBox::new(0.0, 0.0, f64::from(self.width), f64::from(self.height))
    }

    /// Clamps every box to the frame and drops degenerate ones.
    ///
    /// Returns the number of dropped boxes. Boxes that miss the frame entirely
    /// or contain non-finite coordinates are errors.
    pub fn normalize(&mut self) -> Result<usize> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Validation(format!(
                "image {:?} has zero size {}x{}",
                self.image_id, self.width, self.height
            )));
        }
        let mut dropped = fit_all(&mut self.faces, self.width, self.height, &self.image_id)?;
        if let Some(objects) = self.objects.as_mut() {
            dropped += fit_all(objects, self.width, self.height, &self.image_id)?;
        }
        if self.faces.len() > MAX_FACES_PER_IMAGE {
            return Err(Error::Validation(format!(
                "image {:?} has {} faces, more than the cap of {MAX_FACES_PER_IMAGE}",
                self.image_id,
                self.faces.len()
            )));
        }
        Ok(dropped)
    }
}

fn fit_all(boxes: &mut Vec<BBox>, width: u32, height: u32, image_id: &str) -> Result<usize> {
    let mut dropped = 0;
    let mut kept = Vec::with_capacity(boxes.len());
    for b in boxes.iter() {
        match b.fit(width, height) {
            Fitted::Kept(b) => kept.push(b),
            Fitted::Degenerate => dropped += 1,
            Fitted::Outside => {
                return Err(Error::Validation(format!(
                    "image {image_id:?}: box {:?} lies entirely outside the {width}x{height} frame",
                    <[f64; 4]>::from(*b)
                )))
            }
            Fitted::NonFinite => {
                return Err(Error::Validation(format!(
                    "image {image_id:?}: box has non-finite coordinates"
                )))
            }
        }
    }
    *boxes = kept;
    Ok(dropped)
}

/// A validated collection of image records, kept sorted by `image_id`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    records: Vec<ImageRecord>,
    categories: BTreeMap<CategoryId, String>,
}

impl AnnotationSet {
    /// Builds a set from already-normalized records.
    ///
    /// Categories referenced by records but missing from `categories` are
    /// registered under their decimal index.
    pub fn new(
        mut records: Vec<ImageRecord>,
        mut categories: BTreeMap<CategoryId, String>,
    ) -> Result<Self> {
        records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        if let Some(w) = records.windows(2).find(|w| w[0].image_id == w[1].image_id) {
            return Err(Error::Validation(format!(
                "duplicate image_id {:?}",
                w[0].image_id
            )));
        }
        for r in &records {
            if r.width == 0 || r.height == 0 {
                return Err(Error::Validation(format!(
                    "image {:?} has zero size",
                    r.image_id
                )));
            }
            let frame = r.frame();
            let all = r.faces.iter().chain(r.objects.iter().flatten());
            if let Some(b) = all
                .into_iter()
                .find(|b| b.is_degenerate() || !frame.contains(b))
            {
                return Err(Error::Validation(format!(
                    "image {:?}: box {:?} is not a valid box inside the frame",
                    r.image_id,
                    <[f64; 4]>::from(*b)
                )));
            }
            if r.faces.len() > MAX_FACES_PER_IMAGE {
                return Err(Error::Validation(format!(
                    "image {:?} exceeds {MAX_FACES_PER_IMAGE} faces",
                    r.image_id
                )));
            }
            categories
                .entry(r.category)
                .or_insert_with(|| r.category.to_string());
        }
        Ok(AnnotationSet {
            records,
            categories,
        })
    }

    pub fn from_records(records: Vec<ImageRecord>) -> Result<Self> {
        Self::new(records, BTreeMap::new())
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ImageRecord> {
        self.records
    }

    pub fn categories(&self) -> &BTreeMap<CategoryId, String> {
        &self.categories
    }

    pub fn category_name(&self, id: CategoryId) -> Option<&str> {
        self.categories.get(&id).map(String::as_str)
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageRecord> {
        self.records
            .binary_search_by(|r| r.image_id.as_str().cmp(image_id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn image_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.image_id.as_str()).collect()
    }
}

/// Flat category → supercategory rollup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hierarchy {
    map: BTreeMap<CategoryId, String>,
}

impl Hierarchy {
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CategoryId, S)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (c, s) in pairs {
            if map.insert(c, s.into()).is_some() {
                return Err(Error::Validation(format!(
                    "category {c} is mapped to more than one supercategory"
                )));
            }
        }
        Ok(Hierarchy { map })
    }

    pub fn supercategory(&self, category: CategoryId) -> Option<&str> {
        self.map.get(&category).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryId, &str)> {
        self.map.iter().map(|(c, s)| (*c, s.as_str()))
    }
}

/// One classifier output: the true label plus categories ranked by score.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub image_id: String,
    pub label: CategoryId,
    ranked: Vec<(CategoryId, f64)>,
}

impl PredictionRecord {
    /// Validates the ranked list and re-sorts it by descending score, ties
    /// broken by ascending category index.
    pub fn new(
        image_id: impl Into<String>,
        label: CategoryId,
        mut ranked: Vec<(CategoryId, f64)>,
    ) -> Result<Self> {
        let image_id = image_id.into();
        if ranked.len() < MIN_RANKED {
            return Err(Error::Validation(format!(
                "prediction {image_id:?} ranks {} categories, at least {MIN_RANKED} required",
                ranked.len()
            )));
        }
        if let Some((c, s)) = ranked.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::Validation(format!(
                "prediction {image_id:?} has non-finite score {s} for category {c}"
            )));
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut seen = BTreeSet::new();
        if let Some((c, _)) = ranked.iter().find(|(c, _)| !seen.insert(*c)) {
            return Err(Error::Validation(format!(
                "prediction {image_id:?} lists category {c} twice"
            )));
        }
        Ok(PredictionRecord {
            image_id,
            label,
            ranked,
        })
    }

    pub fn ranked(&self) -> &[(CategoryId, f64)] {
        &self.ranked
    }

    pub fn score_for(&self, category: CategoryId) -> Option<f64> {
        self.ranked
            .iter()
            .find(|(c, _)| *c == category)
            .map(|(_, s)| *s)
    }

    /// Zero-based rank of the true label, if it was predicted at all.
    pub fn label_rank(&self) -> Option<usize> {
        self.ranked.iter().position(|(c, _)| *c == self.label)
    }

    pub fn hit_at(&self, k: usize) -> bool {
        self.ranked[..k.min(self.ranked.len())]
            .iter()
            .any(|(c, _)| *c == self.label)
    }
}

/// Predictions from one classifier run, sorted by `image_id`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    records: Vec<PredictionRecord>,
    pub seed_id: Option<String>,
}

impl PredictionSet {
    pub fn new(mut records: Vec<PredictionRecord>, seed_id: Option<String>) -> Result<Self> {
        records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        if let Some(w) = records.windows(2).find(|w| w[0].image_id == w[1].image_id) {
            return Err(Error::Validation(format!(
                "duplicate image_id {:?} in predictions",
                w[0].image_id
            )));
        }
        Ok(PredictionSet { records, seed_id })
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
