//! Dataset statistics and exact box geometry.

mod union;

use std::collections::BTreeMap;

use serde::Serialize;

pub use union::{coverage_fraction, rect_union_area};

use crate::annotations::{AnnotationSet, BBox, CategoryId, Hierarchy, ImageRecord};
use crate::obfuscate::enlarge_box;

/// Which face boxes count as "blurred area".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlurredRegion {
    /// Boxes after the blur enlargement, the area blurring actually modifies.
    #[default]
    Enlarged,
    Raw,
}

/// Fraction of the image frame covered by the enlarged face boxes.
pub fn blurred_fraction(record: &ImageRecord) -> f64 {
    blurred_fraction_with(record, BlurredRegion::Enlarged)
}

pub fn blurred_fraction_with(record: &ImageRecord, region: BlurredRegion) -> f64 {
    if record.faces.is_empty() {
        return 0.0;
    }
    let (h, w) = (record.height as usize, record.width as usize);
    let boxes: Vec<BBox> = match region {
        BlurredRegion::Enlarged => record.faces.iter().map(|b| enlarge_box(b, h, w)).collect(),
        BlurredRegion::Raw => record.faces.clone(),
    };
    coverage_fraction(&record.frame(), &boxes).expect("validated records have positive size")
}

/// Per-category mean of [`blurred_fraction_with`] over all images.
pub fn category_blurred_fraction(
    set: &AnnotationSet,
    region: BlurredRegion,
) -> BTreeMap<CategoryId, f64> {
    let mut acc: BTreeMap<CategoryId, (f64, usize)> = BTreeMap::new();
    for r in set.records() {
        let e = acc.entry(r.category).or_default();
        e.0 += blurred_fraction_with(r, region);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(c, (sum, n))| (c, sum / n as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryFaceRow {
    pub category: CategoryId,
    pub name: String,
    pub images: usize,
    pub with_faces: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupercategoryRow {
    pub name: String,
    pub categories: usize,
    pub images: usize,
    pub with_faces: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FaceStatsReport {
    pub images: usize,
    pub images_with_faces: usize,
    pub fraction_with_faces: f64,
    /// Sorted by fraction descending, then category index ascending.
    pub categories: Vec<CategoryFaceRow>,
    /// Faces-per-image counts over images with at least one face.
    pub histogram: BTreeMap<usize, usize>,
    /// Sorted by supercategory name.
    pub supercategories: Vec<SupercategoryRow>,
}

pub fn dataset_face_stats(set: &AnnotationSet, hierarchy: &Hierarchy) -> FaceStatsReport {
    let mut per_cat: BTreeMap<CategoryId, (usize, usize)> = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    for r in set.records() {
        let e = per_cat.entry(r.category).or_default();
        e.0 += 1;
        if !r.faces.is_empty() {
            e.1 += 1;
            *histogram.entry(r.faces.len()).or_insert(0) += 1;
        }
    }

    let mut supers: BTreeMap<&str, SupercategoryRow> = BTreeMap::new();
    for (&c, &(images, with_faces)) in &per_cat {
        if let Some(name) = hierarchy.supercategory(c) {
            let row = supers.entry(name).or_insert_with(|| SupercategoryRow {
                name: name.to_string(),
                categories: 0,
                images: 0,
                with_faces: 0,
                fraction: 0.0,
            });
            row.categories += 1;
            row.images += images;
            row.with_faces += with_faces;
        }
    }
    let supercategories = supers
        .into_values()
        .map(|mut row| {
            row.fraction = ratio(row.with_faces, row.images);
            row
        })
        .collect();

    let mut categories: Vec<CategoryFaceRow> = per_cat
        .iter()
        .map(|(&category, &(images, with_faces))| CategoryFaceRow {
            category,
            name: set
                .category_name(category)
                .map_or_else(|| category.to_string(), str::to_string),
            images,
            with_faces,
            fraction: ratio(with_faces, images),
        })
        .collect();
    categories.sort_by(|a, b| {
        b.fraction
            .total_cmp(&a.fraction)
            .then(a.category.cmp(&b.category))
    });

    let images = set.len();
    let images_with_faces = histogram.values().sum();
    FaceStatsReport {
        images,
        images_with_faces,
        fraction_with_faces: ratio(images_with_faces, images),
        categories,
        histogram,
        supercategories,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-category mean fraction of object-box area covered by face boxes.
///
/// An image with several object boxes contributes the mean over its boxes;
/// images without object boxes are left out, and so are categories with none.
pub fn category_overlap(set: &AnnotationSet) -> BTreeMap<CategoryId, f64> {
    let mut acc: BTreeMap<CategoryId, (f64, usize)> = BTreeMap::new();
    for r in set.records() {
        let Some(objects) = r.objects.as_ref().filter(|o| !o.is_empty()) else {
            continue;
        };
        let per_image = objects
            .iter()
            .map(|o| {
                coverage_fraction(o, &r.faces).expect("validated object boxes are non-degenerate")
            })
            .sum::<f64>()
            / objects.len() as f64;
        let e = acc.entry(r.category).or_default();
        e.0 += per_image;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(c, (sum, n))| (c, sum / n as f64))
        .collect()
}
