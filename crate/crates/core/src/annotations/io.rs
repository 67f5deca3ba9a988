use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use super::{
    AnnotationSet, BBox, CategoryId, Hierarchy, ImageRecord, PredictionRecord, PredictionSet,
};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    image_id: String,
    #[serde(default)]
    file: Option<String>,
    width: u32,
    height: u32,
    category: CategoryId,
    #[serde(default)]
    category_name: Option<String>,
    #[serde(default)]
    faces: Vec<[f64; 4]>,
    #[serde(default)]
    objects: Option<Vec<[f64; 4]>>,
}

/// A score is a JSON number or a string such as `"NaN"`. Non-finite values
/// fail validation.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawScore {
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrediction {
    image_id: String,
    label: CategoryId,
    ranked: Vec<(CategoryId, RawScore)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedAnnotations {
    pub set: AnnotationSet,
    /// Boxes dropped for zero width or height.
    pub dropped_boxes: usize,
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<LoadedAnnotations> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(BufReader::new(file), path)
}

pub fn parse_annotations(reader: impl BufRead, origin: &Path) -> Result<LoadedAnnotations> {
    let mut records = Vec::new();
    let mut categories: BTreeMap<CategoryId, String> = BTreeMap::new();
    let mut dropped_boxes = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        if let Some(name) = raw.category_name {
            match categories.get(&raw.category) {
                Some(prev) if *prev != name => {
                    return Err(Error::Validation(format!(
                        "line {lineno}: category {} named both {prev:?} and {name:?}",
                        raw.category
                    )))
                }
                _ => {
                    categories.insert(raw.category, name);
                }
            }
        }
        let mut record = ImageRecord {
            image_id: raw.image_id,
            file: raw.file,
            width: raw.width,
            height: raw.height,
            category: raw.category,
            faces: raw.faces.into_iter().map(BBox::from).collect(),
            objects: raw.objects.map(|o| o.into_iter().map(BBox::from).collect()),
        };
        dropped_boxes += record.normalize().map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("line {lineno}: {m}")),
            other => other,
        })?;
        records.push(record);
    }
    if dropped_boxes > 0 {
        log::warn!(
            "{}: dropped {dropped_boxes} degenerate box(es)",
            origin.display()
        );
    }
    Ok(LoadedAnnotations {
        set: AnnotationSet::new(records, categories)?,
        dropped_boxes,
    })
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(BufReader::new(file), path)
}

pub fn parse_predictions(reader: impl BufRead, origin: &Path) -> Result<PredictionSet> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPrediction =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        let mut ranked = Vec::with_capacity(raw.ranked.len());
        for (c, s) in raw.ranked {
            let score = match s {
                RawScore::Num(v) => v,
                RawScore::Text(t) => t.trim().parse::<f64>().map_err(|_| {
                    Error::parse(origin, lineno, format!("score {t:?} is not a number"))
                })?,
            };
            ranked.push((c, score));
        }
        let record =
            PredictionRecord::new(raw.image_id, raw.label, ranked).map_err(|e| match e {
                Error::Validation(m) => Error::Validation(format!("line {lineno}: {m}")),
                other => other,
            })?;
        records.push(record);
    }
    PredictionSet::new(records, None)
}

pub fn load_hierarchy(path: impl AsRef<Path>) -> Result<Hierarchy> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_hierarchy(BufReader::new(file), path)
}

pub fn parse_hierarchy(reader: impl BufRead, origin: &Path) -> Result<Hierarchy> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (cat, sup) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, lineno, "expected category<TAB>supercategory"))?;
        let cat: CategoryId = cat
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("bad category index {cat:?}")))?;
        pairs.push((cat, sup.trim().to_string()));
    }
    Hierarchy::from_pairs(pairs)
}

/// Formats a coordinate or score with the shortest round-tripping decimal.
pub(crate) fn fmt_num(v: f64) -> String {
    // Display never uses exponent notation and prints integral values without a fraction.
    format!("{}", v + 0.0)
}

fn push_boxes(out: &mut String, boxes: &[BBox]) {
    out.push('[');
    for (i, b) in boxes.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "[{},{},{},{}]",
            fmt_num(b.x0),
            fmt_num(b.y0),
            fmt_num(b.x1),
            fmt_num(b.y1)
        );
    }
    out.push(']');
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Writes the canonical form: records ordered by `image_id`, fixed key order,
/// shortest round-tripping numbers.
pub fn write_annotations(set: &AnnotationSet, mut w: impl Write) -> std::io::Result<()> {
    let mut line = String::new();
    for r in set.records() {
        line.clear();
        let _ = write!(line, "{{\"image_id\":{}", json_str(&r.image_id));
        if let Some(file) = &r.file {
            let _ = write!(line, ",\"file\":{}", json_str(file));
        }
        let _ = write!(
            line,
            ",\"width\":{},\"height\":{},\"category\":{}",
            r.width, r.height, r.category
        );
        if let Some(name) = set.category_name(r.category) {
            if *name != r.category.to_string() {
                let _ = write!(line, ",\"category_name\":{}", json_str(name));
            }
        }
        line.push_str(",\"faces\":");
        push_boxes(&mut line, &r.faces);
        if let Some(objects) = &r.objects {
            line.push_str(",\"objects\":");
            push_boxes(&mut line, objects);
        }
        line.push_str("}\n");
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_annotations(set: &AnnotationSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_annotations(set, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_predictions(set: &PredictionSet, mut w: impl Write) -> std::io::Result<()> {
    let mut line = String::new();
    for r in set.records() {
        line.clear();
        let _ = write!(
            line,
            "{{\"image_id\":{},\"label\":{},\"ranked\":[",
            json_str(&r.image_id),
            r.label
        );
        for (i, (c, s)) in r.ranked().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "[{c},{}]", fmt_num(*s));
        }
        line.push_str("]}\n");
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_predictions(set: &PredictionSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_predictions(set, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
