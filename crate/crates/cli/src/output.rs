use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use obscura_core::CategoryId;
use serde::Serialize;
use serde_json::{Number, Value};

/// Serializes report rows, rounding floats to 6 significant digits unless
/// `precise` is set.
#[derive(Debug, Clone, Copy)]
pub struct Writer {
    pub precise: bool,
}

impl Writer {
    pub fn value<T: Serialize>(&self, row: &T) -> Result<Value> {
        let v = serde_json::to_value(row).context("serializing report")?;
        Ok(if self.precise { v } else { round_value(v) })
    }

    pub fn line<T: Serialize>(&self, row: &T) -> Result<String> {
        let mut s = serde_json::to_string(&self.value(row)?)?;
        s.push('\n');
        Ok(s)
    }

    /// One report line with an added `kind` field naming the row type.
    pub fn tagged<T: Serialize>(&self, kind: &str, row: &T) -> Result<String> {
        let mut v = self.value(row)?;
        match v.as_object_mut() {
            Some(map) => {
                map.insert("kind".into(), Value::String(kind.into()));
            }
            None => bail!("report row for {kind} is not an object"),
        }
        let mut s = serde_json::to_string(&v)?;
        s.push('\n');
        Ok(s)
    }

    pub fn lines<T: Serialize>(&self, rows: impl IntoIterator<Item = T>) -> Result<String> {
        rows.into_iter().map(|r| self.line(&r)).collect()
    }

    pub fn num(&self, v: f64) -> String {
        let v = if self.precise { v } else { round_sig(v) };
        match Number::from_f64(v) {
            Some(n) => n.to_string(),
            None => "nan".into(),
        }
    }

    /// Two-column plot table with a commented header.
    pub fn table(
        &self,
        header: (&str, &str),
        rows: impl IntoIterator<Item = (String, f64)>,
    ) -> String {
        let mut out = format!("# {}\t{}\n", header.0, header.1);
        for (k, v) in rows {
            out.push_str(&k);
            out.push('\t');
            out.push_str(&self.num(v));
            out.push('\n');
        }
        out
    }
}

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().unwrap_or(f64::NAN);
            Number::from_f64(round_sig(f)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Reads a `category<TAB>value` table. Blank lines and `#` comments are
/// skipped; extra columns are ignored.
pub fn read_table(path: &Path) -> Result<BTreeMap<CategoryId, f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(c), Some(v)) = (cols.next(), cols.next()) else {
            bail!("{}:{}: expected category<TAB>value", path.display(), i + 1);
        };
        let c: CategoryId = c
            .trim()
            .parse()
            .with_context(|| format!("{}:{}: bad category {c:?}", path.display(), i + 1))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("{}:{}: bad value {v:?}", path.display(), i + 1))?;
        if !v.is_finite() {
            bail!("{}:{}: value must be finite", path.display(), i + 1);
        }
        if map.insert(c, v).is_some() {
            bail!("{}:{}: category {c} listed twice", path.display(), i + 1);
        }
    }
    Ok(map)
}
