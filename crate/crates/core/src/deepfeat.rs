//! Feature tables and their CSV transport.
//!
//! A feature file looks like
//!
//! ```text
//! sample_id,label,f000,f001,...
//! abnormal/a1.png,abnormal,0.125,3.5,...
//! ```
//!
//! UTF-8 with LF line endings and exactly one final LF. Feature columns are
//! `f` plus the zero-based index padded to `max(3, digits(dim - 1))`.
//! Values are plain decimals with at most nine significant digits. Writers
//! sort rows by `sample_id`; readers accept any row order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classifiers::Matrix;
use crate::error::{Error, Result};
use crate::ingestion::{Dataset, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    descriptor: String,
    dim: usize,
    rows: BTreeMap<String, (Label, Vec<f64>)>,
}

impl FeatureTable {
    pub fn new(descriptor: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("feature table needs at least one column".into()));
        }
        Ok(Self {
            descriptor: descriptor.into(),
            dim,
            rows: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, label: Label, values: Vec<f64>) -> Result<()> {
        let id = id.into();
        if values.len() != self.dim {
            return Err(Error::Shape(format!(
                "{id}: {} values for a {}-column table",
                values.len(),
                self.dim
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("{id}: non-finite value {v}")));
        }
        if id.is_empty() || id.contains([',', '\n', '\r']) {
            return Err(Error::Config(format!("sample id `{id}` cannot be stored in CSV")));
        }
        if self.rows.contains_key(&id) {
            return Err(Error::Config(format!("duplicate sample id `{id}`")));
        }
        self.rows.insert(id, (label, values));
        Ok(())
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<(Label, &[f64])> {
        self.rows.get(id).map(|(l, v)| (*l, v.as_slice()))
    }

    /// Rows in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Label, &[f64])> {
        self.rows.iter().map(|(k, (l, v))| (k.as_str(), *l, v.as_slice()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    /// Whole table in id order: ids, feature matrix, stored labels.
    pub fn to_matrix(&self) -> (Vec<String>, Matrix, Vec<Label>) {
        let mut ids = Vec::with_capacity(self.len());
        let mut data = Vec::with_capacity(self.len() * self.dim);
        let mut labels = Vec::with_capacity(self.len());
        for (id, label, values) in self.iter() {
            ids.push(id.to_string());
            labels.push(label);
            data.extend_from_slice(values);
        }
        let m = Matrix::new(ids.len(), self.dim, data).expect("rows share the table width");
        (ids, m, labels)
    }

    pub fn to_csv_string(&self) -> String {
        let width = column_width(self.dim);
        let mut out = String::from("sample_id,label");
        for j in 0..self.dim {
            let _ = write!(out, ",f{j:0width$}");
        }
        out.push('\n');
        for (id, label, values) in self.iter() {
            out.push_str(id);
            out.push(',');
            out.push_str(label.as_str());
            for &v in values {
                out.push(',');
                out.push_str(&format_value(v));
            }
            out.push('\n');
        }
        out
    }
}

fn column_width(dim: usize) -> usize {
    let last = dim.saturating_sub(1);
    last.to_string().len().max(3)
}

/// Rounds to nine significant digits and prints a plain decimal.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        "0".to_string()
    } else {
        format!("{rounded}")
    }
}

/// Descriptor name for a table read from `path`: the file stem.
pub fn descriptor_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureTable> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        line: 1,
        message: "not valid UTF-8".into(),
    })?;
    parse_feature_csv(&text, path, &descriptor_from_path(path))
}

/// Parses CSV text; `path` only labels errors.
pub fn parse_feature_csv(text: &str, path: &Path, descriptor: &str) -> Result<FeatureTable> {
    let err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    if header.is_empty() {
        return Err(err(1, "empty file".into()));
    }
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[0] != "sample_id" || columns[1] != "label" {
        return Err(err(
            1,
            "header must be `sample_id,label,f000,...` with at least one feature column".into(),
        ));
    }
    let dim = columns.len() - 2;
    let width = column_width(dim);
    for (j, name) in columns[2..].iter().enumerate() {
        let want = format!("f{j:0width$}");
        if *name != want {
            return Err(err(1, format!("feature column {} is `{name}`, expected `{want}`", j + 1)));
        }
    }
    let mut table = FeatureTable::new(descriptor, dim)?;
    for (n, line) in lines {
        if line.contains('\r') {
            return Err(err(n, "CR found; line endings must be LF".into()));
        }
        if line.is_empty() {
            return Err(err(n, "blank line".into()));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(err(n, format!("{} fields, header has {}", fields.len(), dim + 2)));
        }
        let label = match fields[1] {
            "normal" => Label::Normal,
            "abnormal" => Label::Abnormal,
            other => return Err(err(n, format!("label `{other}` is not `normal` or `abnormal`"))),
        };
        let mut values = Vec::with_capacity(dim);
        for (j, f) in fields[2..].iter().enumerate() {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(_) => return Err(err(n, format!("non-finite value `{f}` in column {}", j + 2))),
                Err(_) => return Err(err(n, format!("bad number `{f}` in column {}", j + 2))),
            }
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(err(n, "empty sample id".into()));
        }
        if table.get(id).is_some() {
            return Err(err(n, format!("duplicate sample id `{id}`")));
        }
        table.insert(id, label, values).map_err(|e| err(n, e.to_string()))?;
    }
    Ok(table)
}

/// Writes `bytes` to a sibling temporary file and renames it into place,
/// so `path` is either absent, the old file, or the complete new file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    if let Err(e) = fs::write(&tmp, bytes) {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(&tmp, e));
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn write_feature_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    write_atomic(path, table.to_csv_string().as_bytes())
}

/// Horizontal concatenation in argument order.
pub fn combine(tables: &[&FeatureTable]) -> Result<FeatureTable> {
    if tables.len() < 2 {
        return Err(Error::Config("combine needs at least two tables".into()));
    }
    let all: BTreeSet<&str> = tables.iter().flat_map(|t| t.ids()).collect();
    let missing: Vec<String> = all
        .iter()
        .filter(|id| tables.iter().any(|t| t.get(id).is_none()))
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Alignment { missing });
    }
    let name = tables.iter().map(|t| t.descriptor()).collect::<Vec<_>>().join("+");
    let dim = tables.iter().map(|t| t.dim()).sum();
    let mut out = FeatureTable::new(name, dim)?;
    for id in all {
        let (label, _) = tables[0].get(id).expect("checked above");
        let mut values = Vec::with_capacity(dim);
        for t in tables {
            let (l, v) = t.get(id).expect("checked above");
            if l != label {
                return Err(Error::Config(format!("sample `{id}` has conflicting labels")));
            }
            values.extend_from_slice(v);
        }
        out.insert(id, label, values)?;
    }
    Ok(out)
}

/// Rows in dataset order with the dataset's labels; extra table rows are ignored.
pub fn align_to_dataset(table: &FeatureTable, dataset: &Dataset) -> Result<(Matrix, Vec<Label>)> {
    let missing: Vec<String> = dataset
        .samples()
        .iter()
        .filter(|s| table.get(&s.id).is_none())
        .map(|s| s.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Alignment { missing });
    }
    let mut data = Vec::with_capacity(dataset.len() * table.dim());
    let mut labels = Vec::with_capacity(dataset.len());
    for s in dataset.samples() {
        let (label, values) = table.get(&s.id).expect("checked above");
        if label != s.label {
            return Err(Error::Config(format!(
                "sample `{}` is {} in the dataset but {label} in table `{}`",
                s.id,
                s.label,
                table.descriptor()
            )));
        }
        data.extend_from_slice(values);
        labels.push(s.label);
    }
    Ok((Matrix::new(dataset.len(), table.dim(), data)?, labels))
}
