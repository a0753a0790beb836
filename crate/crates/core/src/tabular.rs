//! Column-oriented table with per-column missing masks and CSV I/O.
//!
//! A [`Frame`] holds numeric, categorical and label columns described by a
//! [`Schema`]. Frames are immutable: every transformation builds a new one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean_std, quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered column list with exactly one label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    columns: Vec<ColumnSpec>,
    label_positive: i64,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    columns: Vec<ColumnSpec>,
    label_positive: i64,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;
    fn try_from(raw: RawSchema) -> Result<Self> {
        Schema::new(raw.columns, raw.label_positive)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            columns: s.columns,
            label_positive: s.label_positive,
        }
    }
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, label_positive: i64) -> Result<Self> {
        let labels = columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(Error::InvalidSchema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.name.trim().is_empty() {
                return Err(Error::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Self {
            columns,
            label_positive,
        })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn label_positive(&self) -> i64 {
        self.label_positive
    }

    pub fn label_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::Label)
            .expect("schema invariant: one label column")
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label_index()].name
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Names of the non-label columns, in schema order.
    pub fn predictor_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.kind != ColumnKind::Label)
            .map(|c| c.name.clone())
            .collect()
    }

    fn with_kind(&self, index: usize, kind: ColumnKind) -> Schema {
        let mut s = self.clone();
        s.columns[index].kind = kind;
        s
    }

    fn with_label_positive(&self, label_positive: i64) -> Schema {
        let mut s = self.clone();
        s.label_positive = label_positive;
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    /// Codes index into `levels`, which is kept sorted and deduplicated.
    Categorical { codes: Vec<u32>, levels: Vec<String> },
    Label(Vec<i64>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Label(v) => v.len(),
        }
    }

    fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
            ColumnData::Label(_) => ColumnKind::Label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub data: ColumnData,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn numeric(values: Vec<f64>) -> Self {
        let missing = vec![false; values.len()];
        Self {
            data: ColumnData::Numeric(values),
            missing,
        }
    }

    pub fn numeric_with_mask(values: Vec<f64>, missing: Vec<bool>) -> Self {
        Self {
            data: ColumnData::Numeric(values),
            missing,
        }
    }

    pub fn label(values: Vec<i64>) -> Self {
        let missing = vec![false; values.len()];
        Self {
            data: ColumnData::Label(values),
            missing,
        }
    }

    /// Builds a categorical column from optional text cells.
    pub fn categorical<S: AsRef<str>>(cells: &[Option<S>]) -> Self {
        let levels: Vec<String> = cells
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lookup: HashMap<&str, u32> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let mut codes = Vec::with_capacity(cells.len());
        let mut missing = Vec::with_capacity(cells.len());
        for cell in cells {
            match cell {
                Some(s) => {
                    codes.push(lookup[s.as_ref()]);
                    missing.push(false);
                }
                None => {
                    codes.push(0);
                    missing.push(true);
                }
            }
        }
        Self {
            data: ColumnData::Categorical { codes, levels },
            missing,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    /// Text of a categorical cell, `None` when missing or not categorical.
    pub fn text(&self, row: usize) -> Option<&str> {
        match &self.data {
            ColumnData::Categorical { codes, levels } if !self.missing[row] => {
                Some(levels[codes[row] as usize].as_str())
            }
            _ => None,
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        let missing = rows.iter().map(|&r| self.missing[r]).collect();
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                levels: levels.clone(),
            },
            ColumnData::Label(v) => ColumnData::Label(rows.iter().map(|&r| v[r]).collect()),
        };
        Column { data, missing }
    }
}

/// Immutable column-oriented table.
#[derive(Debug, Clone)]
pub struct Frame {
    schema: Schema,
    n_rows: usize,
    columns: Vec<Column>,
    index: HashMap<String, usize>,
}

impl Frame {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != schema.columns().len() {
            return Err(Error::InvalidSchema(format!(
                "{} columns supplied for a {}-column schema",
                columns.len(),
                schema.columns().len()
            )));
        }
        let n_rows = columns.first().map_or(0, Column::len);
        for (spec, col) in schema.columns().iter().zip(&columns) {
            if col.len() != n_rows || col.data.len() != n_rows {
                return Err(Error::InvalidSchema(format!(
                    "column `{}` has length {}, expected {n_rows}",
                    spec.name,
                    col.len()
                )));
            }
            if col.data.kind() != spec.kind {
                return Err(Error::InvalidSchema(format!(
                    "column `{}` data does not match kind {:?}",
                    spec.name, spec.kind
                )));
            }
        }
        let index = schema
            .columns()
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), i))
            .collect();
        Ok(Self {
            schema,
            n_rows,
            columns,
            index,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.index
            .get(name)
            .map(|&i| &self.columns[i])
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Values and missing mask of a numeric column.
    pub fn numeric(&self, name: &str) -> Result<(&[f64], &[bool])> {
        let col = self.column(name)?;
        match &col.data {
            ColumnData::Numeric(v) => Ok((v, &col.missing)),
            _ => Err(Error::NonNumericColumn(name.to_string())),
        }
    }

    /// Non-missing cells of a numeric column.
    pub fn present_values(&self, name: &str) -> Result<Vec<f64>> {
        let (v, m) = self.numeric(name)?;
        Ok(v.iter().zip(m).filter(|(_, &m)| !m).map(|(&x, _)| x).collect())
    }

    pub fn label_column(&self) -> &Column {
        &self.columns[self.schema.label_index()]
    }

    /// Raw label values and their missing mask.
    pub fn labels(&self) -> (&[i64], &[bool]) {
        let col = self.label_column();
        match &col.data {
            ColumnData::Label(v) => (v, &col.missing),
            _ => unreachable!("label column holds label data"),
        }
    }

    /// Labels as binary class indices. Fails on missing or non-binary values.
    pub fn binary_labels(&self) -> Result<Vec<u8>> {
        let (values, missing) = self.labels();
        values
            .iter()
            .zip(missing)
            .map(|(&v, &m)| {
                if m {
                    Err(Error::HasMissing(self.schema.label_name().to_string()))
                } else if v == 0 || v == 1 {
                    Ok(v as u8)
                } else {
                    Err(Error::NonBinary(v))
                }
            })
            .collect()
    }

    /// Row-major feature matrix over the named numeric columns.
    pub fn feature_matrix(&self, names: &[String]) -> Result<crate::learners::Matrix> {
        let cols: Vec<&[f64]> = names
            .iter()
            .map(|n| {
                let (v, m) = self.numeric(n)?;
                if m.iter().any(|&x| x) {
                    return Err(Error::HasMissing(n.clone()));
                }
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(self.n_rows * names.len());
        for r in 0..self.n_rows {
            data.extend(cols.iter().map(|c| c[r]));
        }
        Ok(crate::learners::Matrix::new(self.n_rows, names.len(), data))
    }

    /// Frame made of the given rows, in the given order.
    pub fn take(&self, rows: &[usize]) -> Frame {
        let columns = self.columns.iter().map(|c| c.take(rows)).collect();
        Frame {
            schema: self.schema.clone(),
            n_rows: rows.len(),
            columns,
            index: self.index.clone(),
        }
    }

    /// Copy with one column replaced; the column kind follows the new data.
    pub fn with_column(&self, name: &str, column: Column) -> Result<Frame> {
        let i = self.column_index(name)?;
        if column.len() != self.n_rows {
            return Err(Error::LengthMismatch(column.len(), self.n_rows));
        }
        let schema = self.schema.with_kind(i, column.data.kind());
        let mut columns = self.columns.clone();
        columns[i] = column;
        Frame::new(schema, columns)
    }

    pub(crate) fn with_label_positive(&self, label_positive: i64) -> Frame {
        Frame {
            schema: self.schema.with_label_positive(label_positive),
            ..self.clone()
        }
    }

    /// Row counts per label value (missing labels skipped).
    pub fn class_counts(&self) -> BTreeMap<i64, usize> {
        let (values, missing) = self.labels();
        let mut counts = BTreeMap::new();
        for (&v, &m) in values.iter().zip(missing) {
            if !m {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
        counts
    }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub missing_tokens: BTreeSet<String>,
    /// Header text → schema column name.
    pub aliases: BTreeMap<String, String>,
    /// Accept files without the label column (all labels become missing).
    pub label_optional: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing_tokens: ["", "NA", "NaN", "null"].iter().map(|s| s.to_string()).collect(),
            aliases: BTreeMap::new(),
            label_optional: false,
        }
    }
}

/// Trims (including no-break spaces and a BOM), collapses inner whitespace
/// and lowercases, so header variants compare equal.
fn normalize_header(s: &str) -> String {
    s.trim_matches(|c: char| c.is_whitespace() || c == '\u{feff}')
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn decode_field(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        // Latin-1 fallback: every byte maps to the code point of the same value.
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}

pub fn read_csv(path: impl AsRef<Path>, schema: &Schema, options: &CsvOptions) -> Result<Frame> {
    let file = std::fs::File::open(path)?;
    read_csv_from(file, schema, options)
}

pub fn read_csv_from<R: Read>(reader: R, schema: &Schema, options: &CsvOptions) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.byte_records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::EmptyFile),
    };
    let header: Vec<String> = header.iter().map(decode_field).collect();

    let alias: HashMap<String, String> = options
        .aliases
        .iter()
        .map(|(k, v)| (normalize_header(k), v.clone()))
        .collect();
    let resolved: Vec<String> = header
        .iter()
        .map(|h| {
            let key = normalize_header(h);
            alias.get(&key).map_or(key, |target| normalize_header(target))
        })
        .collect();

    let label_idx = schema.label_index();
    let mut positions = Vec::with_capacity(schema.columns().len());
    for (i, spec) in schema.columns().iter().enumerate() {
        let want = normalize_header(&spec.name);
        match resolved.iter().position(|r| *r == want) {
            Some(p) => positions.push(Some(p)),
            None if i == label_idx && options.label_optional => positions.push(None),
            None => return Err(Error::MissingColumn(spec.name.clone())),
        }
    }

    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); schema.columns().len()];
    let mut text: Vec<Vec<Option<String>>> = vec![Vec::new(); schema.columns().len()];
    let mut labels: Vec<i64> = Vec::new();
    let mut masks: Vec<Vec<bool>> = vec![Vec::new(); schema.columns().len()];
    let is_missing = |s: &str| options.missing_tokens.contains(s.trim());

    let mut n_rows = 0;
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.is_empty()) {
            continue; // blank line
        }
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                line,
                expected: header.len(),
                found: rec.len(),
            });
        }
        for (c, spec) in schema.columns().iter().enumerate() {
            let Some(p) = positions[c] else {
                labels.push(0);
                masks[c].push(true);
                continue;
            };
            let cell = decode_field(&rec[p]);
            let cell = cell.trim();
            let missing = is_missing(cell);
            match spec.kind {
                ColumnKind::Numeric => {
                    let parsed = if missing { None } else { cell.parse::<f64>().ok() };
                    numeric[c].push(parsed.unwrap_or(0.0));
                    masks[c].push(parsed.is_none());
                }
                ColumnKind::Categorical => {
                    text[c].push((!missing).then(|| cell.to_string()));
                }
                ColumnKind::Label => {
                    if missing {
                        labels.push(0);
                        masks[c].push(true);
                    } else {
                        let v = parse_label(cell).ok_or_else(|| Error::BadLabel {
                            line,
                            value: cell.to_string(),
                        })?;
                        labels.push(v);
                        masks[c].push(false);
                    }
                }
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::EmptyFile);
    }

    let mut columns = Vec::with_capacity(schema.columns().len());
    let mut labels = Some(labels);
    for (c, spec) in schema.columns().iter().enumerate() {
        let col = match spec.kind {
            ColumnKind::Numeric => {
                Column::numeric_with_mask(std::mem::take(&mut numeric[c]), std::mem::take(&mut masks[c]))
            }
            ColumnKind::Categorical => Column::categorical(&text[c]),
            ColumnKind::Label => Column {
                data: ColumnData::Label(labels.take().unwrap_or_default()),
                missing: std::mem::take(&mut masks[c]),
            },
        };
        columns.push(col);
    }
    Frame::new(schema.clone(), columns)
}

fn parse_label(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    let f = cell.parse::<f64>().ok()?;
    (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
}

pub fn write_csv(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(frame, std::io::BufWriter::new(file))
}

/// Writes the frame with a header row. Floats use the shortest decimal that
/// parses back to the same value; missing cells are empty fields.
pub fn write_csv_to<W: Write>(frame: &Frame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(frame.schema().columns().iter().map(|c| c.name.as_str()))?;
    let mut row: Vec<String> = Vec::with_capacity(frame.columns().len());
    for r in 0..frame.n_rows() {
        row.clear();
        for col in frame.columns() {
            if col.missing[r] {
                row.push(String::new());
                continue;
            }
            row.push(match &col.data {
                ColumnData::Numeric(v) => format!("{}", v[r]),
                ColumnData::Categorical { codes, levels } => levels[codes[r] as usize].clone(),
                ColumnData::Label(v) => v[r].to_string(),
            });
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

/// Statistics over the non-missing cells of a numeric column. Undefined
/// values (empty column) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub count: usize,
    pub missing: usize,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
}

pub fn column_summary(frame: &Frame, name: &str) -> Result<ColumnSummary> {
    let (_, mask) = frame.numeric(name)?;
    let mut values = frame.present_values(name)?;
    values.sort_by(f64::total_cmp);
    let missing = mask.iter().filter(|&&m| m).count();
    let q = |p| quantile(&values, p).ok();
    let ms = mean_std(&values);
    Ok(ColumnSummary {
        count: values.len(),
        missing,
        mean: ms.map(|m| m.0),
        std: ms.map(|m| m.1),
        min: values.first().copied(),
        max: values.last().copied(),
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
    })
}
