//! Labeled feature tables in CSV or TSV.
//!
//! The first row is a header. Fields are trimmed. A row with a missing value (empty,
//! `NA`, `NaN` or `?`) is rejected and reported; any other non-numeric feature value is
//! a parse error with its line and column.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rwqda_core::arw::LabeledDataset;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(&self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }

    /// `tsv` for `.tsv`/`.tab` files, otherwise `csv`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => Format::Tsv,
            _ => Format::Csv,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "tsv" => Some(Format::Tsv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub format: Format,
    pub label_column: String,
    pub id_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub x: DMatrix<f64>,
    pub y: Vec<u8>,
    pub feature_names: Vec<String>,
    pub sample_ids: Option<Vec<String>>,
    /// Original label text for classes 0 and 1.
    pub label_map: [String; 2],
    /// Line numbers of rows dropped for missing values.
    pub rejected_rows: Vec<usize>,
}

impl Corpus {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.y.iter().filter(|&&v| v == 1).count();
        (self.n() - n1, n1)
    }

    pub fn dataset(&self) -> Result<LabeledDataset> {
        Ok(LabeledDataset::new(self.x.clone(), self.y.clone())?)
    }
}

/// Unlabeled rows, as read by `predict`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub x: DMatrix<f64>,
    pub feature_names: Vec<String>,
    /// Sample ids, or row numbers starting at 0 when there is no id column.
    pub ids: Vec<String>,
    pub rejected_rows: Vec<usize>,
}

pub fn is_missing(field: &str) -> bool {
    field.is_empty()
        || field == "?"
        || field.eq_ignore_ascii_case("na")
        || field.eq_ignore_ascii_case("nan")
}

struct Table {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path, format: Format) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let origin = path.display().to_string();
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        LabError::Parse {
            path: origin.clone(),
            line,
            column: 0,
            message: e.to_string(),
        }
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| LabError::data(format!("{}: no column named {name:?}", path.display())))
}

/// Parse feature columns; `Ok(None)` means the row has a missing value.
fn parse_row(
    fields: &[String],
    cols: &[usize],
    line: usize,
    header: &[String],
    path: &Path,
) -> Result<Option<Vec<f64>>> {
    let mut out = Vec::with_capacity(cols.len());
    for &c in cols {
        let f = fields[c].as_str();
        if is_missing(f) {
            return Ok(None);
        }
        match f.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ => {
                return Err(LabError::Parse {
                    path: path.display().to_string(),
                    line,
                    column: c + 1,
                    message: format!("column {:?}: {f:?} is not a finite number", header[c]),
                })
            }
        }
    }
    Ok(Some(out))
}

fn to_matrix(rows: &[Vec<f64>], p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j])
}

/// Class order: numeric if both labels parse as numbers, else lexicographic.
fn label_order(labels: &BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<String> = labels.iter().cloned().collect();
    let nums: Option<Vec<f64>> = v.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = nums {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| nums[a].total_cmp(&nums[b]));
        v = idx.into_iter().map(|i| v[i].clone()).collect();
    }
    v
}

pub fn load_corpus(path: &Path, options: &LoadOptions) -> Result<Corpus> {
    let table = read_table(path, options.format)?;
    let label_col = column(&table.header, &options.label_column, path)?;
    let id_col = match &options.id_column {
        Some(name) => Some(column(&table.header, name, path)?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..table.header.len())
        .filter(|&c| c != label_col && Some(c) != id_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(LabError::data(format!(
            "{}: no feature columns",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (line, fields) in &table.rows {
        if let Some(c) = id_col {
            if !seen.insert(fields[c].clone()) {
                return Err(LabError::Parse {
                    path: path.display().to_string(),
                    line: *line,
                    column: c + 1,
                    message: format!("duplicate sample id {:?}", fields[c]),
                });
            }
        }
        let label = &fields[label_col];
        let Some(values) = (if is_missing(label) {
            None
        } else {
            parse_row(fields, &feature_cols, *line, &table.header, path)?
        }) else {
            rejected.push(*line);
            continue;
        };
        rows.push(values);
        labels.push(label.clone());
        if let Some(c) = id_col {
            ids.push(fields[c].clone());
        }
    }
    let distinct: BTreeSet<String> = labels.iter().cloned().collect();
    if distinct.len() > 2 {
        return Err(LabError::data(format!(
            "{}: labels must be binary, found {} classes",
            path.display(),
            distinct.len()
        )));
    }
    if distinct.len() < 2 {
        return Err(LabError::data(format!(
            "{}: a class has no complete rows",
            path.display()
        )));
    }
    let order = label_order(&distinct);
    let y = labels.iter().map(|l| u8::from(*l == order[1])).collect();
    Ok(Corpus {
        x: to_matrix(&rows, feature_cols.len()),
        y,
        feature_names: feature_cols
            .iter()
            .map(|&c| table.header[c].clone())
            .collect(),
        sample_ids: id_col.map(|_| ids),
        label_map: [order[0].clone(), order[1].clone()],
        rejected_rows: rejected,
    })
}

/// Read rows for prediction. Columns named in `ignore` (such as a label) are skipped.
pub fn load_features(
    path: &Path,
    format: Format,
    id_column: Option<&str>,
    ignore: &[&str],
) -> Result<FeatureTable> {
    let table = read_table(path, format)?;
    let id_col = match id_column {
        Some(name) => Some(column(&table.header, name, path)?),
        None => None,
    };
    let cols: Vec<usize> = (0..table.header.len())
        .filter(|&c| Some(c) != id_col && !ignore.contains(&table.header[c].as_str()))
        .collect();
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    let mut rejected = Vec::new();
    for (k, (line, fields)) in table.rows.iter().enumerate() {
        match parse_row(fields, &cols, *line, &table.header, path)? {
            Some(v) => {
                rows.push(v);
                ids.push(id_col.map_or_else(|| k.to_string(), |c| fields[c].clone()));
            }
            None => rejected.push(*line),
        }
    }
    Ok(FeatureTable {
        x: to_matrix(&rows, cols.len()),
        feature_names: cols.iter().map(|&c| table.header[c].clone()).collect(),
        ids,
        rejected_rows: rejected,
    })
}

/// Write `label,x1..xp` rows with shortest round-trip numbers.
pub fn dataset_csv(data: &LabeledDataset) -> String {
    let p = data.p();
    let mut s = String::with_capacity(data.n() * p * 20);
    s.push_str("label");
    for j in 1..=p {
        let _ = write!(s, ",x{j}");
    }
    s.push('\n');
    for i in 0..data.n() {
        let _ = write!(s, "{}", data.y[i]);
        for j in 0..p {
            let _ = write!(s, ",{}", data.x[(i, j)]);
        }
        s.push('\n');
    }
    s
}
