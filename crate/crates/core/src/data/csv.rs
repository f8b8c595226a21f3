use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Where the class label lives in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "#{i}"),
            LabelColumn::Name(n) => write!(f, "{n:?}"),
        }
    }
}

/// Reads a comma-delimited UTF-8 file with an optional header row.
///
/// The first row is treated as a header when any of its feature cells fails
/// to parse as a number. Raw label values are mapped to {0, 1} in
/// lexicographic order. Row numbers in errors are 1-based file lines.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedCsv {
            path: path.to_path_buf(),
            row: line + 1,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }

    let width = rows[0].len();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Name(name) => rows[0]
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn {
                path: path.to_path_buf(),
                column: label_column.to_string(),
            })?,
        LabelColumn::Index(_) => {
            return Err(Error::MissingLabelColumn {
                path: path.to_path_buf(),
                column: label_column.to_string(),
            })
        }
    };

    let has_header = matches!(label_column, LabelColumn::Name(_))
        || rows[0]
            .iter()
            .enumerate()
            .any(|(j, cell)| j != label_idx && cell.parse::<f64>().is_err());
    let (header, body, first_line) = if has_header {
        (Some(rows[0].clone()), &rows[1..], 2)
    } else {
        (None, &rows[..], 1)
    };
    if body.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }

    let column_name = |j: usize| -> String {
        header
            .as_ref()
            .map(|h| h[j].clone())
            .unwrap_or_else(|| format!("#{j}"))
    };

    let n = body.len();
    let p = width - 1;
    let mut x = DMatrix::zeros(n, p);
    let mut raw_labels = Vec::with_capacity(n);
    for (i, row) in body.iter().enumerate() {
        let line = first_line + i;
        if row.len() != width {
            return Err(Error::MalformedCsv {
                path: path.to_path_buf(),
                row: line,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let mut col = 0;
        for (j, cell) in row.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.clone());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                path: path.to_path_buf(),
                row: line,
                column: column_name(j),
                value: cell.clone(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    path: path.to_path_buf(),
                    row: line,
                    column: column_name(j),
                });
            }
            x[(i, col)] = value;
            col += 1;
        }
    }

    let classes: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    let found: Vec<String> = classes.iter().map(|s| s.to_string()).collect();
    if classes.len() > 2 {
        return Err(Error::TooManyClasses {
            path: path.to_path_buf(),
            found,
        });
    }
    if classes.len() < 2 {
        return Err(Error::TooFewClasses {
            path: path.to_path_buf(),
            found,
        });
    }
    let positive = &found[1];
    let labels = raw_labels.iter().map(|l| u8::from(l == positive)).collect();

    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| *j != label_idx)
            .map(|(_, name)| name)
            .collect()
    });
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(name, x, labels, feature_names)
}
