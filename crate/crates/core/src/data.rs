//! CSV ingestion, schema checks and conversion into a numeric [`Dataset`].
//!
//! The expected file is the public credit-card transaction table: a header
//! row, comma separated, `Time, V1..V28, Amount, Class`. Any header works as
//! long as every non-label column is numeric.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::preprocess::LabelMap;

pub const DEFAULT_LABEL_COLUMN: &str = "Class";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn parse(raw: &str) -> Cell {
        let s = raw.trim();
        if s.is_empty() {
            return Cell::Missing;
        }
        match s.parse::<f64>() {
            // inf / NaN literals count as missing.
            Ok(v) if !v.is_finite() => Cell::Missing,
            Ok(v) => Cell::Number(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Text form used for label lookup; numbers use their shortest form.
    pub fn label_text(&self) -> Option<String> {
        match self {
            Cell::Number(v) => Some(format!("{v}")),
            Cell::Text(s) => Some(s.clone()),
            Cell::Missing => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl RawDataset {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != column_names.len() {
                return Err(Error::RaggedRow {
                    line: i as u64 + 2,
                    expected: column_names.len(),
                    found: row.len(),
                });
            }
        }
        Ok(RawDataset { column_names, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Numeric features plus binary labels (0 = normal, 1 = fraudulent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: features.n_rows(),
            });
        }
        if feature_names.len() != features.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: features.n_cols(),
                found: feature_names.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {bad} is not binary")));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite feature value".into()));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    /// Returns `[count of class 0, count of class 1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        class_counts(&self.labels)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: crate::matrix::select(&self.labels, indices),
            feature_names: self.feature_names.clone(),
        }
    }
}

pub fn class_counts(labels: &[u8]) -> [usize; 2] {
    let ones = labels.iter().filter(|&&l| l == 1).count();
    [labels.len() - ones, ones]
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv<R: Read>(reader: R) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let column_names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != column_names.len() {
            let line = record.position().map_or(rows.len() as u64 + 2, |p| p.line());
            return Err(Error::RaggedRow {
                line,
                expected: column_names.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(Cell::parse).collect());
    }
    RawDataset::new(column_names, rows)
}

/// Checks that the label column exists and that every other cell is a
/// number or missing. All violations are reported together as
/// `(data row index, column name)` pairs.
pub fn validate_schema(raw: &RawDataset, label_column: &str) -> Result<()> {
    let label_idx = raw
        .column_index(label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let violations: Vec<(usize, String)> = raw
        .rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(c, cell)| (c != label_idx && matches!(cell, Cell::Text(_))).then_some((r, c)))
        })
        .map(|(r, c)| (r, raw.column_names[c].clone()))
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::NonNumericCells(violations))
    }
}

/// Drops every row that contains a missing cell. Returns the cleaned table
/// and the number of rows removed.
pub fn drop_incomplete(raw: &RawDataset) -> Result<(RawDataset, usize)> {
    let rows: Vec<Vec<Cell>> = raw
        .rows
        .iter()
        .filter(|row| !row.iter().any(Cell::is_missing))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let removed = raw.rows.len() - rows.len();
    Ok((
        RawDataset {
            column_names: raw.column_names.clone(),
            rows,
        },
        removed,
    ))
}

/// Raw label texts of the label column, in row order.
pub fn label_texts(raw: &RawDataset, label_column: &str) -> Result<Vec<String>> {
    let idx = raw
        .column_index(label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    raw.rows
        .iter()
        .map(|row| row[idx].label_text().ok_or(Error::EmptyDataset))
        .collect()
}

pub fn to_dataset(raw: &RawDataset, label_column: &str, label_map: &LabelMap) -> Result<Dataset> {
    let label_idx = raw
        .column_index(label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    if label_map.len() > 2 {
        return Err(Error::NotBinary(label_map.len()));
    }
    let n_features = raw.column_names.len() - 1;
    let mut data = Vec::with_capacity(raw.rows.len() * n_features);
    let mut labels = Vec::with_capacity(raw.rows.len());
    for (r, row) in raw.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if c == label_idx {
                let text = cell.label_text().ok_or(Error::EmptyDataset)?;
                let code = label_map.code(&text).ok_or_else(|| Error::UnseenLabel(text.clone()))?;
                labels.push(code as u8);
            } else {
                match cell {
                    Cell::Number(v) => data.push(*v),
                    _ => return Err(Error::NonNumericCells(vec![(r, raw.column_names[c].clone())])),
                }
            }
        }
    }
    let feature_names = raw
        .column_names
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label_idx)
        .map(|(_, n)| n.clone())
        .collect();
    Dataset::new(Matrix::new(labels.len(), n_features, data)?, labels, feature_names)
}

/// Writes `dataset` with its label appended as the last column. Numbers use
/// the shortest decimal form that parses back to the same `f64`.
pub fn write_csv<W: Write>(dataset: &Dataset, label_column: &str, mut out: W) -> std::io::Result<()> {
    let mut header = dataset.feature_names.join(",");
    header.push(',');
    header.push_str(label_column);
    writeln!(out, "{header}")?;
    for (row, label) in dataset.features.rows().zip(&dataset.labels) {
        let mut line = String::new();
        for v in row {
            line.push_str(&format!("{v},"));
        }
        line.push_str(&label.to_string());
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_csv(dataset: &Dataset, label_column: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(dataset, label_column, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Loads, validates, cleans and encodes a labelled CSV in one go.
/// Returns the dataset, the label map and the count of dropped rows.
pub fn load_dataset(path: impl AsRef<Path>, label_column: &str) -> Result<(Dataset, LabelMap, usize)> {
    let raw = load_csv(path)?;
    validate_schema(&raw, label_column)?;
    let (clean, removed) = drop_incomplete(&raw)?;
    let labels = label_texts(&clean, label_column)?;
    let map = LabelMap::for_labels(&labels)?;
    let ds = to_dataset(&clean, label_column, &map)?;
    Ok((ds, map, removed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::encode_labels;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<RawDataset> {
        read_csv(text.as_bytes())
    }

    #[test]
    fn minimal_file() {
        let raw = parse("a,b\n1,2\n").unwrap();
        assert_eq!(raw.column_names, vec!["a", "b"]);
        assert_eq!(raw.rows, vec![vec![Cell::Number(1.0), Cell::Number(2.0)]]);
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse("a,b\n1\n") {
            Err(Error::RaggedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("a,b\n1,2\n3,4\n5,6,7\n") {
            Err(Error::RaggedRow { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn windows_line_endings_and_no_trailing_newline() {
        let raw = parse("a,b\r\n1,2\r\n3,4").unwrap();
        assert_eq!(raw.n_rows(), 2);
        assert_eq!(raw.rows[1][1], Cell::Number(4.0));
    }

    #[test]
    fn empty_and_non_finite_cells_are_missing() {
        let raw = parse("a,b,c\n,inf,NaN\n").unwrap();
        assert!(raw.rows[0].iter().all(Cell::is_missing));
    }

    #[test]
    fn duplicate_header_rejected() {
        assert!(matches!(parse("a,a\n1,2\n"), Err(Error::DuplicateColumn(_))));
    }

    #[test]
    fn schema_checks() {
        let raw = parse("x,Class\n1,0\nabc,1\n2,1\n").unwrap();
        assert!(matches!(
            validate_schema(&raw, "Klass"),
            Err(Error::MissingLabelColumn(c)) if c == "Klass"
        ));
        match validate_schema(&raw, "Class") {
            Err(Error::NonNumericCells(v)) => assert_eq!(v, vec![(1, "x".to_string())]),
            other => panic!("unexpected {other:?}"),
        }
        let ok = parse("x,Class\n1,normal\n2,fraudulent\n").unwrap();
        validate_schema(&ok, "Class").unwrap();
    }

    #[test]
    fn drop_incomplete_keeps_order() {
        let raw = parse("a,b\n1,2\n3,\n5,6\n").unwrap();
        let (clean, removed) = drop_incomplete(&raw).unwrap();
        assert_eq!(removed, 1);
        assert_eq!(clean.rows[0][0], Cell::Number(1.0));
        assert_eq!(clean.rows[1][0], Cell::Number(5.0));

        let full = parse("a,b\n1,2\n").unwrap();
        let (same, removed) = drop_incomplete(&full).unwrap();
        assert_eq!((same, removed), (full, 0));

        let empty = parse("a,b\n,2\n1,\n").unwrap();
        assert!(matches!(drop_incomplete(&empty), Err(Error::EmptyDataset)));
    }

    #[test]
    fn drop_incomplete_is_idempotent() {
        let raw = parse("a,b\n1,2\n3,\n5,6\n,\n").unwrap();
        let (once, _) = drop_incomplete(&raw).unwrap();
        let (twice, removed) = drop_incomplete(&once).unwrap();
        assert_eq!(once, twice);
        assert_eq!(removed, 0);
    }

    #[test]
    fn numeric_labels_use_identity_map() {
        let raw = parse("x,Class\n1,1\n2,0\n3,1\n").unwrap();
        let map = LabelMap::for_labels(&label_texts(&raw, "Class").unwrap()).unwrap();
        let ds = to_dataset(&raw, "Class", &map).unwrap();
        assert_eq!(ds.labels, vec![1, 0, 1]);
        assert_eq!(ds.feature_names, vec!["x"]);
    }

    #[test]
    fn textual_labels_and_unseen_label() {
        let raw = parse("Class,x\nfraudulent,1\nnormal,2\n").unwrap();
        let (_, map) = encode_labels(&["normal".to_string(), "fraudulent".to_string()]).unwrap();
        let ds = to_dataset(&raw, "Class", &map).unwrap();
        assert_eq!(ds.labels, vec![1, 0]);
        assert_eq!(ds.features.column(0), vec![1.0, 2.0]);

        let refund = parse("Class,x\nrefund,1\n").unwrap();
        assert!(matches!(
            to_dataset(&refund, "Class", &map),
            Err(Error::UnseenLabel(l)) if l == "refund"
        ));
    }

    #[test]
    fn to_dataset_removes_only_label_column() {
        let raw = parse("a,Class,b,c\n1,0,2,3\n4,1,5,6\n").unwrap();
        let map = LabelMap::identity();
        let ds = to_dataset(&raw, "Class", &map).unwrap();
        assert_eq!(ds.n_features(), raw.column_names.len() - 1);
        assert_eq!(ds.feature_names, vec!["a", "b", "c"]);
        assert_eq!(ds.features.row(1), &[4.0, 5.0, 6.0]);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            rows in prop::collection::vec(
                (prop::collection::vec(-1e12f64..1e12, 3), 0u8..2), 1..20)
        ) {
            let data: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.clone()).collect();
            let labels: Vec<u8> = rows.iter().map(|(_, l)| *l).collect();
            let ds = Dataset::new(
                Matrix::from_rows(&data).unwrap(),
                labels,
                vec!["a".into(), "b".into(), "c".into()],
            ).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, "Class", &mut buf).unwrap();
            let raw = read_csv(buf.as_slice()).unwrap();
            let back = to_dataset(&raw, "Class", &LabelMap::identity()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
