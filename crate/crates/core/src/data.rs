//! Tabular input: CSV loading, missing-value handling, centering and scaling.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("column {column:?} has missing values")]
    MissingValues { column: String },
    #[error("no usable data: {0}")]
    Empty(String),
    #[error("column {0:?} is constant and cannot be scaled to unit norm")]
    DegenerateColumn(String),
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    pub na_tokens: HashSet<String>,
    /// Columns left out of the table, by name (`V1`, `V2`, … without a header).
    /// They are not parsed, so they may hold text.
    pub skip_columns: HashSet<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
            na_tokens: ["", "NA", "?"].iter().map(|s| s.to_string()).collect(),
            skip_columns: HashSet::new(),
        }
    }
}

/// A parsed numeric table before any preprocessing. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl RawTable {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.column_names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.rows[row][col]
    }

    /// Builds a complete table from a dense matrix.
    pub fn from_array(values: &Array2<f64>, column_names: Vec<String>) -> Self {
        let rows = values
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&x| Some(x)).collect())
            .collect();
        Self { column_names, rows }
    }

    /// Removes the named column and returns its values.
    pub fn take_column(&mut self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.column_names.iter().position(|c| c == name)?;
        self.column_names.remove(idx);
        Some(self.rows.iter_mut().map(|r| r.remove(idx)).collect())
    }
}

/// Loads a CSV file. Rows are numbered from 1 (the header, when present, is
/// not counted) and columns from 1 in error messages.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<RawTable, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_csv_reader(file, opts)
}

pub fn load_csv_reader<R: Read>(reader: R, opts: &CsvOptions) -> Result<RawTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut column_names: Option<Vec<String>> = None;
    if opts.has_header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| DataError::Csv { row: 0, message: e.to_string() })?;
                column_names = Some(rec.iter().map(str::to_string).collect());
            }
            None => return Err(DataError::Empty("file has no header".into())),
        }
    }

    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| DataError::Csv { row, message: e.to_string() })?;
        let expected = column_names.as_ref().map(Vec::len).unwrap_or(rec.len());
        if rec.len() != expected {
            return Err(DataError::Ragged { row, found: rec.len(), expected });
        }
        if column_names.is_none() {
            column_names = Some((1..=rec.len()).map(|j| format!("V{j}")).collect());
        }
        let names = column_names.as_ref().expect("names set above");
        let mut cells = Vec::with_capacity(rec.len());
        for (j, cell) in rec.iter().enumerate() {
            if opts.skip_columns.contains(&names[j]) {
                continue;
            }
            if opts.na_tokens.contains(cell) {
                cells.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                    row,
                    column: j + 1,
                    value: cell.to_string(),
                })?;
                cells.push(Some(v));
            }
        }
        rows.push(cells);
    }

    let column_names: Vec<String> =
        column_names.unwrap_or_default().into_iter().filter(|c| !opts.skip_columns.contains(c)).collect();
    let mut seen = HashSet::new();
    for name in &column_names {
        if !seen.insert(name.as_str()) {
            return Err(DataError::DuplicateColumn(name.clone()));
        }
    }
    Ok(RawTable { column_names, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Centered columns; `X'X` is the (unnormalized) covariance matrix.
    Covariance,
    /// Centered columns scaled to unit norm; `X'X` is the correlation matrix.
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    DropColumns,
    Fail,
}

/// Centered (and optionally unit-norm) data matrix.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
    scaling: Scaling,
    column_means: Array1<f64>,
    column_scales: Array1<f64>,
    total_variance: f64,
    dropped_columns: Vec<String>,
    constant_columns: Vec<String>,
}

impl DataMatrix {
    /// Centers and scales a complete dense matrix. Column names default to
    /// `V1..Vp`.
    pub fn from_array(values: Array2<f64>, scaling: Scaling) -> Result<Self, DataError> {
        let names = (1..=values.ncols()).map(|j| format!("V{j}")).collect();
        Self::build(values, names, scaling, Vec::new())
    }

    pub fn from_array_named(
        values: Array2<f64>,
        column_names: Vec<String>,
        scaling: Scaling,
    ) -> Result<Self, DataError> {
        assert_eq!(values.ncols(), column_names.len(), "one name per column");
        Self::build(values, column_names, scaling, Vec::new())
    }

    fn build(
        mut values: Array2<f64>,
        column_names: Vec<String>,
        scaling: Scaling,
        dropped_columns: Vec<String>,
    ) -> Result<Self, DataError> {
        let (n, p) = values.dim();
        if p == 0 {
            return Err(DataError::Empty("all columns dropped".into()));
        }
        if n < 2 {
            return Err(DataError::Empty(format!("need at least 2 rows, have {n}")));
        }
        let mut means = Array1::zeros(p);
        let mut scales = Array1::ones(p);
        let mut constant_columns = Vec::new();
        for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
            let raw_sq: f64 = col.iter().map(|x| x * x).sum();
            let mean = col.sum() / n as f64;
            col.mapv_inplace(|x| x - mean);
            means[j] = mean;
            let sq: f64 = col.iter().map(|x| x * x).sum();
            let constant = sq == 0.0 || sq <= 1e-24 * raw_sq;
            if constant {
                match scaling {
                    Scaling::Correlation => {
                        return Err(DataError::DegenerateColumn(column_names[j].clone()))
                    }
                    Scaling::Covariance => {
                        log::warn!("column {:?} is constant; it contributes no variance", column_names[j]);
                        col.fill(0.0);
                        constant_columns.push(column_names[j].clone());
                    }
                }
            } else if scaling == Scaling::Correlation {
                let norm = sq.sqrt();
                col.mapv_inplace(|x| x / norm);
                scales[j] = norm;
            }
        }
        let total_variance = values.iter().map(|x| x * x).sum();
        Ok(Self {
            values,
            column_names,
            scaling,
            column_means: means,
            column_scales: scales,
            total_variance,
            dropped_columns,
            constant_columns,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn column_means(&self) -> &Array1<f64> {
        &self.column_means
    }

    pub fn column_scales(&self) -> &Array1<f64> {
        &self.column_scales
    }

    /// Squared Frobenius norm, i.e. `trace(X'X)`.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// Names of columns removed because of missing values.
    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped_columns
    }

    /// Names of constant columns kept (with zero variance) under covariance scaling.
    pub fn constant_columns(&self) -> &[String] {
        &self.constant_columns
    }

    /// `X'X`. Quadratic in `p`; only meant for small problems and diagnostics.
    pub fn gram(&self) -> Array2<f64> {
        self.values.t().dot(&self.values)
    }

    pub fn to_raw_table(&self) -> RawTable {
        RawTable::from_array(&self.values, self.column_names.clone())
    }
}

/// Drops or rejects columns with missing cells, then centers and scales.
pub fn preprocess(
    table: &RawTable,
    scaling: Scaling,
    missing: MissingPolicy,
) -> Result<DataMatrix, DataError> {
    let n = table.n();
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in table.column_names.iter().enumerate() {
        if table.rows.iter().any(|r| r[j].is_none()) {
            match missing {
                MissingPolicy::Fail => {
                    return Err(DataError::MissingValues { column: name.clone() })
                }
                MissingPolicy::DropColumns => dropped.push(name.clone()),
            }
        } else {
            keep.push(j);
        }
    }
    if !dropped.is_empty() {
        log::info!("dropped {} columns with missing values", dropped.len());
    }
    let values = Array2::from_shape_fn((n, keep.len()), |(i, k)| {
        table.rows[i][keep[k]].expect("complete column")
    });
    let names = keep.iter().map(|&j| table.column_names[j].clone()).collect();
    DataMatrix::build(values, names, scaling, dropped)
}
