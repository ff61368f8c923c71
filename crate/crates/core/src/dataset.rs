//! Immutable test-set data: features, black-box predictions, ground truth.
//!
//! A [`TestSet`] is loaded once, validated eagerly (finite entries, label
//! ranges, unique column names) and never mutated afterwards, so it can be
//! shared freely across threads. Per-column order statistics live in
//! [`ColumnStats`], which keeps a sorted copy of the column for quantile
//! lookups.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::float::Float;
use crate::math;

/// Prediction task the dump was produced for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multiclass { classes: usize },
    Regression,
}

impl Task {
    pub fn is_classification(&self) -> bool {
        !matches!(self, Task::Regression)
    }

    /// Number of class labels, if this is a classification task.
    pub fn class_count(&self) -> Option<usize> {
        match self {
            Task::Binary => Some(2),
            Task::Multiclass { classes } => Some(*classes),
            Task::Regression => None,
        }
    }

    fn label_ok<F: Float>(&self, v: F) -> bool {
        match self.class_count() {
            None => v.is_finite(),
            Some(k) => {
                v.is_finite()
                    && v == v.trunc()
                    && v >= F::zero()
                    && v < F::from_count(k)
            }
        }
    }

    fn expected_labels(&self) -> String {
        match self {
            Task::Binary => "{0, 1}".to_string(),
            Task::Multiclass { classes } => format!("integers in 0..{classes}"),
            Task::Regression => "finite reals".to_string(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Binary => write!(f, "binary"),
            Task::Multiclass { classes } => write!(f, "multiclass({classes})"),
            Task::Regression => write!(f, "regression"),
        }
    }
}

/// A cell that failed numeric parsing, reported by file line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCell {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub column: String,
    pub content: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("file not found: {path}")]
    FileNotFound { path: PathBuf },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed csv: {0}")]
    MalformedCsv(#[from] csv::Error),
    #[error("column '{name}' not present in header")]
    MissingColumn { name: String },
    #[error("prediction and truth designate the same column '{name}'")]
    SameDesignatedColumn { name: String },
    #[error("no feature columns besides the prediction/truth columns")]
    NoFeatureColumns,
    #[error("duplicate feature name '{name}'")]
    DuplicateFeatureName { name: String },
    #[error("empty feature name in header")]
    EmptyFeatureName,
    #[error("{} non-numeric or missing cell(s): {}", cells.len(), format_cells(cells))]
    NonNumericFeature { cells: Vec<BadCell> },
    #[error("non-finite value at row {row}, column '{column}'")]
    NonFiniteValue { row: usize, column: String },
    #[error("label {value} at row {row} invalid for task; expected {expected}")]
    LabelOutOfRange {
        row: usize,
        value: f64,
        expected: String,
    },
    #[error("too few rows: {n} (need at least 2)")]
    TooFewRows { n: usize },
    #[error("column lengths differ: '{column}' has {len}, expected {expected}")]
    LengthMismatch {
        column: String,
        len: usize,
        expected: usize,
    },
    #[error("variable index {index} out of range (p = {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("quantile level {rho} outside [0, 1)")]
    RhoOutOfRange { rho: f64 },
}

fn format_cells(cells: &[BadCell]) -> String {
    let mut parts: Vec<String> = cells
        .iter()
        .take(20)
        .map(|c| format!("line {} column '{}' ({:?})", c.line, c.column, c.content))
        .collect();
    if cells.len() > 20 {
        parts.push(format!("... and {} more", cells.len() - 20));
    }
    parts.join("; ")
}

/// Column designation used by [`TestSet::load_csv`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub prediction_column: String,
    pub truth_column: String,
    pub task: Task,
}

/// Immutable table of `n` observations: `p` numeric features, one prediction
/// column and one truth column.
///
/// Features are stored column-major; every operation downstream reads whole
/// columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::Deserialize<'de>"
))]
pub struct TestSet<F> {
    columns: Vec<Vec<F>>,
    feature_names: Vec<String>,
    predictions: Vec<F>,
    truths: Vec<F>,
    task: Task,
    prediction_name: String,
    truth_name: String,
}

impl<F: Float> TestSet<F> {
    /// Build and validate a test set from column-major features.
    pub fn new(
        columns: Vec<Vec<F>>,
        feature_names: Vec<String>,
        predictions: Vec<F>,
        truths: Vec<F>,
        task: Task,
    ) -> Result<Self, DatasetError> {
        if columns.is_empty() {
            return Err(DatasetError::NoFeatureColumns);
        }
        if feature_names.len() != columns.len() {
            return Err(DatasetError::LengthMismatch {
                column: "feature_names".into(),
                len: feature_names.len(),
                expected: columns.len(),
            });
        }
        for (idx, name) in feature_names.iter().enumerate() {
            if name.is_empty() {
                return Err(DatasetError::EmptyFeatureName);
            }
            if feature_names[..idx].contains(name) {
                return Err(DatasetError::DuplicateFeatureName { name: name.clone() });
            }
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(DatasetError::TooFewRows { n });
        }
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(DatasetError::LengthMismatch {
                    column: name.clone(),
                    len: col.len(),
                    expected: n,
                });
            }
            for (row, v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DatasetError::NonFiniteValue {
                        row,
                        column: name.clone(),
                    });
                }
            }
        }
        for (label, vec) in [("predictions", &predictions), ("truths", &truths)] {
            if vec.len() != n {
                return Err(DatasetError::LengthMismatch {
                    column: label.into(),
                    len: vec.len(),
                    expected: n,
                });
            }
            for (row, &v) in vec.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DatasetError::NonFiniteValue {
                        row,
                        column: label.into(),
                    });
                }
                if !task.label_ok(v) {
                    return Err(DatasetError::LabelOutOfRange {
                        row,
                        value: v.to_f64().unwrap_or(f64::NAN),
                        expected: task.expected_labels(),
                    });
                }
            }
        }
        Ok(Self {
            columns,
            feature_names,
            predictions,
            truths,
            task,
            prediction_name: "pred".into(),
            truth_name: "y".into(),
        })
    }

    /// Override the prediction/truth column names used when writing CSV.
    pub fn with_output_names(mut self, prediction: &str, truth: &str) -> Self {
        self.prediction_name = prediction.to_string();
        self.truth_name = truth.to_string();
        self
    }

    /// Load a test set from a CSV file.
    ///
    /// All columns other than the designated prediction/truth columns become
    /// features, in header order. Any non-numeric or missing cell is collected
    /// and reported in a single whole-file error.
    pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Self, DatasetError> {
        if schema.prediction_column == schema.truth_column {
            return Err(DatasetError::SameDesignatedColumn {
                name: schema.prediction_column.clone(),
            });
        }
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| {
            if e.kind() == io::ErrorKind::NotFound {
                DatasetError::FileNotFound {
                    path: path.to_path_buf(),
                }
            } else {
                DatasetError::Io(e)
            }
        })?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
        let pred_idx = headers
            .iter()
            .position(|h| h == &schema.prediction_column)
            .ok_or_else(|| DatasetError::MissingColumn {
                name: schema.prediction_column.clone(),
            })?;
        let truth_idx = headers
            .iter()
            .position(|h| h == &schema.truth_column)
            .ok_or_else(|| DatasetError::MissingColumn {
                name: schema.truth_column.clone(),
            })?;

        let feature_idx: Vec<usize> = (0..headers.len())
            .filter(|&i| i != pred_idx && i != truth_idx)
            .collect();
        if feature_idx.is_empty() {
            return Err(DatasetError::NoFeatureColumns);
        }
        let feature_names: Vec<String> =
            feature_idx.iter().map(|&i| headers[i].clone()).collect();

        let mut columns: Vec<Vec<F>> = vec![Vec::new(); feature_idx.len()];
        let mut predictions: Vec<F> = Vec::new();
        let mut truths: Vec<F> = Vec::new();
        let mut bad: Vec<BadCell> = Vec::new();

        fn parse_cell<F: Float>(
            record: &csv::StringRecord,
            idx: usize,
            line: u64,
            headers: &[String],
            out: &mut Vec<F>,
            bad: &mut Vec<BadCell>,
        ) {
            let raw = record.get(idx).unwrap_or("");
            match raw.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(F::c(v)),
                _ => bad.push(BadCell {
                    line,
                    column: headers[idx].clone(),
                    content: raw.to_string(),
                }),
            }
        }

        for record in reader.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            for (slot, &idx) in feature_idx.iter().enumerate() {
                parse_cell(&record, idx, line, &headers, &mut columns[slot], &mut bad);
            }
            parse_cell(&record, pred_idx, line, &headers, &mut predictions, &mut bad);
            parse_cell(&record, truth_idx, line, &headers, &mut truths, &mut bad);
        }
        if !bad.is_empty() {
            return Err(DatasetError::NonNumericFeature { cells: bad });
        }

        Self::new(columns, feature_names, predictions, truths, schema.task).map(|ts| {
            ts.with_output_names(&schema.prediction_column, &schema.truth_column)
        })
    }

    /// Write the table as CSV; numeric formatting is shortest-round-trip, so a
    /// reload reproduces every finite value bit-exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        header.push(&self.prediction_name);
        header.push(&self.truth_name);
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n() {
            let mut fields: Vec<String> =
                self.columns.iter().map(|c| c[i].to_string()).collect();
            fields.push(self.predictions[i].to_string());
            fields.push(self.truths[i].to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Write the table to a file via [`TestSet::write_csv`].
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut out = Vec::new();
        self.write_csv(&mut out)?;
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn column(&self, j0: usize) -> Result<&[F], DatasetError> {
        self.columns
            .get(j0)
            .map(|c| c.as_slice())
            .ok_or(DatasetError::IndexOutOfRange {
                index: j0,
                len: self.p(),
            })
    }

    pub fn predictions(&self) -> &[F] {
        &self.predictions
    }

    pub fn truths(&self) -> &[F] {
        &self.truths
    }

    /// Min, max, mean and a stably sorted copy of column `j0`.
    pub fn column_stats(&self, j0: usize) -> Result<ColumnStats<F>, DatasetError> {
        let col = self.column(j0)?;
        let mut sorted = col.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite by invariant"));
        Ok(ColumnStats {
            index: j0,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean: math::mean(col),
            sorted,
        })
    }
}

/// Order statistics of one feature column.
#[derive(Debug, Clone)]
pub struct ColumnStats<F> {
    pub index: usize,
    pub min: F,
    pub max: F,
    pub mean: F,
    sorted: Vec<F>,
}

impl<F: Float> ColumnStats<F> {
    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[F] {
        &self.sorted
    }

    /// Lower empirical quantile: the sorted value at index `floor(n * rho)`,
    /// clamped to `[0, n - 1]`.
    ///
    /// The product `n * rho` is floored with a small relative guard so that
    /// levels which are exact in real arithmetic (e.g. `1 - alpha` with
    /// `alpha = 0.05`, `n = 100`) land on the intended order statistic
    /// despite the 1-ulp deficit of the rounded product.
    pub fn empirical_quantile(&self, rho: F) -> Result<F, DatasetError> {
        if !(rho >= F::zero() && rho < F::one()) {
            return Err(DatasetError::RhoOutOfRange {
                rho: rho.to_f64().unwrap_or(f64::NAN),
            });
        }
        let n = self.sorted.len();
        let h = F::from_count(n) * rho;
        let guard = h * F::epsilon() * F::c(8.0);
        let idx = (h + guard)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n - 1);
        Ok(self.sorted[idx])
    }
}
