//! Dataset ingestion and per-feature min-max scaling.
//!
//! A [`Dataset`] is a dense row-major `N × F` matrix of finite reals with
//! unique feature names and optional class labels. Labels ride along for
//! metrics and plotting; projection never reads them.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Target interval `(low, high)` for min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRange {
    low: f64,
    high: f64,
}

impl ScaleRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::InvalidScaleRange { low, high });
        }
        Ok(Self { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }
}

impl Default for ScaleRange {
    fn default() -> Self {
        Self {
            low: 0.0,
            high: 1.0,
        }
    }
}

impl fmt::Display for ScaleRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.low, self.high)
    }
}

impl FromStr for ScaleRange {
    type Err = Error;

    /// Parses `"LO,HI"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("scale range {s:?} is not of the form LO,HI"));
        let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        ScaleRange::new(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_rows: usize,
    feature_names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from row-major values, checking every invariant.
    pub fn new(
        values: Vec<f64>,
        feature_names: Vec<String>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        if !values.len().is_multiple_of(n_features) {
            return Err(Error::LengthMismatch {
                expected: (values.len() / n_features + 1) * n_features,
                found: values.len(),
            });
        }
        let n_rows = values.len() / n_features;
        if n_rows < 2 {
            return Err(Error::TooFewRows(n_rows));
        }
        let mut seen = HashSet::with_capacity(n_features);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / n_features,
                column: feature_names[pos % n_features].clone(),
            });
        }
        if let Some(labels) = &labels {
            if labels.len() != n_rows {
                return Err(Error::LengthMismatch {
                    expected: n_rows,
                    found: labels.len(),
                });
            }
        }
        Ok(Self {
            values,
            n_rows,
            feature_names,
            labels,
        })
    }

    /// Convenience constructor from nested rows with generated names `f0, f1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: n_features,
                    found: row.len(),
                });
            }
        }
        let names = (0..n_features).map(|j| format!("f{j}")).collect();
        Self::new(rows.concat(), names, None)
    }

    pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, label_column)
    }

    /// Parses CSV with a header row. Every column except `label_column` must be numeric.
    pub fn from_csv_reader<R: Read>(reader: R, label_column: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();

        let mut seen = HashSet::with_capacity(header.len());
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let label_idx = match label_column {
            Some(name) => Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingLabelColumn(name.to_owned()))?,
            ),
            None => None,
        };
        let feature_cols: Vec<usize> = (0..header.len())
            .filter(|&c| Some(c) != label_idx)
            .collect();
        let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].clone()).collect();

        let mut values = Vec::new();
        let mut labels = label_idx.map(|_| Vec::new());
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != header.len() {
                return Err(Error::RaggedRow {
                    row: line,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            for &c in &feature_cols {
                let cell = &record[c];
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: line,
                    column: header[c].clone(),
                    value: cell.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        row: line,
                        column: header[c].clone(),
                    });
                }
                values.push(v);
            }
            if let (Some(labels), Some(li)) = (labels.as_mut(), label_idx) {
                labels.push(record[li].to_owned());
            }
        }
        if feature_names.is_empty() {
            return Err(Error::NoFeatures);
        }
        let n_rows = values.len() / feature_names.len();
        if n_rows < 2 {
            return Err(Error::TooFewRows(n_rows));
        }
        Self::new(values, feature_names, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let f = self.n_features();
        &self.values[i * f..(i + 1) * f]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_owned()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(j)
            .step_by(self.n_features())
            .copied()
            .collect()
    }

    /// Returns the named column in row order.
    pub fn extract_feature(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(self.feature_index(name)?))
    }

    /// Maps every column affinely onto `range`; constant columns go to the midpoint.
    pub fn scale_features(&self, range: ScaleRange) -> Dataset {
        let mut values = self.values.clone();
        scale_columns(&mut values, self.n_features(), range);
        Dataset {
            values,
            n_rows: self.n_rows,
            feature_names: self.feature_names.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Seeded subsample of `n` rows, original relative order kept.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n >= self.n_rows {
            return Ok(self.clone());
        }
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, self.n_rows, n).into_vec();
        picked.sort_unstable();
        let mut values = Vec::with_capacity(n * self.n_features());
        for &i in &picked {
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| picked.iter().map(|&i| l[i].clone()).collect());
        Dataset::new(values, self.feature_names.clone(), labels)
    }
}

/// In-place min-max scaling of each column of a row-major matrix with `n_cols` columns.
pub fn scale_columns(values: &mut [f64], n_cols: usize, range: ScaleRange) {
    if n_cols == 0 {
        return;
    }
    for j in 0..n_cols {
        let (min, max) = values
            .iter()
            .skip(j)
            .step_by(n_cols)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = max - min;
        for v in values.iter_mut().skip(j).step_by(n_cols) {
            *v = if span > 0.0 {
                // lerp form keeps both endpoints exact
                let t = (*v - min) / span;
                range.low * (1.0 - t) + range.high * t
            } else {
                range.midpoint()
            };
        }
    }
}
