//! Experiment grid: dataset × method × init × seed, with per-cell summaries.
//!
//! Grids are TOML files:
//!
//! ```toml
//! dims = 3
//! iterations = 500
//! learning_rate = 0.1
//! scale = [0.0, 1.0]
//! seeds = [0, 1, 2]
//! methods = ["vanilla", "strict", "range:0.1", "gauss:0.1:0.95", "pca-only"]
//! inits = ["random", "pca"]
//!
//! [[datasets]]
//! name = "iris"
//! path = "iris.csv"
//! label = "class"
//! feature = "sepal width"
//! ```
//!
//! Relative dataset paths resolve against the grid file's directory. A cell
//! that fails (unreadable file, unknown feature, numerical blow-up) becomes a
//! failure row; the rest of the grid still runs.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::constraint::ConstraintPolicy;
use crate::data::{Dataset, ScaleRange};
use crate::engine::{run_projection, ProjectionConfig};
use crate::error::{Error, Result};
use crate::init::{init_embedding, InitMode};
use crate::metrics::{knn_label_accuracy, stress_pipeline};

/// Fixed feature used when a dataset entry does not name one.
pub fn default_fixed_feature(dataset_name: &str) -> Option<&'static str> {
    match dataset_name.to_ascii_lowercase().as_str() {
        "iris" => Some("sepal width"),
        "wine" => Some("alcalinity of ash"),
        "cancer" | "breast_cancer" | "breast-cancer" => Some("worst concave points"),
        "digits" | "digit" => Some("pixel 6,4"),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchMethod {
    Projection(ConstraintPolicy),
    /// Plain PCA scores, no iterations.
    PcaOnly,
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMethod::Projection(p) => p.fmt(f),
            BenchMethod::PcaOnly => f.write_str("pca-only"),
        }
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "pca-only" {
            Ok(BenchMethod::PcaOnly)
        } else {
            s.parse().map(BenchMethod::Projection)
        }
    }
}

impl BenchMethod {
    fn needs_feature(&self) -> bool {
        matches!(self, BenchMethod::Projection(p) if p.fixes_axis())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    pub label: Option<String>,
    pub feature: Option<String>,
    /// Seeded row subsample applied before every cell of this dataset.
    pub subsample: Option<usize>,
    pub subsample_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub datasets: Vec<DatasetSpec>,
    pub methods: Vec<BenchMethod>,
    pub inits: Vec<InitMode>,
    pub seeds: Vec<u64>,
    pub dims: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub scale: ScaleRange,
    pub knn_k: usize,
    /// Run cells on the rayon pool. Leave off when timings matter.
    pub parallel: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: String,
    path: PathBuf,
    label: Option<String>,
    feature: Option<String>,
    subsample: Option<usize>,
    #[serde(default)]
    subsample_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    datasets: Vec<RawDataset>,
    methods: Vec<String>,
    inits: Vec<String>,
    seeds: Vec<u64>,
    dims: Option<usize>,
    iterations: Option<usize>,
    learning_rate: Option<f64>,
    scale: Option<[f64; 2]>,
    knn_k: Option<usize>,
    #[serde(default)]
    parallel: bool,
}

impl BenchGrid {
    /// Parses a TOML grid; relative dataset paths are joined onto `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawGrid = toml::from_str(text).map_err(|e| Error::Grid(e.to_string()))?;
        let scale = match raw.scale {
            Some([lo, hi]) => ScaleRange::new(lo, hi)?,
            None => ScaleRange::default(),
        };
        let grid = BenchGrid {
            datasets: raw
                .datasets
                .into_iter()
                .map(|d| DatasetSpec {
                    feature: d
                        .feature
                        .or_else(|| default_fixed_feature(&d.name).map(str::to_owned)),
                    path: if d.path.is_absolute() {
                        d.path
                    } else {
                        base_dir.join(d.path)
                    },
                    name: d.name,
                    label: d.label,
                    subsample: d.subsample,
                    subsample_seed: d.subsample_seed,
                })
                .collect(),
            methods: raw
                .methods
                .iter()
                .map(|m| m.parse())
                .collect::<Result<_>>()?,
            inits: raw.inits.iter().map(|i| i.parse()).collect::<Result<_>>()?,
            seeds: raw.seeds,
            dims: raw.dims.unwrap_or(3),
            iterations: raw
                .iterations
                .unwrap_or(crate::engine::DEFAULT_MAX_ITERATIONS),
            learning_rate: raw
                .learning_rate
                .unwrap_or(crate::engine::DEFAULT_LEARNING_RATE),
            scale,
            knn_k: raw.knn_k.unwrap_or(1),
            parallel: raw.parallel,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::Grid(format!("{what} list is empty")));
        if self.datasets.is_empty() {
            return empty("datasets");
        }
        if self.methods.is_empty() {
            return empty("methods");
        }
        if self.inits.is_empty() {
            return empty("inits");
        }
        if self.seeds.is_empty() {
            return empty("seeds");
        }
        if self.knn_k == 0 {
            return Err(Error::Grid("knn_k must be at least 1".into()));
        }
        if self.methods.iter().any(BenchMethod::needs_feature) {
            if let Some(d) = self.datasets.iter().find(|d| d.feature.is_none()) {
                return Err(Error::Grid(format!(
                    "dataset {:?} needs a fixed feature for constrained methods",
                    d.name
                )));
            }
        }
        ProjectionConfig {
            learning_rate: self.learning_rate,
            max_iterations: self.iterations,
            target_dims: self.dims,
            scale: self.scale,
            ..Default::default()
        }
        .validate()
        .map_err(|e| Error::Grid(e.to_string()))
    }

    pub fn n_cells(&self) -> usize {
        self.datasets.len() * self.methods.len() * self.inits.len() * self.seeds.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub stress: f64,
    pub wall_time_total: f64,
    pub wall_time_init: f64,
    pub knn_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub method: String,
    pub init: InitMode,
    pub seed: u64,
    pub outcome: std::result::Result<CellMetrics, String>,
}

/// Median and interquartile range (linear-interpolated quartiles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub iqr: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    Some(Summary {
        median: q(0.5),
        iqr: q(0.75) - q(0.25),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub dataset: String,
    pub method: String,
    pub init: InitMode,
    pub runs: usize,
    pub failures: usize,
    pub stress: Option<Summary>,
    pub wall_time_total: Option<Summary>,
    pub wall_time_init: Option<Summary>,
    pub knn_accuracy: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

type Cell<'a> = (&'a DatasetSpec, BenchMethod, InitMode, u64);

fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let data = Dataset::load_csv(&spec.path, spec.label.as_deref())?;
    match spec.subsample {
        Some(n) => data.subsample(n, spec.subsample_seed),
        None => Ok(data),
    }
}

fn run_cell(data: &Dataset, grid: &BenchGrid, cell: &Cell) -> Result<CellMetrics> {
    let (spec, method, init, seed) = *cell;
    let embedding;
    let (wall_time_total, wall_time_init);
    match method {
        BenchMethod::PcaOnly => {
            let started = Instant::now();
            let scaled = data.scale_features(grid.scale);
            embedding = init_embedding(&scaled, grid.dims, InitMode::Pca, grid.scale, seed)?;
            wall_time_total = started.elapsed().as_secs_f64();
            wall_time_init = wall_time_total;
        }
        BenchMethod::Projection(policy) => {
            let cfg = ProjectionConfig {
                learning_rate: grid.learning_rate,
                max_iterations: grid.iterations,
                target_dims: grid.dims,
                seed,
                policy,
                fixed_feature: policy.fixes_axis().then(|| spec.feature.clone()).flatten(),
                init,
                scale: grid.scale,
                ..Default::default()
            };
            let run = run_projection(data, &cfg)?;
            wall_time_total = run.wall_time_total;
            wall_time_init = run.wall_time_init;
            embedding = run.embedding;
        }
    }
    let stress = stress_pipeline(data, &embedding, grid.scale)?.stress;
    let knn_accuracy = match data.labels() {
        Some(labels) if grid.knn_k < data.n_rows() => {
            Some(knn_label_accuracy(&embedding, labels, grid.knn_k)?)
        }
        _ => None,
    };
    Ok(CellMetrics {
        stress,
        wall_time_total,
        wall_time_init,
        knn_accuracy,
    })
}

/// Executes every cell. Row order follows dataset, method, init, seed.
pub fn run_grid(grid: &BenchGrid) -> Result<BenchReport> {
    grid.validate()?;
    let loaded: Vec<std::result::Result<Dataset, String>> = grid
        .datasets
        .iter()
        .map(|d| load_dataset(d).map_err(|e| e.to_string()))
        .collect();

    let mut cells: Vec<(usize, Cell)> = Vec::with_capacity(grid.n_cells());
    for (di, d) in grid.datasets.iter().enumerate() {
        for &m in &grid.methods {
            for &init in &grid.inits {
                for &seed in &grid.seeds {
                    cells.push((di, (d, m, init, seed)));
                }
            }
        }
    }

    let execute = |(di, cell): &(usize, Cell)| -> BenchRow {
        let outcome = match &loaded[*di] {
            Ok(data) => run_cell(data, grid, cell).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        BenchRow {
            dataset: cell.0.name.clone(),
            method: cell.1.to_string(),
            init: cell.2,
            seed: cell.3,
            outcome,
        }
    };
    let rows = if grid.parallel {
        cells.par_iter().map(execute).collect()
    } else {
        cells.iter().map(execute).collect()
    };
    Ok(BenchReport { rows })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl BenchReport {
    pub fn failures(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }

    /// One aggregate per (dataset, method, init), in first-seen order.
    pub fn aggregates(&self) -> Vec<CellAggregate> {
        let mut keys: Vec<(&str, &str, InitMode)> = Vec::new();
        for r in &self.rows {
            let key = (r.dataset.as_str(), r.method.as_str(), r.init);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(dataset, method, init)| {
                let rows: Vec<&BenchRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.dataset == dataset && r.method == method && r.init == init)
                    .collect();
                let ok: Vec<&CellMetrics> = rows
                    .iter()
                    .filter_map(|r| r.outcome.as_ref().ok())
                    .collect();
                let col = |f: fn(&CellMetrics) -> Option<f64>| {
                    summarize(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
                };
                CellAggregate {
                    dataset: dataset.to_owned(),
                    method: method.to_owned(),
                    init,
                    runs: rows.len(),
                    failures: rows.len() - ok.len(),
                    stress: col(|m| Some(m.stress)),
                    wall_time_total: col(|m| Some(m.wall_time_total)),
                    wall_time_init: col(|m| Some(m.wall_time_init)),
                    knn_accuracy: col(|m| m.knn_accuracy),
                }
            })
            .collect()
    }

    pub fn aggregate(&self, dataset: &str, method: &str, init: InitMode) -> Option<CellAggregate> {
        self.aggregates()
            .into_iter()
            .find(|a| a.dataset == dataset && a.method == method && a.init == init)
    }

    /// Per-run rows as CSV.
    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record([
            "dataset",
            "method",
            "init",
            "seed",
            "stress",
            "wall_time_total",
            "wall_time_init",
            "knn_accuracy",
            "error",
        ])?;
        for r in &self.rows {
            let (stress, total, init_t, knn, err) = match &r.outcome {
                Ok(m) => (
                    m.stress.to_string(),
                    m.wall_time_total.to_string(),
                    m.wall_time_init.to_string(),
                    fmt_opt(m.knn_accuracy),
                    String::new(),
                ),
                Err(e) => (
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.clone(),
                ),
            };
            w.write_record([
                r.dataset.as_str(),
                r.method.as_str(),
                &r.init.to_string(),
                &r.seed.to_string(),
                &stress,
                &total,
                &init_t,
                &knn,
                &err,
            ])?;
        }
        w.flush().map_err(|e| Error::io("<bench rows>", e))?;
        Ok(())
    }

    /// Aggregates as CSV.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record([
            "dataset",
            "method",
            "init",
            "runs",
            "failures",
            "stress_median",
            "stress_iqr",
            "time_median",
            "time_iqr",
            "init_time_median",
            "knn_median",
        ])?;
        for a in self.aggregates() {
            w.write_record([
                a.dataset.clone(),
                a.method.clone(),
                a.init.to_string(),
                a.runs.to_string(),
                a.failures.to_string(),
                fmt_opt(a.stress.map(|s| s.median)),
                fmt_opt(a.stress.map(|s| s.iqr)),
                fmt_opt(a.wall_time_total.map(|s| s.median)),
                fmt_opt(a.wall_time_total.map(|s| s.iqr)),
                fmt_opt(a.wall_time_init.map(|s| s.median)),
                fmt_opt(a.knn_accuracy.map(|s| s.median)),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<bench summary>", e))?;
        Ok(())
    }

    /// Aligned text table of the aggregates.
    pub fn to_table(&self) -> String {
        let header = [
            "dataset", "method", "init", "ok/runs", "stress", "(iqr)", "time_s", "(iqr)", "init_s",
            "1nn_acc",
        ];
        let num = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        let body: Vec<Vec<String>> = self
            .aggregates()
            .into_iter()
            .map(|a| {
                vec![
                    a.dataset,
                    a.method,
                    a.init.to_string(),
                    format!("{}/{}", a.runs - a.failures, a.runs),
                    num(a.stress.map(|s| s.median), 4),
                    num(a.stress.map(|s| s.iqr), 4),
                    num(a.wall_time_total.map(|s| s.median), 4),
                    num(a.wall_time_total.map(|s| s.iqr), 4),
                    num(a.wall_time_init.map(|s| s.median), 4),
                    num(a.knn_accuracy.map(|s| s.median), 4),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: Vec<&str>| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, w))| {
                    if k < 3 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, header.to_vec());
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut out, rule.iter().map(String::as_str).collect());
        for row in &body {
            line(&mut out, row.iter().map(String::as_str).collect());
        }
        let failures: Vec<&BenchRow> = self.failures().collect();
        if !failures.is_empty() {
            let _ = writeln!(out, "\nfailures:");
            for r in failures {
                let _ = writeln!(
                    out,
                    "  {} {} {} seed={}: {}",
                    r.dataset,
                    r.method,
                    r.init,
                    r.seed,
                    r.outcome.as_ref().err().map_or("", String::as_str)
                );
            }
        }
        out
    }
}
