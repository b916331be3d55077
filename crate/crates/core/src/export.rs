//! Projection CSV files and key=value run reports.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::init::Embedding;

/// Writes `id,dim0,...,dim{n-1}[,label]` with round-trip-exact floats.
pub fn write_projection<W: Write>(
    writer: W,
    embedding: &Embedding,
    labels: Option<&[String]>,
) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != embedding.n_points() {
            return Err(Error::LengthMismatch {
                expected: embedding.n_points(),
                found: l.len(),
            });
        }
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((0..embedding.dims()).map(|k| format!("dim{k}")));
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..embedding.n_points() {
        let mut record = vec![i.to_string()];
        record.extend(embedding.point(i).iter().map(|v| v.to_string()));
        if let Some(l) = labels {
            record.push(l[i].clone());
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<projection>", e))?;
    Ok(())
}

pub fn save_projection(
    path: impl AsRef<Path>,
    embedding: &Embedding,
    labels: Option<&[String]>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_projection(std::io::BufWriter::new(file), embedding, labels)
}

/// A projection read back from CSV: coordinates from the `dim*` columns and,
/// optionally, the named label column.
#[derive(Debug, Clone)]
pub struct ProjectionFile {
    pub embedding: Embedding,
    pub labels: Option<Vec<String>>,
}

pub fn read_projection<R: Read>(reader: R, label_column: Option<&str>) -> Result<ProjectionFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut dim_cols = Vec::new();
    for k in 0.. {
        match header.iter().position(|h| *h == format!("dim{k}")) {
            Some(c) => dim_cols.push(c),
            None => break,
        }
    }
    if dim_cols.is_empty() {
        return Err(Error::DimensionMismatch(
            "projection file has no dim0 column".into(),
        ));
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

    let mut coords = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for &c in &dim_cols {
            let cell = &record[c];
            coords.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                row: line,
                column: header[c].clone(),
                value: cell.to_owned(),
            })?);
        }
        if let (Some(l), Some(li)) = (labels.as_mut(), label_idx) {
            l.push(record[li].to_owned());
        }
    }
    Ok(ProjectionFile {
        embedding: Embedding::new(coords, dim_cols.len())?,
        labels,
    })
}

pub fn load_projection(
    path: impl AsRef<Path>,
    label_column: Option<&str>,
) -> Result<ProjectionFile> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_projection(file, label_column)
}

/// Ordered `key=value` lines; values must not contain newlines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.to_owned(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("report line {} has no '=': {line:?}", n + 1))
            })?;
            entries.push((k.trim().to_owned(), v.trim().to_owned()));
        }
        Ok(Self { entries })
    }

    pub fn to_map(&self) -> BTreeMap<&str, &str> {
        self.entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
