//! Condensed pairwise distance storage.

use std::io::{Read, Write};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Distance between two equal-length points.
pub trait Metric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    #[inline]
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Position of pair `(i, j)`, `i < j`, in the flattened strict upper triangle.
#[inline]
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Strict upper triangle of a symmetric distance matrix, stored row by row:
/// `(0,1), (0,2), ..., (0,N-1), (1,2), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistanceMatrix {
    entries: Vec<f64>,
    n_points: usize,
}

impl CondensedDistanceMatrix {
    pub fn from_entries(entries: Vec<f64>, n_points: usize) -> Result<Self> {
        let expected = n_points * n_points.saturating_sub(1) / 2;
        if entries.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: entries.len(),
            });
        }
        if entries.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidMatrixFile(
                "entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self { entries, n_points })
    }

    /// Pairwise distances between the rows of a row-major `n × dim` matrix.
    pub fn from_points<M: Metric>(values: &[f64], dim: usize, metric: &M) -> Self {
        let n = if dim == 0 { 0 } else { values.len() / dim };
        let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            let a = &values[i * dim..(i + 1) * dim];
            for j in i + 1..n {
                entries.push(metric.distance(a, &values[j * dim..(j + 1) * dim]));
            }
        }
        Self {
            entries,
            n_points: n,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Symmetric lookup with bounds checking; the diagonal is 0.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.n_points || j >= self.n_points {
            return Err(Error::IndexOutOfBounds {
                i,
                j,
                n: self.n_points,
            });
        }
        Ok(self.dist(i, j))
    }

    /// Unchecked-in-release symmetric lookup for hot loops.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[condensed_index(self.n_points, i, j)],
            std::cmp::Ordering::Greater => self.entries[condensed_index(self.n_points, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Copies row `i` of the full square matrix into `out` (length `n`).
    pub fn fill_row(&self, i: usize, out: &mut [f64]) {
        let n = self.n_points;
        assert_eq!(out.len(), n, "row buffer length");
        for (j, o) in out.iter_mut().enumerate().take(i) {
            *o = self.entries[condensed_index(n, j, i)];
        }
        out[i] = 0.0;
        if i + 1 < n {
            let start = condensed_index(n, i, i + 1);
            out[i + 1..].copy_from_slice(&self.entries[start..start + n - i - 1]);
        }
    }

    /// Writes a `u64` entry count followed by the entries, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for d in &self.entries {
            w.write_all(&d.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::InvalidMatrixFile(e.to_string());
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(io)?;
        let len = u64::from_le_bytes(word) as usize;
        // invert len = n(n-1)/2
        let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
        if n < 2 || n * (n - 1) / 2 != len {
            return Err(Error::InvalidMatrixFile(format!(
                "{len} entries is not a triangular count"
            )));
        }
        let mut entries = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut word).map_err(io)?;
            entries.push(f64::from_le_bytes(word));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(io)?;
        if !rest.is_empty() {
            return Err(Error::InvalidMatrixFile(format!(
                "{} trailing bytes",
                rest.len()
            )));
        }
        Self::from_entries(entries, n)
    }
}

/// Euclidean distances over all features of `data`.
pub fn build_distance_matrix(data: &Dataset) -> CondensedDistanceMatrix {
    CondensedDistanceMatrix::from_points(data.values(), data.n_features(), &Euclidean)
}
