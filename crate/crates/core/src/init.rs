//! Initial embeddings and fixed-axis assignment.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, ScaleRange};
use crate::error::{Error, Result};
use crate::pca::Pca;

/// An `N × n` projection, `n ∈ {2, 3}`, stored row-major. The last axis is the fixed axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<f64>,
    n_points: usize,
    dims: usize,
    fixed_origin: Option<Vec<f64>>,
}

impl Embedding {
    pub fn new(coords: Vec<f64>, dims: usize) -> Result<Self> {
        if !(2..=3).contains(&dims) {
            return Err(Error::DimensionMismatch(format!(
                "embedding must have 2 or 3 dimensions, got {dims}"
            )));
        }
        if !coords.len().is_multiple_of(dims) {
            return Err(Error::LengthMismatch {
                expected: (coords.len() / dims + 1) * dims,
                found: coords.len(),
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                iteration: 0,
                point: pos / dims,
            });
        }
        Ok(Self {
            n_points: coords.len() / dims,
            coords,
            dims,
            fixed_origin: None,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn fixed_axis(&self) -> usize {
        self.dims - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        self.coords
            .iter()
            .skip(k)
            .step_by(self.dims)
            .copied()
            .collect()
    }

    /// Original fixed-axis values recorded by [`fix_axis`].
    pub fn fixed_origin(&self) -> Option<&[f64]> {
        self.fixed_origin.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// I.i.d. uniform over the scale range, drawn from the run seed.
    #[default]
    Random,
    /// Scores on the top principal components of the centered data.
    Pca,
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMode::Random => "random",
            InitMode::Pca => "pca",
        })
    }
}

impl FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(InitMode::Random),
            "pca" => Ok(InitMode::Pca),
            other => Err(Error::InvalidConfig(format!(
                "unknown init mode {other:?} (expected random or pca)"
            ))),
        }
    }
}

pub fn init_embedding(
    data: &Dataset,
    dims: usize,
    mode: InitMode,
    range: ScaleRange,
    seed: u64,
) -> Result<Embedding> {
    if !(2..=3).contains(&dims) {
        return Err(Error::DimensionMismatch(format!(
            "target dimensionality must be 2 or 3, got {dims}"
        )));
    }
    let n = data.n_rows();
    if n < dims {
        return Err(Error::TooFewRows(n));
    }
    let coords = match mode {
        InitMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n * dims)
                .map(|_| rng.gen_range(range.low()..range.high()))
                .collect()
        }
        InitMode::Pca => {
            let f = data.n_features();
            let pca = Pca::fit(data.values(), f, dims.min(f))?;
            let scores = pca.transform(data.values());
            if f >= dims {
                scores
            } else {
                // fewer features than target dims: pad trailing axes with zeros
                let k = f;
                let mut out = vec![0.0; n * dims];
                for i in 0..n {
                    out[i * dims..i * dims + k].copy_from_slice(&scores[i * k..(i + 1) * k]);
                }
                out
            }
        }
    };
    Embedding::new(coords, dims)
}

/// Overwrites the last axis with `values` and records them as the fixed origin.
pub fn fix_axis(mut e: Embedding, values: &[f64]) -> Result<Embedding> {
    if values.len() != e.n_points {
        return Err(Error::LengthMismatch {
            expected: e.n_points,
            found: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCoordinate {
            iteration: 0,
            point: i,
        });
    }
    let axis = e.fixed_axis();
    for (row, &v) in e.coords.chunks_exact_mut(e.dims).zip(values) {
        row[axis] = v;
    }
    e.fixed_origin = Some(values.to_vec());
    Ok(e)
}
