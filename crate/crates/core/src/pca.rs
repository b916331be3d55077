//! Principal components via cyclic Jacobi on the covariance matrix.
//!
//! Feature counts here are small (at most a few dozen columns), so a dense
//! `F × F` Jacobi sweep is both simple and accurate to working precision.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi rotations on a row-major symmetric `n × n` matrix.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if matrix.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            found: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        sweeps += 1;

        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- J^T A J, touching rows/columns p and q only
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|r| v[r * n + k]).collect())
        .collect();
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Sample covariance (denominator `N - 1`) of a row-major `N × F` matrix, plus column means.
pub fn covariance(values: &[f64], n_features: usize) -> (Vec<f64>, Vec<f64>) {
    let f = n_features;
    let n = values.len() / f;
    let mut mean = vec![0.0; f];
    for row in values.chunks_exact(f) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0; f * f];
    let mut centered = vec![0.0; f];
    for row in values.chunks_exact(f) {
        for k in 0..f {
            centered[k] = row[k] - mean[k];
        }
        for p in 0..f {
            for q in p..f {
                cov[p * f + q] += centered[p] * centered[q];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for p in 0..f {
        for q in p..f {
            let c = cov[p * f + q] / denom;
            cov[p * f + q] = c;
            cov[q * f + p] = c;
        }
    }
    (cov, mean)
}

#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Top principal axes, unit norm, largest-magnitude loading positive.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    pub fn fit(values: &[f64], n_features: usize, n_components: usize) -> Result<Self> {
        if n_components > n_features {
            return Err(Error::DimensionMismatch(format!(
                "{n_components} components requested from {n_features} features"
            )));
        }
        let (cov, mean) = covariance(values, n_features);
        let eig = symmetric_eigen(&cov, n_features)?;
        let components = eig
            .vectors
            .into_iter()
            .take(n_components)
            .map(|mut c| {
                let lead = c
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                    .map_or(1.0, |(_, v)| *v);
                if lead < 0.0 {
                    c.iter_mut().for_each(|x| *x = -*x);
                }
                c
            })
            .collect();
        Ok(Self {
            mean,
            components,
            eigenvalues: eig.values,
        })
    }

    /// Row-major `N × k` scores of the mean-centered data.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        let f = self.mean.len();
        let mut out = Vec::with_capacity(values.len() / f * self.components.len());
        for row in values.chunks_exact(f) {
            for c in &self.components {
                out.push(
                    row.iter()
                        .zip(&self.mean)
                        .zip(c)
                        .map(|((x, m), w)| (x - m) * w)
                        .sum(),
                );
            }
        }
        out
    }
}
