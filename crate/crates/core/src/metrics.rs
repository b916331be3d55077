//! Projection quality: Kruskal stress and leave-one-out k-NN label accuracy.

use std::collections::HashMap;

use crate::data::{scale_columns, Dataset, ScaleRange};
use crate::error::{Error, Result};
use crate::geometry::{build_distance_matrix, CondensedDistanceMatrix, Euclidean};
use crate::init::Embedding;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressReport {
    pub stress: f64,
    pub n_points: usize,
    /// Range both sides were scaled to, when computed through the pipeline.
    pub scale: Option<ScaleRange>,
}

/// `sqrt(Σ (d_ij − δ_ij)² / Σ d_ij²)` over all pairs, equally weighted.
pub fn kruskal_stress(
    original: &CondensedDistanceMatrix,
    projected: &CondensedDistanceMatrix,
) -> Result<StressReport> {
    if original.n_points() != projected.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "original has {} points, projection has {}",
            original.n_points(),
            projected.n_points()
        )));
    }
    let (num, den) = original
        .entries()
        .iter()
        .zip(projected.entries())
        .fold((0.0, 0.0), |(num, den), (d, p)| {
            (num + (d - p) * (d - p), den + d * d)
        });
    if den == 0.0 {
        return Err(Error::DegenerateDistances);
    }
    Ok(StressReport {
        stress: (num / den).sqrt(),
        n_points: original.n_points(),
        scale: None,
    })
}

/// Scales each embedding axis to `range` and compares against precomputed original distances.
pub fn projected_stress(
    original: &CondensedDistanceMatrix,
    embedding: &Embedding,
    range: ScaleRange,
) -> Result<StressReport> {
    let mut coords = embedding.coords().to_vec();
    scale_columns(&mut coords, embedding.dims(), range);
    let projected = CondensedDistanceMatrix::from_points(&coords, embedding.dims(), &Euclidean);
    let mut report = kruskal_stress(original, &projected)?;
    report.scale = Some(range);
    Ok(report)
}

/// Scales dataset and embedding to the same range, then measures stress between them.
pub fn stress_pipeline(
    data: &Dataset,
    embedding: &Embedding,
    range: ScaleRange,
) -> Result<StressReport> {
    if data.n_rows() != embedding.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} rows, projection has {} points",
            data.n_rows(),
            embedding.n_points()
        )));
    }
    let original = build_distance_matrix(&data.scale_features(range));
    projected_stress(&original, embedding, range)
}

/// Leave-one-out k-NN accuracy in embedding space.
///
/// The predicted label is the most frequent label among the `k` nearest other
/// points; a tie goes to whichever tied label appears first in distance order.
pub fn knn_label_accuracy(embedding: &Embedding, labels: &[String], k: usize) -> Result<f64> {
    let n = embedding.n_points();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!(
            "k must lie in 1..{n}, got {k}"
        )));
    }
    let mut correct = 0usize;
    let mut neighbours: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        neighbours.clear();
        let p = embedding.point(i);
        for j in (0..n).filter(|&j| j != i) {
            let q = embedding.point(j);
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            neighbours.push((d2, j));
        }
        neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &neighbours[..k];

        let mut counts: HashMap<&str, usize> = HashMap::new();
        for &(_, j) in nearest {
            *counts.entry(labels[j].as_str()).or_default() += 1;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        let predicted = nearest
            .iter()
            .map(|&(_, j)| labels[j].as_str())
            .find(|l| counts[l] == best)
            .expect("k >= 1");
        if predicted == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

/// [`knn_label_accuracy`] reading labels from a dataset.
pub fn dataset_knn_accuracy(data: &Dataset, embedding: &Embedding, k: usize) -> Result<f64> {
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    knn_label_accuracy(embedding, labels, k)
}
