//! Force Scheme projection with one axis pinned to, or range-limited around,
//! a user-chosen feature.
//!
//! The pipeline is: scale every feature to a common range, build the
//! condensed distance matrix, create an initial embedding (random or PCA),
//! overwrite its last axis with the chosen feature, then run Force Scheme
//! sweeps where the last axis is updated through a [`ConstraintPolicy`].

pub mod bench;
pub mod constraint;
pub mod data;
pub mod engine;
pub mod error;
pub mod export;
pub mod geometry;
pub mod init;
pub mod metrics;
pub mod pca;
pub mod plot;

pub use constraint::{
    apply_constraint, gaussian_params, inverse_normal_cdf, moving_ratio, normal_cdf,
    AxisConstraint, ConstraintPolicy, Displacement, GaussianParams,
};
pub use data::{Dataset, ScaleRange};
pub use engine::{force_step, run_projection, ProjectionConfig, Projector, RunResult};
pub use error::{Error, Result};
pub use geometry::{build_distance_matrix, CondensedDistanceMatrix};
pub use init::{fix_axis, init_embedding, Embedding, InitMode};
pub use metrics::{knn_label_accuracy, kruskal_stress, stress_pipeline, StressReport};
pub use plot::{render_panels, render_scatter, PlotSpec};
