//! Force Scheme iteration with a pluggable fixed-axis constraint.
//!
//! Each iteration visits every point `i` in a freshly shuffled order and, for
//! every other point `j`, nudges `i` along the unit vector from `j` by
//! `Δ·(d − d′)`, where `d` is the original-space distance and `d′` the current
//! projected distance. Updates are applied immediately, so later pairs see
//! earlier moves. The last axis goes through the [`AxisConstraint`] instead of
//! being updated directly.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::{AxisConstraint, ConstraintPolicy};
use crate::data::{Dataset, ScaleRange};
use crate::error::{Error, Result};
use crate::geometry::{build_distance_matrix, CondensedDistanceMatrix};
use crate::init::{fix_axis, init_embedding, Embedding, InitMode};
use crate::metrics::projected_stress;

pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub target_dims: usize,
    pub seed: u64,
    pub policy: ConstraintPolicy,
    /// Feature assigned to the last axis; required unless the policy is vanilla.
    pub fixed_feature: Option<String>,
    pub init: InitMode,
    pub scale: ScaleRange,
    /// Floor on projected distances.
    pub epsilon: f64,
    /// Linearly decay the learning rate towards zero over the run.
    pub lr_decay: bool,
    /// Record stress every this many iterations (plus iteration 0 and the last).
    pub trace_every: Option<usize>,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            learning_rate: DEFAULT_LEARNING_RATE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            target_dims: 2,
            seed: 0,
            policy: ConstraintPolicy::Vanilla,
            fixed_feature: None,
            init: InitMode::Random,
            scale: ScaleRange::default(),
            epsilon: DEFAULT_EPSILON,
            lr_decay: false,
            trace_every: None,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(2..=3).contains(&self.target_dims) {
            return bad(format!(
                "target dimensionality must be 2 or 3, got {}",
                self.target_dims
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.trace_every == Some(0) {
            return bad("trace interval must be at least 1".into());
        }
        self.policy.validate()?;
        match (self.policy.fixes_axis(), &self.fixed_feature) {
            (true, None) => bad(format!(
                "policy {} requires a fixed feature",
                self.policy.mode_name()
            )),
            (false, Some(name)) => bad(format!(
                "vanilla policy does not take a fixed feature (got {name:?})"
            )),
            _ => Ok(()),
        }
    }

    fn learning_rate_at(&self, iteration: usize) -> f64 {
        if self.lr_decay {
            self.learning_rate * (1.0 - iteration as f64 / self.max_iterations as f64)
        } else {
            self.learning_rate
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub embedding: Embedding,
    /// `(iteration, stress)` samples; empty unless tracing was requested.
    pub stress_trace: Vec<(usize, f64)>,
    pub wall_time_total: f64,
    /// Time spent creating the initial embedding and assigning the fixed axis.
    pub wall_time_init: f64,
    pub iterations_run: usize,
}

/// One full Force Scheme sweep over all points, in place.
pub fn force_step<R: Rng + ?Sized>(
    embedding: &mut Embedding,
    distances: &CondensedDistanceMatrix,
    learning_rate: f64,
    epsilon: f64,
    constraint: &AxisConstraint,
    rng: &mut R,
) -> Result<()> {
    let n = embedding.n_points();
    if distances.n_points() != n {
        return Err(Error::DimensionMismatch(format!(
            "embedding has {n} points but distance matrix has {}",
            distances.n_points()
        )));
    }
    let origin: Vec<f64> = match (constraint, embedding.fixed_origin()) {
        (AxisConstraint::Free, _) => Vec::new(),
        (_, Some(o)) => o.to_vec(),
        (_, None) => {
            return Err(Error::InvalidConfig(
                "constrained policy needs an embedding with a fixed axis".into(),
            ))
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let args = SweepArgs {
        distances,
        learning_rate,
        epsilon,
        constraint,
        origin: &origin,
        order: &order,
    };
    match embedding.dims() {
        2 => sweep::<2>(embedding.coords_mut(), &args),
        _ => sweep::<3>(embedding.coords_mut(), &args),
    }
    Ok(())
}

struct SweepArgs<'a> {
    distances: &'a CondensedDistanceMatrix,
    learning_rate: f64,
    epsilon: f64,
    constraint: &'a AxisConstraint,
    origin: &'a [f64],
    order: &'a [usize],
}

fn sweep<const D: usize>(coords: &mut [f64], args: &SweepArgs) {
    let n = coords.len() / D;
    let fixed = D - 1;
    let mut row = vec![0.0; n];
    for &i in args.order {
        args.distances.fill_row(i, &mut row);
        let mut pi = [0.0; D];
        pi.copy_from_slice(&coords[i * D..(i + 1) * D]);
        for (j, pj) in coords.chunks_exact(D).enumerate() {
            if j == i {
                continue;
            }
            let mut v = [0.0; D];
            let mut sq = 0.0;
            for k in 0..D {
                v[k] = pi[k] - pj[k];
                sq += v[k] * v[k];
            }
            let current = sq.sqrt().max(args.epsilon);
            let step = args.learning_rate * (row[j] - current) / current;
            for k in 0..fixed {
                pi[k] += step * v[k];
            }
            pi[fixed] = match args.constraint {
                AxisConstraint::Free => pi[fixed] + step * v[fixed],
                c => c.apply(args.origin[i], pi[fixed], step * v[fixed]),
            };
        }
        coords[i * D..(i + 1) * D].copy_from_slice(&pi);
    }
}

/// Stateful driver; lets callers inspect the embedding between iterations.
#[derive(Debug, Clone)]
pub struct Projector {
    config: ProjectionConfig,
    distances: CondensedDistanceMatrix,
    constraint: AxisConstraint,
    embedding: Embedding,
    rng: ChaCha8Rng,
    iteration: usize,
    wall_time_init: f64,
}

impl Projector {
    /// Sets up a run on an already-scaled dataset.
    pub fn new(scaled: &Dataset, config: ProjectionConfig) -> Result<Self> {
        config.validate()?;
        let fixed_values = config
            .fixed_feature
            .as_deref()
            .map(|name| scaled.extract_feature(name))
            .transpose()?;
        let constraint = config.policy.resolve()?;
        let distances = build_distance_matrix(scaled);

        let started = Instant::now();
        let mut embedding = init_embedding(
            scaled,
            config.target_dims,
            config.init,
            config.scale,
            config.seed,
        )?;
        if let Some(values) = &fixed_values {
            embedding = fix_axis(embedding, values)?;
        }
        let wall_time_init = started.elapsed().as_secs_f64();

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        Ok(Self {
            config,
            distances,
            constraint,
            embedding,
            rng,
            iteration: 0,
            wall_time_init,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let lr = self.config.learning_rate_at(self.iteration);
        force_step(
            &mut self.embedding,
            &self.distances,
            lr,
            self.config.epsilon,
            &self.constraint,
            &mut self.rng,
        )?;
        self.iteration += 1;
        let dims = self.embedding.dims();
        if let Some(pos) = self.embedding.coords().iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                iteration: self.iteration,
                point: pos / dims,
            });
        }
        Ok(())
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.config.max_iterations
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn distances(&self) -> &CondensedDistanceMatrix {
        &self.distances
    }

    pub fn config(&self) -> &ProjectionConfig {
        &self.config
    }

    /// Stress of the current embedding against the original distances.
    pub fn stress(&self) -> Result<f64> {
        Ok(projected_stress(&self.distances, &self.embedding, self.config.scale)?.stress)
    }
}

/// Scale, build distances, initialise, fix the axis, then iterate to `max_iterations`.
pub fn run_projection(data: &Dataset, config: &ProjectionConfig) -> Result<RunResult> {
    let started = Instant::now();
    config.validate()?;
    let scaled = data.scale_features(config.scale);
    let mut projector = Projector::new(&scaled, config.clone())?;

    let mut trace = Vec::new();
    if config.trace_every.is_some() {
        trace.push((0, projector.stress()?));
    }
    while !projector.is_done() {
        projector.step()?;
        if let Some(every) = config.trace_every {
            let it = projector.iteration();
            if it % every == 0 || projector.is_done() {
                trace.push((it, projector.stress()?));
            }
        }
    }

    let wall_time_init = projector.wall_time_init;
    let iterations_run = projector.iteration;
    Ok(RunResult {
        embedding: projector.embedding,
        stress_trace: trace,
        wall_time_total: started.elapsed().as_secs_f64(),
        wall_time_init,
        iterations_run,
    })
}
