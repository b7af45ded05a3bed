//! The randomly swept block iteration
//!
//! ```text
//! x_{i,n+1} = x_{i,n} + ε_{i,n} λ_n (T_{i,n} x_n + a_{i,n} − x_{i,n})
//! ```
//!
//! with error injection and trajectory recording.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::blockspace::{weighted_norm_sq, BlockLayout, BlockVector, WeightVector};
use crate::error::{Error, Result};
use crate::operators::OperatorFamily;
use crate::schedule::Schedule;
use crate::streams::TrajectoryStreams;
use crate::sweeping::{ActivationMask, SweepingLaw};

/// Relaxation `λ_n`, error budget `α_n` and horizon `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedules {
    pub lambda: Schedule,
    pub alpha: Schedule,
    pub horizon: usize,
}

impl Schedules {
    pub fn new(lambda: Schedule, alpha: Schedule, horizon: usize) -> Result<Self> {
        let s = Self { lambda, alpha, horizon };
        s.validate()?;
        Ok(s)
    }

    /// Requires `λ_n ∈ (0, 1]` with `inf λ_n > 0`, `α_n ≥ 0` and `Σ √α_n < ∞`.
    pub fn validate(&self) -> Result<()> {
        self.lambda.validate()?;
        self.alpha.validate()?;
        if !(self.lambda.inf() > 0.0) {
            return Err(Error::Certification {
                hypothesis: "relaxation",
                detail: format!("inf λ_n = {} must be positive", self.lambda.inf()),
            });
        }
        if self.lambda.sup() > 1.0 {
            return Err(Error::Domain(format!("λ_n must not exceed 1 (sup λ_n = {})", self.lambda.sup())));
        }
        if self.alpha.inf() < 0.0 {
            return Err(Error::Domain(format!("α_n must be nonnegative (inf α_n = {})", self.alpha.inf())));
        }
        if !self.alpha.sqrt_summable() {
            return Err(Error::Certification {
                hypothesis: "error summability",
                detail: format!("Σ √α_n is not certified finite for {:?}", self.alpha),
            });
        }
        Ok(())
    }

    /// Error-free schedules with constant relaxation.
    pub fn constant(lambda: f64, horizon: usize) -> Result<Self> {
        Self::new(Schedule::constant(lambda), Schedule::zero(), horizon)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.values(self.horizon)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alpha.values(self.horizon)
    }
}

/// How the perturbation `a_n` is drawn; every model satisfies `‖a_n‖² ≤ α_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorModel {
    None {},
    /// Uniform on the ball of radius `√α_n` in the full space.
    Ball {},
    /// `a_n = √α_n · v` for a fixed flattened `v` with `‖v‖ ≤ 1`.
    FixedVector { direction: Vec<f64> },
}

impl ErrorModel {
    pub fn validate(&self, layout: &BlockLayout) -> Result<()> {
        if let ErrorModel::FixedVector { direction } = self {
            if direction.len() != layout.total_dim() {
                return Err(Error::Conformance(format!(
                    "error direction has length {}, space has dimension {}",
                    direction.len(),
                    layout.total_dim()
                )));
            }
            let norm_sq: f64 = direction.iter().map(|v| v * v).sum();
            if !(norm_sq <= 1.0 + 1e-12) {
                return Err(Error::Domain(format!("error direction has norm {} > 1", norm_sq.sqrt())));
            }
        }
        Ok(())
    }

    /// Whether every `a_n` is a deterministic function of `n`.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, ErrorModel::Ball {})
    }

    /// Draws the full (unmasked) `a_n` for budget `alpha`.
    pub fn draw<R: Rng + ?Sized>(&self, layout: &BlockLayout, alpha: f64, rng: &mut R) -> Result<BlockVector> {
        let radius = alpha.max(0.0).sqrt();
        match self {
            ErrorModel::None {} => Ok(BlockVector::zeros(layout)),
            ErrorModel::FixedVector { direction } => {
                let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = if norm > 1.0 { radius / norm } else { radius };
                let scaled: Vec<f64> = direction.iter().map(|v| v * scale).collect();
                BlockVector::from_flat(layout, &scaled)
            }
            ErrorModel::Ball {} => {
                let dim = layout.total_dim();
                let mut g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let u: f64 = rng.random();
                // the radial draw stays strictly below 1, so ‖a‖ < √α
                let r = radius * u.powf(1.0 / dim as f64);
                let scale = if norm > 0.0 { r / norm } else { 0.0 };
                g.iter_mut().for_each(|v| *v *= scale);
                BlockVector::from_flat(layout, &g)
            }
        }
    }
}

/// The starting point `x_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPoint {
    /// Flattened coordinates.
    Fixed { point: Vec<f64> },
    /// Each coordinate uniform on `[lo, hi]`.
    UniformBox { lo: f64, hi: f64 },
}

impl InitialPoint {
    pub fn validate(&self, layout: &BlockLayout) -> Result<()> {
        match self {
            InitialPoint::Fixed { point } => {
                BlockVector::from_flat(layout, point)?;
                if point.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("initial point has non-finite entries".into()));
                }
            }
            InitialPoint::UniformBox { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Domain(format!("initial box [{lo}, {hi}] is empty or unbounded")));
                }
            }
        }
        Ok(())
    }

    pub fn is_random(&self) -> bool {
        matches!(self, InitialPoint::UniformBox { .. })
    }

    pub fn draw<R: Rng + ?Sized>(&self, layout: &BlockLayout, rng: &mut R) -> Result<BlockVector> {
        match self {
            InitialPoint::Fixed { point } => BlockVector::from_flat(layout, point),
            InitialPoint::UniformBox { lo, hi } => {
                let flat: Vec<f64> = (0..layout.total_dim()).map(|_| rng.random_range(*lo..=*hi)).collect();
                BlockVector::from_flat(layout, &flat)
            }
        }
    }
}

/// One update. Every `T_{i,n}` is evaluated at the pre-step `x`; inactive
/// blocks are copied unchanged and the error enters active blocks only.
pub fn step(
    x: &BlockVector,
    family: &dyn OperatorFamily,
    n: usize,
    mask: &ActivationMask,
    lambda: f64,
    error: &BlockVector,
) -> Result<BlockVector> {
    let layout = family.layout();
    x.check_layout(layout)?;
    error.check_layout(layout)?;
    if mask.len() != layout.num_blocks() {
        return Err(Error::Conformance(format!(
            "mask has {} entries, family has {} blocks",
            mask.len(),
            layout.num_blocks()
        )));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain(format!("λ = {lambda} is outside (0, 1]")));
    }
    let mut next = x.clone();
    for i in 0..layout.num_blocks() {
        if mask.is_active(i) {
            let t = family.apply_block(i, n, x)?;
            let xi = x.block(i);
            *next.block_mut(i) = xi + (t + error.block(i) - xi) * lambda;
        }
    }
    Ok(next)
}

/// Per-iteration record of a run of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `‖x_n − x̄‖²` for `n = 0..=N`.
    pub sq_error: Vec<f64>,
    /// `|||x_n − x̄|||²` for `n = 0..=N`.
    pub weighted_sq_error: Vec<f64>,
    /// `ε_n` for `n = 0..N`.
    pub masks: Vec<ActivationMask>,
    /// `x_n` for `n = 0..=N`, when requested.
    pub iterates: Option<Vec<BlockVector>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.masks.len()
    }

    /// Columns `n, sq_error, weighted_sq_error, mask`; the final row has an empty mask.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "sq_error", "weighted_sq_error", "mask"])?;
        for n in 0..self.sq_error.len() {
            let mask = self.masks.get(n).map(ToString::to_string).unwrap_or_default();
            w.write_record([
                n.to_string(),
                self.sq_error[n].to_string(),
                self.weighted_sq_error[n].to_string(),
                mask,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// A fully specified run: everything except the seed.
#[derive(Clone, Copy)]
pub struct RunSpec<'a> {
    pub family: &'a dyn OperatorFamily,
    pub law: &'a SweepingLaw,
    pub schedules: &'a Schedules,
    pub errors: &'a ErrorModel,
    pub initial: &'a InitialPoint,
    pub weights: &'a WeightVector,
}

impl RunSpec<'_> {
    pub fn validate(&self) -> Result<()> {
        let layout = self.family.layout();
        let m = layout.num_blocks();
        if self.law.num_blocks() != m {
            return Err(Error::Conformance(format!(
                "sweeping law has {} blocks, family has {m}",
                self.law.num_blocks()
            )));
        }
        if self.weights.len() != m {
            return Err(Error::Conformance(format!("{} weights for {m} blocks", self.weights.len())));
        }
        self.schedules.validate()?;
        self.errors.validate(layout)?;
        self.initial.validate(layout)
    }
}

/// Runs `N` iterations from a trajectory seed. The sweeping, error and
/// initialization draws come from independent streams of that seed.
pub fn run_trajectory(spec: &RunSpec<'_>, seed: u64, record_iterates: bool) -> Result<Trajectory> {
    spec.validate()?;
    let family = spec.family;
    let layout = family.layout();
    let fixed = family.fixed_point();
    let mut streams = TrajectoryStreams::new(seed);
    let horizon = spec.schedules.horizon;

    let mut x = spec.initial.draw(layout, &mut streams.initialization)?;
    let mut sq_error = Vec::with_capacity(horizon + 1);
    let mut weighted = Vec::with_capacity(horizon + 1);
    let mut masks = Vec::with_capacity(horizon);
    let mut iterates = record_iterates.then(|| Vec::with_capacity(horizon + 1));

    let mut record = |x: &BlockVector, iterates: &mut Option<Vec<BlockVector>>| -> Result<()> {
        let diff = x.sub(fixed)?;
        sq_error.push(diff.norm_sq());
        weighted.push(weighted_norm_sq(&diff, spec.weights)?);
        if let Some(it) = iterates {
            it.push(x.clone());
        }
        Ok(())
    };
    record(&x, &mut iterates)?;

    for n in 0..horizon {
        family.check_iteration(n)?;
        let mask = spec.law.sample(&mut streams.sweeping)?;
        let error = spec.errors.draw(layout, spec.schedules.alpha.at(n), &mut streams.errors)?;
        x = step(&x, family, n, &mask, spec.schedules.lambda.at(n), &error)?;
        record(&x, &mut iterates)?;
        masks.push(mask);
    }

    Ok(Trajectory {
        sq_error,
        weighted_sq_error: weighted,
        masks,
        iterates,
    })
}
