use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Experiment;
use crate::blockspace::{weighted_norm_sq, BlockVector, WeightVector};
use crate::engine::{run_trajectory, step, InitialPoint, Trajectory};
use crate::error::{Error, Result};
use crate::streams::trajectory_seed;
use crate::sweeping::ActivationMask;

/// Largest number of activation sequences the exact oracle will enumerate.
pub const MAX_ENUMERATION: f64 = 1e6;

/// Per-iteration estimates of `E|||x_n − x̄|||²` and `E‖x_n − x̄‖²`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSquareEstimate {
    pub weighted_mean: Vec<f64>,
    /// Standard error of the weighted mean; `None` when it is undefined (one run).
    pub weighted_se: Option<Vec<f64>>,
    pub plain_mean: Vec<f64>,
    pub plain_se: Option<Vec<f64>>,
    pub runs: usize,
    /// Set when the values are exact expectations rather than sample means.
    pub exact: bool,
    pub weights: WeightVector,
}

/// One CSV row of an estimate; standard errors are empty when undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub n: usize,
    pub weighted_mean: f64,
    pub weighted_se: Option<f64>,
    pub plain_mean: f64,
    pub plain_se: Option<f64>,
}

impl MeanSquareEstimate {
    pub fn horizon(&self) -> usize {
        self.plain_mean.len() - 1
    }

    pub fn rows(&self) -> Vec<EstimateRow> {
        (0..self.plain_mean.len())
            .map(|n| EstimateRow {
                n,
                weighted_mean: self.weighted_mean[n],
                weighted_se: self.weighted_se.as_ref().map(|s| s[n]),
                plain_mean: self.plain_mean[n],
                plain_se: self.plain_se.as_ref().map(|s| s[n]),
            })
            .collect()
    }

    /// Columns `n, weighted_mean, weighted_se, plain_mean, plain_se`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn read_estimate_rows<R: Read>(reader: R) -> Result<Vec<EstimateRow>> {
    Ok(csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<Vec<EstimateRow>, _>>()?)
}

/// Mean and standard error of each column of `samples` (one row per run).
/// The mean is accumulated as offsets from the first run so that identical
/// runs reproduce their common value exactly.
fn column_stats(samples: &[&[f64]]) -> (Vec<f64>, Option<Vec<f64>>) {
    let runs = samples.len();
    let len = samples[0].len();
    let r = runs as f64;
    let mut mean = Vec::with_capacity(len);
    let mut se = Vec::with_capacity(len);
    for n in 0..len {
        let base = samples[0][n];
        let offset: f64 = samples.iter().map(|s| s[n] - base).sum::<f64>() / r;
        let m = base + offset;
        mean.push(m);
        if runs > 1 {
            let ss: f64 = samples.iter().map(|s| (s[n] - m).powi(2)).sum();
            se.push((ss / (r - 1.0) / r).sqrt());
        }
    }
    (mean, (runs > 1).then_some(se))
}

/// Runs all trajectories (in parallel) and returns them in index order.
pub fn simulate(experiment: &Experiment, record_iterates: bool) -> Result<Vec<Trajectory>> {
    let spec = experiment.run_spec();
    let master = experiment.seed();
    (0..experiment.runs())
        .into_par_iter()
        .map(|id| {
            run_trajectory(&spec, trajectory_seed(master, id as u64), record_iterates)
                .map_err(|e| Error::Trajectory { id, source: Box::new(e) })
        })
        .collect()
}

/// Summarizes trajectories into per-iteration means and standard errors.
pub fn summarize(trajectories: &[Trajectory], weights: &WeightVector) -> Result<MeanSquareEstimate> {
    if trajectories.is_empty() {
        return Err(Error::Domain("no trajectories to summarize".into()));
    }
    let weighted: Vec<&[f64]> = trajectories.iter().map(|t| t.weighted_sq_error.as_slice()).collect();
    let plain: Vec<&[f64]> = trajectories.iter().map(|t| t.sq_error.as_slice()).collect();
    let (weighted_mean, weighted_se) = column_stats(&weighted);
    let (plain_mean, plain_se) = column_stats(&plain);
    Ok(MeanSquareEstimate {
        weighted_mean,
        weighted_se,
        plain_mean,
        plain_se,
        runs: trajectories.len(),
        exact: false,
        weights: weights.clone(),
    })
}

/// Monte-Carlo estimate over `R` independent trajectories; trajectory `r`
/// uses seed `trajectory_seed(master, r)`.
pub fn monte_carlo(experiment: &Experiment) -> Result<MeanSquareEstimate> {
    summarize(&simulate(experiment, false)?, &experiment.weights)
}

/// Exact expectations by enumerating every activation sequence of length `N`
/// with its probability. Needs deterministic errors and a fixed `x_0`.
pub fn exact_expectation(experiment: &Experiment) -> Result<MeanSquareEstimate> {
    let errors = &experiment.config.errors;
    if !errors.is_deterministic() {
        return Err(Error::Config("exact enumeration needs error model `none` or `fixed_vector`".into()));
    }
    let point = match &experiment.config.experiment.initial {
        InitialPoint::Fixed { point } => point,
        InitialPoint::UniformBox { .. } => {
            return Err(Error::Config("exact enumeration needs a fixed initial point".into()))
        }
    };
    let table: Vec<(ActivationMask, f64)> = experiment.law.table()?.into_iter().filter(|(_, p)| *p > 0.0).collect();
    let horizon = experiment.horizon();
    let size = (table.len() as f64).powi(horizon as i32);
    if size > MAX_ENUMERATION {
        return Err(Error::StateSpaceTooLarge { size, limit: MAX_ENUMERATION });
    }

    let family = experiment.family.as_ref();
    let layout = family.layout();
    for n in 0..horizon {
        family.check_iteration(n)?;
    }
    // deterministic models never touch the generator
    let mut unused = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let perturbations = (0..horizon)
        .map(|n| errors.draw(layout, experiment.schedules.alpha.at(n), &mut unused))
        .collect::<Result<Vec<_>>>()?;
    let lambdas = experiment.schedules.lambdas();

    struct Walk<'a> {
        experiment: &'a Experiment,
        table: &'a [(ActivationMask, f64)],
        perturbations: &'a [BlockVector],
        lambdas: &'a [f64],
        weighted: Vec<f64>,
        plain: Vec<f64>,
    }

    impl Walk<'_> {
        fn visit(&mut self, x: &BlockVector, n: usize, prob: f64) -> Result<()> {
            let diff = x.sub(self.experiment.family.fixed_point())?;
            self.weighted[n] += prob * weighted_norm_sq(&diff, &self.experiment.weights)?;
            self.plain[n] += prob * diff.norm_sq();
            if n == self.lambdas.len() {
                return Ok(());
            }
            for (mask, p) in self.table {
                let family = self.experiment.family.as_ref();
                let next = step(x, family, n, mask, self.lambdas[n], &self.perturbations[n])?;
                self.visit(&next, n + 1, prob * p)?;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        experiment,
        table: &table,
        perturbations: &perturbations,
        lambdas: &lambdas,
        weighted: vec![0.0; horizon + 1],
        plain: vec![0.0; horizon + 1],
    };
    let x0 = BlockVector::from_flat(layout, point)?;
    walk.visit(&x0, 0, 1.0)?;

    Ok(MeanSquareEstimate {
        weighted_se: Some(vec![0.0; horizon + 1]),
        plain_se: Some(vec![0.0; horizon + 1]),
        weighted_mean: walk.weighted,
        plain_mean: walk.plain,
        runs: 1,
        exact: true,
        weights: experiment.weights.clone(),
    })
}
