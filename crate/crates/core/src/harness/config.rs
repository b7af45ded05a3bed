//! JSON experiment configuration with sections `problem`, `sweeping`,
//! `schedules`, `errors` and `experiment`. Unknown keys are rejected.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blockspace::{weighted_norm_sq, BlockLayout, WeightVector};
use crate::bounds::{unweighted_block_bound, weighted_block_bound, BoundTrajectory, TauTable};
use crate::engine::{ErrorModel, InitialPoint, RunSpec, Schedules};
use crate::error::{Error, Result};
use crate::operators::{
    matrix_from_rows, AffineFamily, Coupling, CouplingSpec, CyclicResolventFamily, ForwardBackwardFamily,
    OperatorFamily, ResolventSpec,
};
use crate::schedule::Schedule;
use crate::sweeping::{ActivationMask, SweepingLaw};

pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_HORIZON: usize = 200;
pub const DEFAULT_SLACK: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `T x = L x + l`; `blocks` gives the block dimensions (scalar blocks by default).
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blocks: Option<Vec<usize>>,
    },
    /// `T_i x = J_{A_i}(x_{i+1})`.
    CyclicResolvent { resolvents: Vec<ResolventSpec> },
    /// `0 ∈ A_i x_i + B_i x` solved by block forward–backward steps.
    ForwardBackward {
        resolvents: Vec<ResolventSpec>,
        coupling: CouplingSpec,
        gamma: Schedule,
        /// Strong-monotonicity shift `θ_n ∈ [0, δ]`.
        #[serde(default = "Schedule::zero")]
        theta_shift: Schedule,
    },
    /// `min Σ_i f_i(x_i) + g(x)` with quadratic `g`.
    ProximalGradient {
        functions: Vec<ResolventSpec>,
        g: CouplingSpec,
        gamma: Schedule,
        /// Strong-monotonicity shift `θ_n ∈ [0, δ]`.
        #[serde(default = "Schedule::zero")]
        theta_shift: Schedule,
    },
}

impl ProblemSpec {
    pub fn build(&self, horizon: usize) -> Result<Arc<dyn OperatorFamily>> {
        Ok(match self {
            ProblemSpec::Affine { matrix, offset, blocks } => {
                let linear = matrix_from_rows(matrix)?;
                let offset = DVector::from_column_slice(offset);
                let layout = match blocks {
                    Some(dims) => BlockLayout::new(dims.clone())?,
                    None => BlockLayout::uniform(offset.len(), 1)?,
                };
                Arc::new(AffineFamily::new(layout, linear, offset)?)
            }
            ProblemSpec::CyclicResolvent { resolvents } => Arc::new(CyclicResolventFamily::new(resolvents)?),
            ProblemSpec::ForwardBackward { resolvents, coupling, gamma, theta_shift } => {
                let coupling = Coupling::from_spec(coupling)?;
                Arc::new(ForwardBackwardFamily::new(resolvents, coupling, *gamma, *theta_shift, horizon)?)
            }
            ProblemSpec::ProximalGradient { functions, g, gamma, theta_shift } => Arc::new(
                ForwardBackwardFamily::proximal_gradient(functions, g, *gamma, *theta_shift, horizon)?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskProbability {
    /// Bitstring; character `i` is block `i`.
    pub mask: String,
    pub prob: f64,
}

/// The number of blocks is taken from the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    AllBlocks {},
    /// Exactly one block, chosen with probability proportional to `weights`.
    SingleBlock { weights: Vec<f64> },
    /// Independent Bernoulli(q) bits conditioned on a nonzero mask.
    Bernoulli { q: f64 },
    /// Uniform over all nonzero masks.
    Uniform {},
    Explicit { table: Vec<MaskProbability> },
}

impl LawSpec {
    pub fn build(&self, m: usize) -> Result<SweepingLaw> {
        let law = match self {
            LawSpec::AllBlocks {} => SweepingLaw::all_blocks(m)?,
            LawSpec::SingleBlock { weights } => {
                if weights.len() != m {
                    return Err(Error::Conformance(format!("{} single-block weights for {m} blocks", weights.len())));
                }
                SweepingLaw::single_block(weights.clone())?
            }
            LawSpec::Bernoulli { q } => SweepingLaw::bernoulli(m, *q)?,
            LawSpec::Uniform {} => SweepingLaw::uniform(m)?,
            LawSpec::Explicit { table } => {
                let entries = table
                    .iter()
                    .map(|e| Ok((e.mask.parse::<ActivationMask>()?, e.prob)))
                    .collect::<Result<Vec<_>>>()?;
                SweepingLaw::explicit(m, entries)?
            }
        };
        Ok(law)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub lambda: Schedule,
    #[serde(default = "Schedule::zero")]
    pub alpha: Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedWeights {
    /// `ω_i = 1/p_i`.
    InverseMarginals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightChoice {
    Named(NamedWeights),
    Explicit(Vec<f64>),
}

impl Default for WeightChoice {
    fn default() -> Self {
        WeightChoice::Named(NamedWeights::InverseMarginals)
    }
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: WeightChoice,
    pub initial: InitialPoint,
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Iteration range `[start, end]` for rate fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_window: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub sweeping: LawSpec,
    pub schedules: ScheduleSpec,
    #[serde(default = "no_errors")]
    pub errors: ErrorModel,
    pub experiment: ExperimentSection,
}

fn no_errors() -> ErrorModel {
    ErrorModel::None {}
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A validated, ready-to-run experiment.
#[derive(Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub family: Arc<dyn OperatorFamily>,
    pub law: SweepingLaw,
    pub marginals: Vec<f64>,
    pub schedules: Schedules,
    pub weights: WeightVector,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("config", &self.config)
            .field("marginals", &self.marginals)
            .finish_non_exhaustive()
    }
}

impl Experiment {
    /// Builds and validates every component before anything runs.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let exp = &config.experiment;
        if exp.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(exp.slack >= 0.0 && exp.slack.is_finite()) {
            return Err(Error::Config(format!("slack {} must be nonnegative", exp.slack)));
        }
        if let Some((a, b)) = exp.rate_window {
            if !(a < b && b <= exp.horizon) {
                return Err(Error::Config(format!("rate window [{a}, {b}] must lie in [0, {}]", exp.horizon)));
            }
        }
        let schedules = Schedules::new(config.schedules.lambda, config.schedules.alpha, exp.horizon)?;
        let family = config.problem.build(exp.horizon)?;
        let m = family.num_blocks();
        let law = config.sweeping.build(m)?;
        let marginals = law.marginals()?;
        let weights = match &exp.weights {
            WeightChoice::Named(NamedWeights::InverseMarginals) => WeightVector::inverse_of(&marginals)?,
            WeightChoice::Explicit(w) => WeightVector::new(w.clone())?,
        };
        let experiment = Self { config, family, law, marginals, schedules, weights };
        experiment.run_spec().validate()?;
        Ok(experiment)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(ExperimentConfig::load(path)?)
    }

    pub fn run_spec(&self) -> RunSpec<'_> {
        RunSpec {
            family: self.family.as_ref(),
            law: &self.law,
            schedules: &self.schedules,
            errors: &self.config.errors,
            initial: &self.config.experiment.initial,
            weights: &self.weights,
        }
    }

    pub fn horizon(&self) -> usize {
        self.schedules.horizon
    }

    pub fn runs(&self) -> usize {
        self.config.experiment.runs
    }

    pub fn seed(&self) -> u64 {
        self.config.experiment.seed
    }

    pub fn slack(&self) -> f64 {
        self.config.experiment.slack
    }

    /// `(|||x_0 − x̄|||², ‖x_0 − x̄‖²)` for a fixed starting point.
    pub fn initial_distances(&self) -> Result<Option<(f64, f64)>> {
        match &self.config.experiment.initial {
            InitialPoint::Fixed { point } => {
                let layout = self.family.layout();
                let x0 = crate::blockspace::BlockVector::from_flat(layout, point)?;
                let diff = x0.sub(self.family.fixed_point())?;
                Ok(Some((weighted_norm_sq(&diff, &self.weights)?, diff.norm_sq())))
            }
            InitialPoint::UniformBox { .. } => Ok(None),
        }
    }

    pub fn tau_table(&self) -> Result<TauTable> {
        TauTable::from_family(self.family.as_ref(), self.horizon())
    }

    /// Bound on `E|||x_n − x̄|||²` in the configured weights.
    pub fn weighted_bound(&self, initial: f64) -> Result<BoundTrajectory> {
        weighted_block_bound(&self.tau_table()?, &self.marginals, &self.weights, &self.schedules, initial)
    }

    /// Bound on `E‖x_n − x̄‖²`.
    pub fn unweighted_bound(&self, initial: f64) -> Result<BoundTrajectory> {
        unweighted_block_bound(&self.tau_table()?, &self.marginals, &self.schedules, initial)
    }
}

/// Flattened rows of a matrix, for building configs programmatically.
pub fn rows_of(matrix: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..matrix.nrows()).map(|i| matrix.row(i).iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "problem": {"family": "affine", "matrix": [[0.3, 0.4], [-0.2, 0.5]], "offset": [1.0, -1.0]},
        "sweeping": {"law": "uniform"},
        "schedules": {"lambda": {"kind": "constant", "value": 1.0}},
        "experiment": {"horizon": 4, "runs": 10, "initial": {"kind": "fixed", "point": [0.0, 0.0]}}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(EXAMPLE).unwrap();
        assert_eq!(cfg.errors, ErrorModel::None {});
        assert_eq!(cfg.experiment.slack, DEFAULT_SLACK);
        assert_eq!(cfg.experiment.weights, WeightChoice::default());
        let exp = Experiment::new(cfg.clone()).unwrap();
        assert_eq!(exp.marginals, vec![2.0 / 3.0; 2]);
        assert!((exp.weights.as_slice()[0] - 1.5).abs() < 1e-15);
        let again = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = EXAMPLE.replace("\"runs\": 10", "\"runs\": 10, \"colour\": 1");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = EXAMPLE.replace("\"law\": \"uniform\"", "\"law\": \"uniform\", \"q\": 0.5");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn explicit_weights_and_validation() {
        let cfg = ExperimentConfig::from_json(&EXAMPLE.replace("\"runs\": 10", "\"runs\": 10, \"weights\": [1.5, 1.5]"))
            .unwrap();
        assert_eq!(cfg.experiment.weights, WeightChoice::Explicit(vec![1.5, 1.5]));
        Experiment::new(cfg).unwrap();
        let bad = ExperimentConfig::from_json(&EXAMPLE.replace("[0.0, 0.0]", "[0.0]")).unwrap();
        assert!(Experiment::new(bad).is_err());
        let bad = ExperimentConfig::from_json(&EXAMPLE.replace("\"runs\": 10", "\"runs\": 0")).unwrap();
        assert!(Experiment::new(bad).is_err());
    }
}
