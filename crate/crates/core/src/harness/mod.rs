//! Experiment orchestration: configuration, Monte-Carlo and exact
//! expectations, bound dominance, rate fitting and rate curves.

mod config;
mod curves;
mod dominance;
mod estimate;
mod ratefit;

pub use config::{
    rows_of, Experiment, ExperimentConfig, ExperimentSection, LawSpec, MaskProbability, NamedWeights, ProblemSpec,
    ScheduleSpec, WeightChoice, DEFAULT_HORIZON, DEFAULT_RUNS, DEFAULT_SLACK,
};
pub use curves::{rate_curves, read_curves_csv, render_svg, uniform_grid, write_curves_csv, CurvePoint, DEFAULT_CHIS};
pub use dominance::{check_dominance, DominanceReport, DominanceRow};
pub use estimate::{
    exact_expectation, monte_carlo, read_estimate_rows, simulate, summarize, EstimateRow, MeanSquareEstimate,
    MAX_ENUMERATION,
};
pub use ratefit::{fit_linear_rate, RateFit};
