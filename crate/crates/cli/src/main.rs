use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sweepfix::engine::ErrorModel;
use sweepfix::harness::{
    check_dominance, exact_expectation, fit_linear_rate, monte_carlo, rate_curves, render_svg, simulate, summarize,
    uniform_grid, write_curves_csv, Experiment, ExperimentConfig, MeanSquareEstimate, DEFAULT_CHIS,
};

/// Experiments with randomly swept block-coordinate fixed-point iterations.
#[derive(Parser)]
#[command(name = "sweepfix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo estimate of the mean-square error (estimate.csv, trajectory.csv).
    Run(Common),
    /// Bound trajectories in the weighted and plain norms (bound.csv, bound_plain.csv).
    Bound(Common),
    /// Checks the estimated error against the weighted bound (dominance.csv); exit 1 on failure.
    Check {
        #[command(flatten)]
        common: Common,
        /// Use the exact enumeration oracle instead of Monte-Carlo.
        #[arg(long)]
        exact: bool,
    },
    /// Exact expectations by enumerating activation sequences (oracle.csv).
    Oracle(Common),
    /// Normalized rate curves ρ(p)/ρ(1) (curves.csv, curves.svg).
    RateCurves {
        /// Values of χ, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CHIS)]
        chi: Vec<f64>,
        /// Number of grid points in (0, 1].
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fits the per-iteration ratio of the mean squared error; exit 1 if it exceeds sup χ + 0.02.
    Ratefit {
        #[command(flatten)]
        common: Common,
        /// Fit window `start,end`; defaults to the config's rate window.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<usize>>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    slack: Option<f64>,
}

impl Common {
    fn experiment(&self) -> Result<Experiment> {
        let mut config = ExperimentConfig::load(&self.config)?;
        let exp = &mut config.experiment;
        if let Some(seed) = self.seed {
            exp.seed = seed;
        }
        if let Some(runs) = self.runs {
            exp.runs = runs;
        }
        if let Some(horizon) = self.horizon {
            exp.horizon = horizon;
            exp.rate_window = exp.rate_window.map(|(a, b)| (a.min(horizon), b.min(horizon)));
        }
        if let Some(slack) = self.slack {
            exp.slack = slack;
        }
        Ok(Experiment::new(config)?)
    }

    fn out_file(&self, name: &str) -> Result<PathBuf> {
        out_file(&self.out, name)
    }
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir.join(name))
}

/// `(|||x_0 − x̄|||², ‖x_0 − x̄‖²)`, estimated by simulation for a random start.
fn initial_distances(exp: &Experiment) -> Result<(f64, f64)> {
    if let Some(d) = exp.initial_distances()? {
        return Ok(d);
    }
    let est = monte_carlo(exp)?;
    Ok((est.weighted_mean[0], est.plain_mean[0]))
}

fn print_estimate(est: &MeanSquareEstimate) {
    let n = est.horizon();
    let source = if est.exact { "exact".to_string() } else { format!("{} runs", est.runs) };
    println!(
        "{source}, N = {n}: E|||x_0 − x̄|||² = {:.6e}, E|||x_N − x̄|||² = {:.6e}, E‖x_N − x̄‖² = {:.6e}",
        est.weighted_mean[0], est.weighted_mean[n], est.plain_mean[n]
    );
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run(common) => {
            let exp = common.experiment()?;
            let trajectories = simulate(&exp, false)?;
            let est = summarize(&trajectories, &exp.weights)?;
            est.save_csv(&common.out_file("estimate.csv")?)?;
            trajectories[0].save_csv(&common.out_file("trajectory.csv")?)?;
            print_estimate(&est);
            Ok(true)
        }
        Command::Bound(common) => {
            let exp = common.experiment()?;
            let (weighted, plain) = initial_distances(&exp)?;
            let wb = exp.weighted_bound(weighted)?;
            let pb = exp.unweighted_bound(plain)?;
            wb.save_csv(&common.out_file("bound.csv")?)?;
            pb.save_csv(&common.out_file("bound_plain.csv")?)?;
            println!(
                "weighted: B_N = {:.6e}, sup χ = {:.6}, lim sup χ ≤ {:.6}",
                wb.bound[wb.horizon() - 1],
                wb.sup_chi(),
                wb.chi_limsup
            );
            println!("plain:    B_N = {:.6e}", pb.bound[pb.horizon() - 1]);
            Ok(true)
        }
        Command::Check { common, exact } => {
            let exp = common.experiment()?;
            let est = if exact { exact_expectation(&exp)? } else { monte_carlo(&exp)? };
            let (weighted, _) = match exp.initial_distances()? {
                Some(d) => d,
                None => (est.weighted_mean[0], est.plain_mean[0]),
            };
            let bound = exp.weighted_bound(weighted)?;
            let report = check_dominance(&est, &bound, exp.slack())?;
            report.write_csv(fs::File::create(common.out_file("dominance.csv")?)?)?;
            println!("{}", report.summary());
            Ok(report.pass)
        }
        Command::Oracle(common) => {
            let exp = common.experiment()?;
            let est = exact_expectation(&exp)?;
            est.save_csv(&common.out_file("oracle.csv")?)?;
            print_estimate(&est);
            Ok(true)
        }
        Command::RateCurves { chi, steps, out } => {
            if steps == 0 {
                bail!("steps must be positive");
            }
            let rows = rate_curves(&chi, &uniform_grid(steps))?;
            write_curves_csv(fs::File::create(out_file(&out, "curves.csv")?)?, &rows)?;
            fs::write(out_file(&out, "curves.svg")?, render_svg(&rows))?;
            println!("{} points for χ ∈ {chi:?}", rows.len());
            Ok(true)
        }
        Command::Ratefit { common, window } => {
            let exp = common.experiment()?;
            if !matches!(exp.config.errors, ErrorModel::None {}) || exp.config.schedules.alpha.sup() != 0.0 {
                return Err(sweepfix::Error::Config("rate fitting needs an error-free configuration".into()).into());
            }
            let window = match window {
                Some(w) => (w[0], w[1]),
                None => exp.config.experiment.rate_window.unwrap_or((exp.horizon() / 10, exp.horizon())),
            };
            let est = monte_carlo(&exp)?;
            let fit = fit_linear_rate(&est.plain_mean, window)?;
            let (weighted, _) = initial_distances(&exp)?;
            let sup_chi = exp.weighted_bound(weighted)?.sup_chi();
            let pass = fit.ratio <= sup_chi + 0.02;
            println!(
                "fitted ratio {:.6}{} over [{}, {}], sup χ = {:.6}: {}",
                fit.ratio,
                if fit.degenerate { " (exact convergence)" } else { "" },
                window.0,
                window.1,
                sup_chi,
                if pass { "pass" } else { "fail" }
            );
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let configuration = e.downcast_ref::<sweepfix::Error>().is_some_and(|e| e.is_configuration());
            ExitCode::from(if configuration { 2 } else { 1 })
        }
    }
}
