use super::general::{relaxed_iteration_bound, GeneralBoundInputs};
use super::trajectory::{BoundNorm, BoundTrajectory};
use crate::blockspace::WeightVector;
use crate::engine::Schedules;
use crate::error::{Error, Result};
use crate::operators::OperatorFamily;
use crate::schedule::{Schedule, Sequence};

const WEIGHT_NORMALIZATION_TOL: f64 = 1e-12;

/// `τ_{i,n}` over a horizon, with certified `lim sup_n τ_{i,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauTable {
    values: Vec<Vec<f64>>,
    limsup: Vec<f64>,
}

impl TauTable {
    pub fn new(values: Vec<Vec<f64>>, limsup: Vec<f64>) -> Result<Self> {
        let m = limsup.len();
        if m == 0 {
            return Err(Error::Conformance("τ table has no blocks".into()));
        }
        if let Some((n, row)) = values.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::Conformance(format!("τ row {n} has {} entries, expected {m}", row.len())));
        }
        let bad = |v: &f64| !(*v >= 0.0 && v.is_finite());
        if values.iter().flatten().chain(&limsup).any(bad) {
            return Err(Error::Domain("τ entries must be finite and nonnegative".into()));
        }
        Ok(Self { values, limsup })
    }

    /// `τ_{i,n} = τ_i` for all `n`.
    pub fn constant(tau: Vec<f64>, horizon: usize) -> Result<Self> {
        Self::new(vec![tau.clone(); horizon], tau)
    }

    pub fn from_family(family: &dyn OperatorFamily, horizon: usize) -> Result<Self> {
        let m = family.num_blocks();
        Self::new(
            (0..horizon).map(|n| family.taus(n)).collect(),
            (0..m).map(|i| family.tau_limsup(i)).collect(),
        )
    }

    pub fn num_blocks(&self) -> usize {
        self.limsup.len()
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    pub fn limsup(&self) -> &[f64] {
        &self.limsup
    }
}

fn check_marginals(p: &[f64], m: usize) -> Result<()> {
    if p.len() != m {
        return Err(Error::Conformance(format!("{} marginals for {m} blocks", p.len())));
    }
    if let Some(v) = p.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
        return Err(Error::Domain(format!("marginal probability {v} is outside (0, 1]")));
    }
    Ok(())
}

/// Weighted block bound. With `ξ_n = α_n max_i ω_i` and
/// `μ_n = 1 − min_i(p_i − τ_{i,n}/ω_i)`, `B_n` bounds
/// `Σ_i ω_i E‖x_{i,n+1} − x̄_i‖²` given `initial = |||x_0 − x̄|||²`.
pub fn weighted_block_bound(
    tau: &TauTable,
    p: &[f64],
    weights: &WeightVector,
    schedules: &Schedules,
    initial: f64,
) -> Result<BoundTrajectory> {
    let m = tau.num_blocks();
    let horizon = schedules.horizon;
    check_marginals(p, m)?;
    if weights.len() != m {
        return Err(Error::Conformance(format!("{} weights for {m} blocks", weights.len())));
    }
    if tau.horizon() < horizon {
        return Err(Error::Conformance(format!("τ table covers {} iterations, need {horizon}", tau.horizon())));
    }
    schedules.validate()?;
    let w = weights.as_slice();

    let max_wp = w.iter().zip(p).map(|(w, p)| w * p).fold(f64::NEG_INFINITY, f64::max);
    if (max_wp - 1.0).abs() > WEIGHT_NORMALIZATION_TOL {
        return Err(Error::Certification {
            hypothesis: "weights",
            detail: format!("max_i ω_i p_i = {max_wp}, must equal 1"),
        });
    }
    for i in 0..m {
        if !(tau.limsup()[i] < w[i] * p[i]) {
            return Err(Error::Certification {
                hypothesis: "weights",
                detail: format!("lim sup τ_{i} = {} is not below ω_{i} p_{i} = {}", tau.limsup()[i], w[i] * p[i]),
            });
        }
    }

    let mu_at = |taus: &[f64]| 1.0 - (0..m).map(|i| p[i] - taus[i] / w[i]).fold(f64::INFINITY, f64::min);
    let mu_values: Vec<f64> = (0..horizon).map(|n| mu_at(tau.at(n))).collect();
    if let Some((n, mu)) = mu_values.iter().enumerate().find(|(_, mu)| !(**mu < 1.0)) {
        return Err(Error::Certification {
            hypothesis: "contraction",
            detail: format!("μ_{n} = {mu} is not below 1"),
        });
    }
    let mu_limsup = mu_at(tau.limsup());

    let inputs = GeneralBoundInputs {
        lambda: schedules.lambda.into(),
        mu: Sequence::new(mu_values, Schedule::constant(mu_limsup))?,
        xi: schedules.alpha.scaled(weights.max()).into(),
        nu: Schedule::zero().into(),
        theta_aux: Schedule::zero().into(),
        initial,
    };
    let mut t = relaxed_iteration_bound(&inputs, horizon)?;
    t.norm = BoundNorm::Weighted(weights.clone());
    Ok(t)
}

/// Unweighted bound: `B_n = (max p / min p)(∏ χ_k)‖x_0 − x̄‖² + η̄_n`, from
/// the weighted bound with `ω_i = 1/p_i`.
pub fn unweighted_block_bound(tau: &TauTable, p: &[f64], schedules: &Schedules, initial: f64) -> Result<BoundTrajectory> {
    check_marginals(p, tau.num_blocks())?;
    let worst = tau.limsup().iter().copied().fold(0.0, f64::max);
    if !(worst < 1.0) {
        return Err(Error::Certification {
            hypothesis: "contraction",
            detail: format!("max_i lim sup τ_i = {worst} is not below 1"),
        });
    }
    let weights = WeightVector::inverse_of(p)?;
    let t = weighted_block_bound(tau, p, &weights, schedules, prefactor(p) * initial)?;
    Ok(BoundTrajectory { norm: BoundNorm::Plain, ..t })
}

/// `max_i p_i / min_i p_i`.
pub fn prefactor(p: &[f64]) -> f64 {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}
