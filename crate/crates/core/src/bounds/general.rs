use super::recursion::{accumulate, running_products};
use super::trajectory::{BoundNorm, BoundTrajectory};
use crate::error::{Error, Result};
use crate::schedule::Sequence;

/// Inputs of the single-sequence mean-square bound for
/// `x_{n+1} = x_n + λ_n(t_n + e_n − x_n)` with
/// `E‖t_n − z‖² + θ_n ≤ μ_n ‖x_n − z‖² + ν_n` and `E‖e_n‖² ≤ ξ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBoundInputs {
    pub lambda: Sequence,
    pub mu: Sequence,
    pub xi: Sequence,
    pub nu: Sequence,
    /// The known part of the auxiliary slack sequence `θ_n` (not the
    /// forward–backward shift).
    pub theta_aux: Sequence,
    /// `‖x_0 − z‖²`, or its expectation for a random `x_0`.
    pub initial: f64,
}

fn nonnegative(name: &str, s: &Sequence, horizon: usize) -> Result<Vec<f64>> {
    let values = s.values(horizon);
    if let Some((n, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Domain(format!("{name}_{n} = {v} must be nonnegative")));
    }
    if !(s.limit() >= 0.0) {
        return Err(Error::Domain(format!("{name} has negative limit {}", s.limit())));
    }
    Ok(values)
}

/// Evaluates
///
/// ```text
/// χ_n = 1 − λ_n + λ_n μ_n + √ξ_n λ_n (1 − λ_n + λ_n √μ_n)
/// η_n = λ_n (ν_n + (1 − λ_n + λ_n(2√ν_n + √μ_n)) √ξ_n + λ_n ξ_n)
/// ϑ_n = λ_n θ_n
/// B_n = (∏_{k≤n} χ_k) ‖x_0 − z‖² + η̄_n − ϑ̄_n
/// ```
///
/// after certifying `inf λ_n > 0`, `Σ √ξ_n < ∞` and `lim sup μ_n < 1`.
pub fn relaxed_iteration_bound(inputs: &GeneralBoundInputs, horizon: usize) -> Result<BoundTrajectory> {
    let GeneralBoundInputs { lambda, mu, xi, nu, theta_aux, initial } = inputs;
    if !(*initial >= 0.0 && initial.is_finite()) {
        return Err(Error::Domain(format!("initial distance {initial} must be finite and nonnegative")));
    }
    let lambda_inf = lambda.inf();
    if !(lambda_inf > 0.0) {
        return Err(Error::Certification {
            hypothesis: "relaxation",
            detail: format!("inf λ_n = {lambda_inf} must be positive"),
        });
    }
    if lambda.sup() > 1.0 {
        return Err(Error::Domain(format!("λ_n must not exceed 1 (sup = {})", lambda.sup())));
    }
    let xi_values = nonnegative("ξ", xi, horizon)?;
    if !xi.sqrt_summable() {
        return Err(Error::Certification {
            hypothesis: "error summability",
            detail: "Σ √ξ_n is not certified finite".into(),
        });
    }
    let mu_values = nonnegative("μ", mu, horizon)?;
    let mu_limsup = mu.limsup();
    if !(mu_limsup < 1.0) {
        return Err(Error::Certification {
            hypothesis: "contraction",
            detail: format!("lim sup μ_n = {mu_limsup} is not below 1"),
        });
    }
    let nu_values = nonnegative("ν", nu, horizon)?;
    let theta_values = nonnegative("θ", theta_aux, horizon)?;
    let lambda_values = lambda.values(horizon);

    let mut chi = Vec::with_capacity(horizon);
    let mut eta = Vec::with_capacity(horizon);
    let mut vartheta = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let (l, m, x, v) = (lambda_values[n], mu_values[n], xi_values[n], nu_values[n]);
        let (sm, sx) = (m.sqrt(), x.sqrt());
        chi.push(1.0 - l + l * m + sx * l * (1.0 - l + l * sm));
        eta.push(l * (v + (1.0 - l + l * (2.0 * v.sqrt() + sm)) * sx + l * x));
        vartheta.push(l * theta_values[n]);
    }

    // ξ_n → 0, so lim sup χ_n ≤ 1 − inf λ_n (1 − lim sup μ_n).
    let chi_limsup = 1.0 - lambda_inf * (1.0 - mu_limsup);
    if !(chi_limsup < 1.0) {
        return Err(Error::Certification {
            hypothesis: "contraction",
            detail: format!("lim sup χ_n ≤ {chi_limsup} is not below 1"),
        });
    }

    let products = running_products(&chi);
    let eta_bar = accumulate(&chi, &eta);
    let vartheta_bar = accumulate(&chi, &vartheta);
    let bound: Vec<f64> = (0..horizon)
        .map(|n| products[n] * initial + eta_bar[n] - vartheta_bar[n])
        .collect();
    if let Some((n, b)) = bound.iter().enumerate().find(|(_, b)| **b < 0.0) {
        return Err(Error::Domain(format!(
            "B_{n} = {b} is negative: the θ_n terms are inconsistent with the other inputs"
        )));
    }

    Ok(BoundTrajectory {
        chi,
        eta_bar,
        vartheta_bar,
        bound,
        initial: *initial,
        chi_limsup,
        norm: BoundNorm::Plain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::Schedule;
    use proptest::prelude::*;

    fn constant(v: f64) -> Sequence {
        Schedule::constant(v).into()
    }

    fn inputs(lambda: Sequence, mu: Sequence, xi: Sequence, nu: Sequence, initial: f64) -> GeneralBoundInputs {
        GeneralBoundInputs { lambda, mu, xi, nu, theta_aux: constant(0.0), initial }
    }

    #[test]
    fn error_free_full_relaxation() {
        let mu = Sequence::new(vec![0.9, 0.3, 0.6], Schedule::constant(0.5)).unwrap();
        let t = relaxed_iteration_bound(&inputs(constant(1.0), mu.clone(), constant(0.0), constant(0.0), 4.0), 6).unwrap();
        assert_eq!(t.chi, mu.values(6));
        assert!(t.eta_bar.iter().all(|v| *v == 0.0));
        let mut prod = 4.0;
        for n in 0..6 {
            prod *= mu.at(n);
            assert_eq!(t.bound[n], prod);
        }
    }

    #[test]
    fn chi_spot_value() {
        let xi = Sequence::from(Schedule::geometric_decay(0.01, 0.25));
        let t = relaxed_iteration_bound(&inputs(constant(1.0), constant(0.25), xi, constant(0.0), 1.0), 4).unwrap();
        assert!((t.chi[0] - 0.30).abs() < 1e-15);
        for n in 0..4 {
            // χ_n = 0.25 + √(0.01·0.25ⁿ)·0.5
            let expected = 0.25 + 0.1 * 0.5f64.powi(n as i32) * 0.5;
            assert!((t.chi[n] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn vartheta_reduces_bound() {
        let mut inp = inputs(constant(0.5), constant(0.5), constant(0.0), constant(0.0), 10.0);
        inp.theta_aux = constant(0.1);
        let t = relaxed_iteration_bound(&inp, 5).unwrap();
        assert!((t.vartheta_bar[0] - 0.05).abs() < 1e-15);
        assert!((t.bound[0] - (0.75 * 10.0 - 0.05)).abs() < 1e-14);
        inp.theta_aux = constant(100.0);
        assert!(matches!(relaxed_iteration_bound(&inp, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn hypotheses_are_named() {
        let h = |r: Result<BoundTrajectory>| match r {
            Err(Error::Certification { hypothesis, .. }) => hypothesis,
            other => panic!("{other:?}"),
        };
        let lam = Sequence::from(Schedule::polynomial_decay(1.0, 1.0));
        assert_eq!(h(relaxed_iteration_bound(&inputs(lam, constant(0.5), constant(0.0), constant(0.0), 1.0), 3)), "relaxation");
        assert_eq!(
            h(relaxed_iteration_bound(&inputs(constant(1.0), constant(0.5), constant(0.01), constant(0.0), 1.0), 3)),
            "error summability"
        );
        let mu = Sequence::from(Schedule::Geometric { start: 0.2, limit: 1.0, ratio: 0.5 });
        assert_eq!(h(relaxed_iteration_bound(&inputs(constant(1.0), mu, constant(0.0), constant(0.0), 1.0), 3)), "contraction");
    }

    proptest! {
        #[test]
        fn increasing_nu_never_decreases_bound(
            lam in 0.05f64..=1.0,
            mu in prop::collection::vec(0.0f64..2.0, 8),
            xi in prop::collection::vec(0.0f64..0.5, 8),
            nu in prop::collection::vec(0.0f64..1.0, 8),
            k in 0usize..8,
            bump in 0.0f64..1.0,
        ) {
            let mk = |nu: Vec<f64>| GeneralBoundInputs {
                lambda: constant(lam),
                mu: Sequence::new(mu.clone(), Schedule::constant(0.5)).unwrap(),
                xi: Sequence::new(xi.clone(), Schedule::zero()).unwrap(),
                nu: Sequence::new(nu, Schedule::zero()).unwrap(),
                theta_aux: constant(0.0),
                initial: 1.0,
            };
            let base = relaxed_iteration_bound(&mk(nu.clone()), 8).unwrap();
            let mut bumped = nu.clone();
            bumped[k] += bump;
            let more = relaxed_iteration_bound(&mk(bumped), 8).unwrap();
            for n in 0..8 {
                prop_assert!(more.bound[n] >= base.bound[n]);
            }
        }
    }
}
