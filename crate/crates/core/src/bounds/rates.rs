use crate::error::{Error, Result};

/// Probability-normalized rate `ρ(p) = −ln(1 − (1 − χ)p)/p`, with
/// `ρ(0) = 1 − χ` by continuity.
pub fn rho(p: f64, chi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} is outside (0, 1]")));
    }
    if !(0.0..1.0).contains(&chi) {
        return Err(Error::Domain(format!("χ = {chi} is outside [0, 1)")));
    }
    let c = 1.0 - chi;
    if p == 0.0 {
        return Ok(c);
    }
    if c * p >= 1.0 {
        return Err(Error::Domain(format!("(1 − χ)p = {} leaves no contraction", c * p)));
    }
    Ok(-(-c * p).ln_1p() / p)
}

/// Bounds on `ρ(p)/ρ(1)` over `p ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub lo: f64,
    pub hi: f64,
    /// Set for `χ = 0`, where `ρ(1) = ∞` and the lower bound is 0 by convention.
    pub degenerate: bool,
}

/// `(−(1 − χ)/ln χ, 1)`.
pub fn rho_ratio_bounds(chi: f64) -> Result<RatioBounds> {
    if !(0.0..1.0).contains(&chi) {
        return Err(Error::Domain(format!("χ = {chi} is outside [0, 1)")));
    }
    if chi == 0.0 {
        return Ok(RatioBounds { lo: 0.0, hi: 1.0, degenerate: true });
    }
    // −ln χ = −ln_1p(χ − 1) keeps precision as χ → 1
    Ok(RatioBounds {
        lo: (1.0 - chi) / -(chi - 1.0).ln_1p(),
        hi: 1.0,
        degenerate: false,
    })
}

/// Single-block probabilities `p_i ∝ 1/(1 − τ_i)`, which equalize `p_i(1 − τ_i)`
/// and so maximize `min_i p_i(1 − τ_i)` over the simplex.
pub fn optimal_single_block_probs(tau: &[f64]) -> Result<Vec<f64>> {
    if tau.is_empty() {
        return Err(Error::Domain("no blocks".into()));
    }
    if let Some(t) = tau.iter().find(|t| !(0.0..1.0).contains(*t)) {
        return Err(Error::Domain(format!("τ = {t} is outside [0, 1)")));
    }
    let inv: Vec<f64> = tau.iter().map(|t| 1.0 / (1.0 - t)).collect();
    let total: f64 = inv.iter().sum();
    Ok(inv.iter().map(|v| v / total).collect())
}

/// `min_i p_i (1 − τ_i)`.
pub fn min_effective_progress(p: &[f64], tau: &[f64]) -> f64 {
    p.iter().zip(tau).map(|(p, t)| p * (1.0 - t)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_values() {
        assert!((rho(1.0, 0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(rho(0.0, 0.5).unwrap(), 0.5);
        assert!((rho(1e-12, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(rho(1.0, 0.0).is_err());
        assert!(rho(1.5, 0.5).is_err());
    }

    #[test]
    fn ratio_lower_bound_at_point_two() {
        let b = rho_ratio_bounds(0.2).unwrap();
        assert!((b.lo - 0.4971).abs() < 1e-4);
        assert!((0.49..=0.50).contains(&b.lo));
        assert_eq!(b.hi, 1.0);
        assert!(rho_ratio_bounds(0.0).unwrap().degenerate);
        assert!((rho_ratio_bounds(0.999).unwrap().lo - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ratio_grid_is_bounded_and_increasing() {
        for chi in [0.05, 0.2, 0.5, 0.8, 0.95] {
            let b = rho_ratio_bounds(chi).unwrap();
            let r1 = rho(1.0, chi).unwrap();
            let mut prev = 0.0;
            for k in 1..=100 {
                let p = k as f64 / 100.0;
                let ratio = rho(p, chi).unwrap() / r1;
                assert!(ratio >= b.lo - 1e-15 && ratio <= b.hi + 1e-15, "χ={chi} p={p}: {ratio}");
                assert!(ratio >= prev);
                prev = ratio;
            }
        }
    }

    #[test]
    fn optimal_probabilities() {
        let p = optimal_single_block_probs(&[0.5, 0.75]).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(optimal_single_block_probs(&[0.3; 4]).unwrap(), vec![0.25; 4]);
        assert!(optimal_single_block_probs(&[0.3, 1.0]).is_err());
    }

    #[test]
    fn optimal_beats_simplex_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let tau: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..0.95)).collect();
            let best = min_effective_progress(&optimal_single_block_probs(&tau).unwrap(), &tau);
            for a in 0..=100 {
                for b in 0..=(100 - a) {
                    let p = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
                    assert!(min_effective_progress(&p, &tau) <= best + 1e-15);
                }
            }
        }
    }
}
