use crate::error::{Error, Result};

fn check_nonnegative(name: &str, values: &[f64], len: usize) -> Result<()> {
    if values.len() < len {
        return Err(Error::Conformance(format!("{name} has {} terms, need {len}", values.len())));
    }
    if let Some((k, v)) = values[..len].iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("{name}[{k}] = {v} must be finite and nonnegative")));
    }
    Ok(())
}

/// `s̄_n = Σ_{k≤n} (∏_{ℓ=k+1}^{n} χ_ℓ) s_k`, evaluated as `s̄_n = χ_n s̄_{n−1} + s_n`.
pub fn accumulate(chi: &[f64], terms: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    chi.iter()
        .zip(terms)
        .map(|(c, t)| {
            acc = c * acc + t;
            acc
        })
        .collect()
}

/// `∏_{k≤n} χ_k` for each `n`.
pub fn running_products(chi: &[f64]) -> Vec<f64> {
    let mut acc = 1.0;
    chi.iter()
        .map(|c| {
            acc *= c;
            acc
        })
        .collect()
}

/// Returns `ᾱ_{n+1} = (∏_{k≤n} χ_k) α_0 + η̄_n − ϑ̄_n` for `n = 0..N`.
pub fn recursion_bound(alpha0: f64, chi: &[f64], eta: &[f64], vartheta: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if !(alpha0 >= 0.0 && alpha0.is_finite()) {
        return Err(Error::Domain(format!("α_0 = {alpha0} must be finite and nonnegative")));
    }
    check_nonnegative("χ", chi, horizon)?;
    check_nonnegative("η", eta, horizon)?;
    check_nonnegative("ϑ", vartheta, horizon)?;
    let chi = &chi[..horizon];
    let products = running_products(chi);
    let eta_bar = accumulate(chi, &eta[..horizon]);
    let vartheta_bar = accumulate(chi, &vartheta[..horizon]);
    Ok((0..horizon)
        .map(|n| products[n] * alpha0 + eta_bar[n] - vartheta_bar[n])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn double_sum(chi: &[f64], terms: &[f64], n: usize) -> f64 {
        (0..=n)
            .map(|k| ((k + 1)..=n).map(|l| chi[l]).product::<f64>() * terms[k])
            .sum()
    }

    #[test]
    fn pure_geometric() {
        let b = recursion_bound(2.0, &[0.5; 6], &[0.0; 6], &[0.0; 6], 6).unwrap();
        for (n, v) in b.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(n as i32 + 1) * 2.0);
        }
    }

    #[test]
    fn annihilating_product() {
        let eta = [0.3, 0.1, 0.7, 0.2];
        let b = recursion_bound(5.0, &[0.0; 4], &eta, &[0.0; 4], 4).unwrap();
        assert_eq!(b, eta.to_vec());
    }

    #[test]
    fn recursion_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let chi: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.5)).collect();
            let eta: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..2.0)).collect();
            let bar = accumulate(&chi, &eta);
            for n in 0..8 {
                let oracle = double_sum(&chi, &eta, n);
                assert!((bar[n] - oracle).abs() <= 1e-12 * oracle.abs().max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn rejects_negative_and_short_inputs() {
        assert!(matches!(recursion_bound(1.0, &[0.5, -0.1], &[0.0; 2], &[0.0; 2], 2), Err(Error::Domain(_))));
        assert!(matches!(recursion_bound(1.0, &[0.5], &[0.0; 2], &[0.0; 2], 2), Err(Error::Conformance(_))));
        assert!(recursion_bound(-1.0, &[0.5], &[0.0], &[0.0], 1).is_err());
    }
}
