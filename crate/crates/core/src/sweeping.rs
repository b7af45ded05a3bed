//! Activation laws over `D = {0,1}^m \ {0}`.
//!
//! A law is sampled once per iteration, i.i.d. across iterations, from a
//! stream that nothing state-dependent ever touches.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest `m` for which a law can be tabulated over all of `D`.
pub const MAX_TABLE_BLOCKS: usize = 20;

/// Rejection cap for the conditioned Bernoulli sampler.
pub const MAX_REJECTIONS: usize = 1_000_000;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A nonzero activation pattern; character `i` of the bitstring is block `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationMask(Vec<bool>);

impl ActivationMask {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.iter().any(|&b| b) {
            Ok(Self(bits))
        } else {
            Err(Error::Domain("activation mask must have at least one active block".into()))
        }
    }

    pub fn all(m: usize) -> Self {
        Self(vec![true; m])
    }

    pub fn single(m: usize, i: usize) -> Self {
        let mut bits = vec![false; m];
        bits[i] = true;
        Self(bits)
    }

    /// Mask whose bit `i` is bit `i` of `index` (`index ∈ [1, 2^m)`).
    pub fn from_index(m: usize, index: u64) -> Result<Self> {
        if m > 63 || index == 0 || index >> m != 0 {
            return Err(Error::Domain(format!("index {index} is not a nonzero mask over {m} blocks")));
        }
        Self::new((0..m).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| if b { acc | 1 << i } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_active(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for ActivationMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ActivationMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

#[derive(Debug, Clone)]
enum LawKind {
    AllBlocks,
    SingleBlock { weights: Vec<f64>, sampler: WeightedIndex<f64> },
    Bernoulli { q: f64 },
    Uniform,
    Explicit { table: Vec<(ActivationMask, f64)>, sampler: WeightedIndex<f64> },
}

/// Distribution of the activation variable `ε_n`.
#[derive(Debug, Clone)]
pub struct SweepingLaw {
    m: usize,
    kind: LawKind,
}

impl SweepingLaw {
    /// Every block at every iteration.
    pub fn all_blocks(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self { m, kind: LawKind::AllBlocks })
    }

    /// Exactly one block per iteration, block `i` with probability `q_i / Σ q`.
    pub fn single_block(weights: Vec<f64>) -> Result<Self> {
        check_m(weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidLaw("single-block weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidLaw("single-block weights sum to zero".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let sampler = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidLaw(format!("single-block weights: {e}")))?;
        Ok(Self {
            m: weights.len(),
            kind: LawKind::SingleBlock { weights, sampler },
        })
    }

    /// Independent `Bernoulli(q)` bits, conditioned on the mask being nonzero.
    pub fn bernoulli(m: usize, q: f64) -> Result<Self> {
        check_m(m)?;
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidLaw(format!("Bernoulli parameter {q} is outside (0, 1]")));
        }
        Ok(Self { m, kind: LawKind::Bernoulli { q } })
    }

    /// Uniform over the `2^m − 1` nonzero masks.
    pub fn uniform(m: usize) -> Result<Self> {
        check_m(m)?;
        if m > 63 {
            return Err(Error::InvalidLaw("uniform law supports at most 63 blocks".into()));
        }
        Ok(Self { m, kind: LawKind::Uniform })
    }

    /// An explicit probability table over `D`; masks not listed have probability 0.
    pub fn explicit(m: usize, entries: Vec<(ActivationMask, f64)>) -> Result<Self> {
        check_m(m)?;
        if m > MAX_TABLE_BLOCKS {
            return Err(Error::InvalidLaw(format!(
                "explicit tables support at most {MAX_TABLE_BLOCKS} blocks"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (mask, prob) in &entries {
            if mask.len() != m {
                return Err(Error::InvalidLaw(format!("mask {mask} does not have {m} bits")));
            }
            if !seen.insert(mask.index()) {
                return Err(Error::InvalidLaw(format!("mask {mask} listed twice")));
            }
            if !(prob.is_finite() && *prob >= 0.0) {
                return Err(Error::InvalidLaw(format!("probability of {mask} is {prob}")));
            }
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
        }
        let sampler = WeightedIndex::new(entries.iter().map(|(_, p)| *p))
            .map_err(|e| Error::InvalidLaw(format!("explicit table: {e}")))?;
        Ok(Self {
            m,
            kind: LawKind::Explicit { table: entries, sampler },
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.m
    }

    /// Draw one mask. Every call is independent of every other.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ActivationMask> {
        match &self.kind {
            LawKind::AllBlocks => Ok(ActivationMask::all(self.m)),
            LawKind::SingleBlock { sampler, .. } => Ok(ActivationMask::single(self.m, sampler.sample(rng))),
            LawKind::Bernoulli { q } => sample_conditioned(self.m, *q, rng),
            LawKind::Uniform => sample_conditioned(self.m, 0.5, rng),
            LawKind::Explicit { table, sampler } => Ok(table[sampler.sample(rng)].0.clone()),
        }
    }

    /// Exact marginals `p_i = P[ε_i = 1]`; every one must be positive.
    pub fn marginals(&self) -> Result<Vec<f64>> {
        let m = self.m;
        let p = match &self.kind {
            LawKind::AllBlocks => vec![1.0; m],
            LawKind::SingleBlock { weights, .. } => weights.clone(),
            LawKind::Bernoulli { q } => {
                // 1 - (1-q)^m, accurate for small q
                let nonzero = -((m as f64) * (-q).ln_1p()).exp_m1();
                vec![(q / nonzero).min(1.0); m]
            }
            LawKind::Uniform => {
                let p = 0.5 / (1.0 - 0.5f64.powi(m as i32));
                vec![p; m]
            }
            LawKind::Explicit { table, .. } => table_marginals(m, table),
        };
        if let Some(i) = p.iter().position(|&pi| pi <= 0.0) {
            return Err(Error::InvalidLaw(format!("block {i} is never activated (p = 0)")));
        }
        Ok(p)
    }

    /// Masks with positive probability and their probabilities.
    pub fn table(&self) -> Result<Vec<(ActivationMask, f64)>> {
        let m = self.m;
        if m > MAX_TABLE_BLOCKS {
            return Err(Error::InvalidLaw(format!(
                "cannot tabulate a law over {m} blocks (limit {MAX_TABLE_BLOCKS})"
            )));
        }
        let all_masks = || (1u64..1 << m).map(move |k| ActivationMask::from_index(m, k).unwrap());
        let table = match &self.kind {
            LawKind::AllBlocks => vec![(ActivationMask::all(m), 1.0)],
            LawKind::SingleBlock { weights, .. } => weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(i, w)| (ActivationMask::single(m, i), *w))
                .collect(),
            LawKind::Bernoulli { q } => {
                let nonzero = -((m as f64) * (-q).ln_1p()).exp_m1();
                all_masks()
                    .map(|mask| {
                        let k = mask.count_active() as i32;
                        let prob = q.powi(k) * (1.0 - q).powi(m as i32 - k) / nonzero;
                        (mask, prob)
                    })
                    .filter(|(_, prob)| *prob > 0.0)
                    .collect()
            }
            LawKind::Uniform => {
                let prob = 1.0 / ((1u64 << m) - 1) as f64;
                all_masks().map(|mask| (mask, prob)).collect()
            }
            LawKind::Explicit { table, .. } => table.iter().filter(|(_, p)| *p > 0.0).cloned().collect(),
        };
        Ok(table)
    }
}

/// `p_i = Σ_{ε ∈ D, ε_i = 1} P[ε]`.
pub fn table_marginals(m: usize, table: &[(ActivationMask, f64)]) -> Vec<f64> {
    let mut p = vec![0.0; m];
    for (mask, prob) in table {
        for (i, pi) in p.iter_mut().enumerate() {
            if mask.is_active(i) {
                *pi += prob;
            }
        }
    }
    p
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidLaw("a law needs at least one block".into()))
    } else {
        Ok(())
    }
}

fn sample_conditioned<R: Rng + ?Sized>(m: usize, q: f64, rng: &mut R) -> Result<ActivationMask> {
    for _ in 0..MAX_REJECTIONS {
        let bits: Vec<bool> = (0..m).map(|_| rng.random_bool(q)).collect();
        if bits.iter().any(|&b| b) {
            return Ok(ActivationMask(bits));
        }
    }
    Err(Error::DegenerateSampler(MAX_REJECTIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frequencies(law: &SweepingLaw, draws: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; law.num_blocks()];
        for _ in 0..draws {
            let mask = law.sample(&mut rng).unwrap();
            assert!(mask.count_active() > 0);
            for (i, c) in counts.iter_mut().enumerate() {
                if mask.is_active(i) {
                    *c += 1;
                }
            }
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn all_blocks_is_deterministic() {
        let law = SweepingLaw::all_blocks(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(law.sample(&mut rng).unwrap().to_string(), "111");
        }
        assert_eq!(law.marginals().unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn degenerate_single_block_law() {
        let law = SweepingLaw::single_block(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(law.sample(&mut rng).unwrap().to_string(), "100");
        }
        assert!(matches!(law.marginals(), Err(Error::InvalidLaw(_))));
    }

    #[test]
    fn uniform_two_block_law_by_enumeration() {
        let law = SweepingLaw::uniform(2).unwrap();
        let p = law.marginals().unwrap();
        // D = {01, 10, 11}; each block is active in 2 of 3 masks.
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(law.sample(&mut rng).unwrap().to_string()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 3);
        let sd = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
        for mask in ["01", "10", "11"] {
            let f = counts[mask] as f64 / draws as f64;
            assert!((f - 1.0 / 3.0).abs() < 5.0 * sd, "{mask}: {f}");
        }
    }

    #[test]
    fn bernoulli_marginal_by_enumeration() {
        // Outcomes 00, 01, 10, 11 each have probability 1/4; drop 00.
        let law = SweepingLaw::bernoulli(2, 0.5).unwrap();
        let p = law.marginals().unwrap();
        assert!((p[0] - 0.5 / 0.75).abs() < 1e-15);
        let brute = table_marginals(2, &law.table().unwrap());
        assert!((brute[0] - p[0]).abs() < 1e-15);
    }

    #[test]
    fn closed_form_marginals_match_tables() {
        let laws = [
            SweepingLaw::all_blocks(4).unwrap(),
            SweepingLaw::single_block(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            SweepingLaw::bernoulli(4, 0.3).unwrap(),
            SweepingLaw::bernoulli(5, 1e-4).unwrap(),
            SweepingLaw::uniform(5).unwrap(),
        ];
        for law in &laws {
            let table = law.table().unwrap();
            let total: f64 = table.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let brute = table_marginals(law.num_blocks(), &table);
            for (a, b) in law.marginals().unwrap().iter().zip(&brute) {
                assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{law:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn explicit_law_validation() {
        let mask = |s: &str| s.parse::<ActivationMask>().unwrap();
        assert!(SweepingLaw::explicit(2, vec![(mask("10"), 0.5), (mask("01"), 0.4)]).is_err());
        assert!(SweepingLaw::explicit(2, vec![(mask("10"), 0.5), (mask("10"), 0.5)]).is_err());
        assert!(SweepingLaw::explicit(2, vec![(mask("100"), 1.0)]).is_err());
        assert!("00".parse::<ActivationMask>().is_err());
        let law = SweepingLaw::explicit(2, vec![(mask("10"), 0.25), (mask("11"), 0.75)]).unwrap();
        assert!(matches!(law.marginals(), Ok(p) if p == vec![1.0, 0.75]));
        let law = SweepingLaw::explicit(2, vec![(mask("10"), 1.0)]).unwrap();
        assert!(law.marginals().is_err());
    }

    #[test]
    fn empirical_frequencies_match_marginals() {
        let mask = |s: &str| s.parse::<ActivationMask>().unwrap();
        let laws = [
            SweepingLaw::single_block(vec![0.2, 0.3, 0.5]).unwrap(),
            SweepingLaw::bernoulli(3, 0.25).unwrap(),
            SweepingLaw::uniform(4).unwrap(),
            SweepingLaw::explicit(3, vec![(mask("100"), 0.1), (mask("011"), 0.6), (mask("111"), 0.3)]).unwrap(),
        ];
        let draws = 100_000;
        for (k, law) in laws.iter().enumerate() {
            let f = frequencies(law, draws, 100 + k as u64);
            for (fi, pi) in f.iter().zip(law.marginals().unwrap()) {
                let tol = 5.0 * (pi * (1.0 - pi) / draws as f64).sqrt();
                assert!((fi - pi).abs() <= tol, "{law:?}: {fi} vs {pi}");
            }
        }
    }

    #[test]
    fn mask_index_round_trip() {
        for k in 1..8u64 {
            let mask = ActivationMask::from_index(3, k).unwrap();
            assert_eq!(mask.index(), k);
            assert_eq!(mask.to_string().parse::<ActivationMask>().unwrap(), mask);
        }
        assert!(ActivationMask::from_index(3, 0).is_err());
        assert!(ActivationMask::from_index(3, 8).is_err());
    }
}
