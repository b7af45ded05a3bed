//! Block-structured vectors over `H = H_1 ⊕ … ⊕ H_m` with each `H_i = R^{d_i}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block dimensions `(d_1, …, d_m)` of a problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockLayout(Vec<usize>);

impl BlockLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Domain("a layout needs at least one block".into()));
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Domain(format!("block {i} has dimension 0")));
        }
        Ok(Self(dims))
    }

    /// `m` blocks of the same dimension.
    pub fn uniform(m: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; m])
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }

    /// Offset of block `i` in the flattened representation.
    pub fn offset(&self, i: usize) -> usize {
        self.0[..i].iter().sum()
    }
}

/// An element `x = (x_1, …, x_m)` of the direct sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct BlockVector {
    blocks: Vec<DVector<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for BlockVector {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_blocks(blocks.into_iter().map(DVector::from_vec).collect())
    }
}

impl From<BlockVector> for Vec<Vec<f64>> {
    fn from(x: BlockVector) -> Self {
        x.blocks.into_iter().map(|b| b.as_slice().to_vec()).collect()
    }
}

impl BlockVector {
    pub fn from_blocks(blocks: Vec<DVector<f64>>) -> Result<Self> {
        let x = Self { blocks };
        BlockLayout::new(x.blocks.iter().map(|b| b.len()).collect())?;
        Ok(x)
    }

    /// Scalar blocks `(v_1, …, v_m)`.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_blocks(values.iter().map(|&v| DVector::from_element(1, v)).collect())
    }

    pub fn zeros(layout: &BlockLayout) -> Self {
        Self {
            blocks: layout.dims().iter().map(|&d| DVector::zeros(d)).collect(),
        }
    }

    pub fn from_flat(layout: &BlockLayout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.total_dim() {
            return Err(Error::Conformance(format!(
                "flat vector has length {}, layout needs {}",
                flat.len(),
                layout.total_dim()
            )));
        }
        let mut offset = 0;
        let blocks = layout
            .dims()
            .iter()
            .map(|&d| {
                let b = DVector::from_column_slice(&flat[offset..offset + d]);
                offset += d;
                b
            })
            .collect();
        Ok(Self { blocks })
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let data: Vec<f64> = self.blocks.iter().flat_map(|b| b.iter().copied()).collect();
        DVector::from_vec(data)
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout(self.blocks.iter().map(|b| b.len()).collect())
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &DVector<f64> {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut DVector<f64> {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[DVector<f64>] {
        &self.blocks
    }

    pub fn conforms_to(&self, layout: &BlockLayout) -> bool {
        self.blocks.len() == layout.num_blocks()
            && self.blocks.iter().zip(layout.dims()).all(|(b, &d)| b.len() == d)
    }

    pub fn check_layout(&self, layout: &BlockLayout) -> Result<()> {
        if self.conforms_to(layout) {
            Ok(())
        } else {
            Err(Error::Conformance(format!(
                "block dimensions {:?} do not match layout {:?}",
                self.layout().dims(),
                layout.dims()
            )))
        }
    }

    fn check_conformant(&self, other: &Self) -> Result<()> {
        other.check_layout(&self.layout())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_conformant(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_conformant(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    /// Per-block squared norms `‖x_i‖²`.
    pub fn block_norms_sq(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.norm_squared()).collect()
    }

    /// `‖x‖² = Σ_i ‖x_i‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖x - y‖²` without allocating the difference.
    pub fn dist_sq(&self, other: &Self) -> Result<f64> {
        self.check_conformant(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum::<f64>())
            .sum())
    }
}

/// Positive block weights `(ω_1, …, ω_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(omega: Vec<f64>) -> Result<Self> {
        Self::new(omega)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl WeightVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Domain("weight vector is empty".into()));
        }
        if let Some((i, w)) = omega
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Domain(format!("weight {i} must be positive, got {w}")));
        }
        Ok(Self(omega))
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![1.0; m])
    }

    /// `ω_i = 1/p_i`.
    pub fn inverse_of(p: &[f64]) -> Result<Self> {
        check_probabilities(p)?;
        Self::new(p.iter().map(|pi| 1.0 / pi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `|||x|||² = Σ_i ω_i ‖x_i‖²`.
pub fn weighted_norm_sq(x: &BlockVector, w: &WeightVector) -> Result<f64> {
    if x.num_blocks() != w.len() {
        return Err(Error::Conformance(format!(
            "vector has {} blocks, weights have {}",
            x.num_blocks(),
            w.len()
        )));
    }
    Ok(x
        .blocks()
        .iter()
        .zip(w.as_slice())
        .map(|(b, wi)| wi * b.norm_squared())
        .sum())
}

/// Factors `(min p_i, max p_i)` such that, with `ω_i = 1/p_i`,
/// `min p · |||x|||² ≤ ‖x‖² ≤ max p · |||x|||²`.
pub fn norm_equivalence_factors(p: &[f64]) -> Result<(f64, f64)> {
    check_probabilities(p)?;
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain("no marginals given".into()));
    }
    match p.iter().enumerate().find(|(_, &pi)| !(pi > 0.0 && pi <= 1.0)) {
        Some((i, pi)) => Err(Error::Domain(format!("p[{i}] = {pi} is outside (0, 1]"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vec_of(blocks: &[&[f64]]) -> BlockVector {
        BlockVector::try_from(blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    // Independent scalar loop over the flattened storage.
    fn weighted_norm_sq_loop(blocks: &[&[f64]], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, b) in blocks.iter().enumerate() {
            for v in b.iter() {
                acc += w[i] * v * v;
            }
        }
        acc
    }

    #[test]
    fn weighted_norm_of_zero_is_zero() {
        let layout = BlockLayout::new(vec![2, 1, 3]).unwrap();
        let w = WeightVector::new(vec![0.3, 2.0, 7.0]).unwrap();
        assert_eq!(weighted_norm_sq(&BlockVector::zeros(&layout), &w).unwrap(), 0.0);
    }

    #[test]
    fn unit_weights_give_plain_norm() {
        let x = vec_of(&[&[3.0], &[4.0]]);
        assert_eq!(weighted_norm_sq(&x, &WeightVector::ones(2)).unwrap(), 25.0);
        assert_eq!(x.norm_sq(), 25.0);
    }

    #[test]
    fn weighted_norm_matches_scalar_loop() {
        let blocks: [&[f64]; 2] = [&[1.0, 1.0], &[2.0]];
        let w = [2.0, 0.5];
        let x = vec_of(&blocks);
        let got = weighted_norm_sq(&x, &WeightVector::new(w.to_vec()).unwrap()).unwrap();
        assert_eq!(got, weighted_norm_sq_loop(&blocks, &w));
        assert_eq!(got, 6.0);
    }

    #[test]
    fn mismatched_weights_are_rejected() {
        let x = vec_of(&[&[1.0], &[2.0]]);
        let w = WeightVector::ones(3);
        assert!(matches!(weighted_norm_sq(&x, &w), Err(Error::Conformance(_))));
        let y = vec_of(&[&[1.0, 0.0], &[2.0]]);
        assert!(matches!(x.sub(&y), Err(Error::Conformance(_))));
    }

    #[test]
    fn nonpositive_weights_are_rejected() {
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![1.0, -2.0]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn equivalence_factors_are_min_and_max() {
        assert_eq!(norm_equivalence_factors(&[1.0, 1.0, 1.0]).unwrap(), (1.0, 1.0));
        assert_eq!(norm_equivalence_factors(&[0.5, 0.25]).unwrap(), (0.25, 0.5));
        assert!(matches!(norm_equivalence_factors(&[0.5, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(norm_equivalence_factors(&[1.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn sandwich_inequality_holds_on_samples() {
        let p = [0.5, 0.25];
        let (lo, hi) = norm_equivalence_factors(&p).unwrap();
        let w = WeightVector::inverse_of(&p).unwrap();
        let layout = BlockLayout::new(vec![3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let flat: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
            let x = BlockVector::from_flat(&layout, &flat).unwrap();
            let plain = x.norm_sq();
            let weighted = weighted_norm_sq(&x, &w).unwrap();
            assert!(lo * weighted <= plain * (1.0 + 1e-15));
            assert!(plain <= hi * weighted * (1.0 + 1e-15));
        }
    }

    #[test]
    fn flat_round_trip() {
        let layout = BlockLayout::new(vec![2, 1, 3]).unwrap();
        let flat = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = BlockVector::from_flat(&layout, &flat).unwrap();
        assert_eq!(x.block(1)[0], 3.0);
        assert_eq!(x.to_flat().as_slice(), &flat);
        assert_eq!(layout.offset(2), 3);
    }

    proptest! {
        #[test]
        fn weighted_norm_is_nonnegative_and_quadratic(
            values in prop::collection::vec(-1e3f64..1e3, 4),
            weights in prop::collection::vec(1e-3f64..1e3, 2),
            c in -20.0f64..20.0,
        ) {
            let layout = BlockLayout::new(vec![3, 1]).unwrap();
            let x = BlockVector::from_flat(&layout, &values).unwrap();
            let w = WeightVector::new(weights).unwrap();
            let base = weighted_norm_sq(&x, &w).unwrap();
            prop_assert!(base >= 0.0);
            prop_assert_eq!(base == 0.0, values.iter().all(|v| *v == 0.0));
            let scaled = weighted_norm_sq(&x.scale(c), &w).unwrap();
            prop_assert!((scaled - c * c * base).abs() <= 1e-10 * (1.0 + c * c * base));
        }
    }
}
