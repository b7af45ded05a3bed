use nalgebra::{DMatrix, DVector};

use super::{solve_fixed_point, BlockMap, OperatorFamily};
use crate::blockspace::{BlockLayout, BlockVector};
use crate::error::{Error, Result};

/// Stationary affine family `T x = L x + l` on the flattened space.
///
/// Two certificates are computed and the one with the smaller largest
/// coefficient is kept:
///
/// - spectral: `τ_j = ‖L‖₂²` for every block;
/// - Schur: with `N_{ij} = ‖L_{ij}‖₂` and row sums `r_i = Σ_j N_{ij}`,
///   Cauchy–Schwarz gives `‖L y‖² ≤ Σ_i r_i Σ_j N_{ij}‖y_j‖²`, so
///   `τ_j = Σ_i r_i N_{ij}`.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    layout: BlockLayout,
    linear: DMatrix<f64>,
    offset: DVector<f64>,
    tau: Vec<f64>,
    fixed_point: BlockVector,
}

impl AffineFamily {
    pub fn new(layout: BlockLayout, linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let dim = layout.total_dim();
        if linear.shape() != (dim, dim) || offset.len() != dim {
            return Err(Error::Conformance(format!(
                "affine map is {:?} with offset {}, layout has total dimension {dim}",
                linear.shape(),
                offset.len()
            )));
        }
        if linear.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("affine map has non-finite entries".into()));
        }
        let tau = certificate(&layout, &linear);
        if let Some((i, t)) = tau.iter().enumerate().find(|(_, t)| **t >= 1.0) {
            return Err(Error::Domain(format!(
                "no contraction certificate: τ_{i} = {t} ≥ 1"
            )));
        }
        let mut family = Self {
            fixed_point: BlockVector::zeros(&layout),
            layout,
            linear,
            offset,
            tau,
        };
        family.fixed_point = solve_fixed_point(&family)?;
        Ok(family)
    }

    /// Scalar blocks: `T x = L x + l` with `x ∈ R^m`.
    pub fn scalar(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        Self::new(BlockLayout::uniform(offset.len(), 1)?, linear, offset)
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }
}

fn spectral_norm(m: DMatrix<f64>) -> f64 {
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    m.svd(false, false).singular_values.max()
}

fn certificate(layout: &BlockLayout, linear: &DMatrix<f64>) -> Vec<f64> {
    let m = layout.num_blocks();
    let norms = DMatrix::from_fn(m, m, |i, j| {
        let block = linear
            .view((layout.offset(i), layout.offset(j)), (layout.dim(i), layout.dim(j)))
            .clone_owned();
        spectral_norm(block)
    });
    let row_sums: Vec<f64> = (0..m).map(|i| norms.row(i).sum()).collect();
    let schur: Vec<f64> = (0..m)
        .map(|j| (0..m).map(|i| row_sums[i] * norms[(i, j)]).sum())
        .collect();
    let spectral = spectral_norm(linear.clone()).powi(2);
    let schur_max = schur.iter().copied().fold(0.0, f64::max);
    if schur_max <= spectral {
        schur
    } else {
        vec![spectral; m]
    }
}

impl BlockMap for AffineFamily {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn apply_block(&self, i: usize, _n: usize, x: &BlockVector) -> Result<DVector<f64>> {
        x.check_layout(&self.layout)?;
        let row = self.layout.offset(i);
        let rows = self.layout.dim(i);
        let mut out = self.offset.rows(row, rows).clone_owned();
        for j in 0..self.layout.num_blocks() {
            let col = self.layout.offset(j);
            out += self.linear.view((row, col), (rows, self.layout.dim(j))) * x.block(j);
        }
        Ok(out)
    }

    fn is_affine(&self) -> bool {
        true
    }
}

impl OperatorFamily for AffineFamily {
    fn tau(&self, i: usize, _n: usize) -> f64 {
        self.tau[i]
    }

    fn tau_limsup(&self, i: usize) -> f64 {
        self.tau[i]
    }

    fn fixed_point(&self) -> &BlockVector {
        &self.fixed_point
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::certificate_gap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_identity_has_zero_fixed_point() {
        let f = AffineFamily::scalar(DMatrix::identity(3, 3) * 0.5, DVector::zeros(3)).unwrap();
        assert_eq!(f.fixed_point().norm(), 0.0);
        assert_eq!(f.taus(0), vec![0.25; 3]);
    }

    #[test]
    fn swap_map_certificate() {
        let l = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let f = AffineFamily::scalar(l, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        // x̄_1 = 0.5 x̄_2 + 1, x̄_2 = 0.5 x̄_1 + 2  ⇒  x̄ = (8/3, 10/3)
        let xbar = f.fixed_point();
        assert!((xbar.block(0)[0] - 8.0 / 3.0).abs() < 1e-14);
        assert!((xbar.block(1)[0] - 10.0 / 3.0).abs() < 1e-14);
        assert_eq!(f.taus(0), vec![0.25, 0.25]);
    }

    #[test]
    fn sampled_certificate_on_block_layout() {
        let layout = BlockLayout::new(vec![2, 1, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-0.15..0.15));
        let b = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let f = AffineFamily::new(layout.clone(), l, b).unwrap();
        for _ in 0..1000 {
            let flat: Vec<f64> = (0..6).map(|_| rng.random_range(-10.0..10.0)).collect();
            let x = BlockVector::from_flat(&layout, &flat).unwrap();
            let scale = 1.0 + x.dist_sq(f.fixed_point()).unwrap();
            assert!(certificate_gap(&f, 0, &x).unwrap() >= -1e-9 * scale);
        }
    }

    #[test]
    fn expansive_map_is_rejected() {
        let r = AffineFamily::scalar(DMatrix::identity(2, 2) * 1.1, DVector::zeros(2));
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
