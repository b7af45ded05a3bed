use nalgebra::DVector;

use super::{solve_fixed_point, BlockMap, OperatorFamily, Resolvent, ResolventSpec};
use crate::blockspace::{BlockLayout, BlockVector};
use crate::error::{Error, Result};

/// Cyclic resolvents `T_i x = J_{A_i}(x_{i+1})` with `x_{m+1} = x_1`.
///
/// Solves `0 ∈ A_i x_i + x_i − x_{i+1}` for all `i`. With `η_i = 1/(1 + δ_i)`,
/// `‖T x − x̄‖² ≤ Σ_i η_i² ‖x_{i+1} − x̄_{i+1}‖²`, so the coefficient attached
/// to input block `j` is `τ_j = η_{j−1}²` (indices mod `m`).
#[derive(Debug, Clone)]
pub struct CyclicResolventFamily {
    layout: BlockLayout,
    resolvents: Vec<Resolvent>,
    tau: Vec<f64>,
    fixed_point: BlockVector,
}

impl CyclicResolventFamily {
    pub fn new(specs: &[ResolventSpec]) -> Result<Self> {
        let resolvents = specs.iter().map(Resolvent::new).collect::<Result<Vec<_>>>()?;
        let m = resolvents.len();
        if m == 0 {
            return Err(Error::Domain("cyclic family needs at least one block".into()));
        }
        let dim = resolvents[0].dim();
        if resolvents.iter().any(|r| r.dim() != dim) {
            return Err(Error::Conformance("cyclic resolvents must share one block dimension".into()));
        }
        let eta: Vec<f64> = resolvents.iter().map(|r| r.lipschitz(1.0)).collect();
        let tau = (0..m).map(|j| eta[(j + m - 1) % m].powi(2)).collect();
        let layout = BlockLayout::uniform(m, dim)?;
        let mut family = Self {
            fixed_point: BlockVector::zeros(&layout),
            layout,
            resolvents,
            tau,
        };
        family.fixed_point = solve_fixed_point(&family)?;
        Ok(family)
    }

    pub fn resolvent(&self, i: usize) -> &Resolvent {
        &self.resolvents[i]
    }
}

impl BlockMap for CyclicResolventFamily {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn apply_block(&self, i: usize, _n: usize, x: &BlockVector) -> Result<DVector<f64>> {
        x.check_layout(&self.layout)?;
        let next = (i + 1) % self.layout.num_blocks();
        self.resolvents[i].resolvent(1.0, x.block(next))
    }

    fn is_affine(&self) -> bool {
        self.resolvents.iter().all(Resolvent::is_affine)
    }
}

impl OperatorFamily for CyclicResolventFamily {
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
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadratic(delta: f64, center: f64) -> ResolventSpec {
        ResolventSpec::Quadratic { delta, center: vec![center] }
    }

    #[test]
    fn two_block_quadratic_fixed_point() {
        let f = CyclicResolventFamily::new(&[quadratic(1.0, 0.0), quadratic(1.0, 4.0)]).unwrap();
        // x̄_1 = (x̄_2 + 0)/2, x̄_2 = (x̄_1 + 4)/2, solved as a 2×2 system.
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let oracle = a.lu().solve(&DVector::from_vec(vec![0.0, 4.0])).unwrap();
        let xbar = f.fixed_point();
        assert!((xbar.block(0)[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((xbar.block(1)[0] - 8.0 / 3.0).abs() < 1e-14);
        assert!((xbar.block(0)[0] - oracle[0]).abs() < 1e-14);
        let image = f.apply(0, xbar).unwrap();
        assert!(image.dist_sq(xbar).unwrap().sqrt() < 1e-14);
    }

    #[test]
    fn shifted_tau_convention() {
        let f = CyclicResolventFamily::new(&[quadratic(1.0, 0.0), quadratic(3.0, 1.0)]).unwrap();
        assert_eq!(f.taus(0), vec![1.0 / 16.0, 1.0 / 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let x = BlockVector::from_scalars(&[rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
                .unwrap();
            let scale = 1.0 + x.dist_sq(f.fixed_point()).unwrap();
            assert!(certificate_gap(&f, 0, &x).unwrap() >= -1e-9 * scale);
        }
    }

    #[test]
    fn nonlinear_blocks_use_iteration() {
        let specs = [
            ResolventSpec::ElasticNet { l1: 0.5, delta: 1.0, center: Some(vec![2.0, -1.0]), dim: None },
            ResolventSpec::QuadraticBox {
                delta: 2.0,
                center: vec![0.0, 3.0],
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
            },
            ResolventSpec::Quadratic { delta: 0.5, center: vec![1.0, 1.0] },
        ];
        let f = CyclicResolventFamily::new(&specs).unwrap();
        assert!(!f.is_affine());
        let xbar = f.fixed_point();
        let image = f.apply(0, xbar).unwrap();
        assert!(image.dist_sq(xbar).unwrap().sqrt() <= 1e-12 * (1.0 + xbar.norm()));
    }

    #[test]
    fn mismatched_dimensions() {
        let specs = [quadratic(1.0, 0.0), ResolventSpec::Quadratic { delta: 1.0, center: vec![0.0, 0.0] }];
        assert!(matches!(CyclicResolventFamily::new(&specs), Err(Error::Conformance(_))));
        assert!(CyclicResolventFamily::new(&[quadratic(0.0, 1.0)]).is_err());
    }
}
