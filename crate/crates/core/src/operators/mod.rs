//! Operator families `(T_n)` with blockwise contraction certificates
//!
//! ```text
//! ‖T_n x − x̄‖² ≤ Σ_i τ_{i,n} ‖x_i − x̄_i‖²
//! ```
//!
//! and a common fixed point `x̄` computed when the family is built.

mod affine;
mod cyclic;
mod fixed_point;
mod forward_backward;
mod resolvent;

use nalgebra::DVector;

use crate::blockspace::{BlockLayout, BlockVector};
use crate::error::Result;

pub use affine::AffineFamily;
pub use cyclic::CyclicResolventFamily;
pub use fixed_point::{affine_form, fixed_point_residual, solve_fixed_point, FIXED_POINT_TOL, MAX_FIXED_POINT_ITERATIONS};
pub use forward_backward::{zeta, Coupling, CouplingSpec, ForwardBackwardFamily, DEFAULT_LARGE_BETA};
pub use resolvent::{matrix_from_rows, soft_threshold, Resolvent, ResolventSpec};

/// A block map `x ↦ (T_{1,n} x, …, T_{m,n} x)`.
pub trait BlockMap: Send + Sync {
    fn layout(&self) -> &BlockLayout;

    /// `T_{i,n} x`, evaluated at the full pre-step vector `x`.
    fn apply_block(&self, i: usize, n: usize, x: &BlockVector) -> Result<DVector<f64>>;

    /// Whether every `T_n` is affine, so that its fixed point is a linear solve.
    fn is_affine(&self) -> bool {
        false
    }

    fn apply(&self, n: usize, x: &BlockVector) -> Result<BlockVector> {
        x.check_layout(self.layout())?;
        let blocks = (0..self.layout().num_blocks())
            .map(|i| self.apply_block(i, n, x))
            .collect::<Result<Vec<_>>>()?;
        BlockVector::from_blocks(blocks)
    }
}

/// A family satisfying the blockwise contraction certificate with common fixed point.
pub trait OperatorFamily: BlockMap {
    /// `τ_{i,n} ∈ [0, 1)`.
    fn tau(&self, i: usize, n: usize) -> f64;

    /// `lim sup_n τ_{i,n}`.
    fn tau_limsup(&self, i: usize) -> f64;

    /// The common fixed point `x̄`.
    fn fixed_point(&self) -> &BlockVector;

    /// Fails if the family's parameters are inadmissible at iteration `n`.
    fn check_iteration(&self, _n: usize) -> Result<()> {
        Ok(())
    }

    fn num_blocks(&self) -> usize {
        self.layout().num_blocks()
    }

    fn taus(&self, n: usize) -> Vec<f64> {
        (0..self.num_blocks()).map(|i| self.tau(i, n)).collect()
    }
}

/// `Σ_i τ_{i,n}‖x_i − x̄_i‖² − ‖T_n x − x̄‖²`; nonnegative when the certificate holds at `x`.
pub fn certificate_gap(family: &dyn OperatorFamily, n: usize, x: &BlockVector) -> Result<f64> {
    let fixed = family.fixed_point();
    let diff = x.sub(fixed)?;
    let rhs: f64 = diff
        .block_norms_sq()
        .iter()
        .enumerate()
        .map(|(i, d)| family.tau(i, n) * d)
        .sum();
    let lhs = family.apply(n, x)?.dist_sq(fixed)?;
    Ok(rhs - lhs)
}
