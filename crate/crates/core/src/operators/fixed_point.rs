use nalgebra::{DMatrix, DVector};

use super::BlockMap;
use crate::blockspace::BlockVector;
use crate::error::{Error, Result};

/// Certificate: `‖T_0 x̄ − x̄‖ ≤ FIXED_POINT_TOL · (1 + ‖x̄‖)`.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 1_000_000;

const POLISH_ITERATIONS: usize = 100;

/// `(L, l)` with `T_n x = L x + l` on flattened vectors, read off by probing
/// `T_n` at zero and at the canonical basis. Only meaningful for affine maps.
pub fn affine_form<M: BlockMap + ?Sized>(map: &M, n: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let layout = map.layout();
    let dim = layout.total_dim();
    let zero = BlockVector::zeros(layout);
    let offset = map.apply(n, &zero)?.to_flat();
    let mut linear = DMatrix::zeros(dim, dim);
    let mut basis = vec![0.0; dim];
    for j in 0..dim {
        basis[j] = 1.0;
        let column = map.apply(n, &BlockVector::from_flat(layout, &basis)?)?.to_flat() - &offset;
        linear.set_column(j, &column);
        basis[j] = 0.0;
    }
    Ok((linear, offset))
}

/// `‖T_0 x − x‖`.
pub fn fixed_point_residual<M: BlockMap + ?Sized>(map: &M, x: &BlockVector) -> Result<f64> {
    Ok(map.apply(0, x)?.dist_sq(x)?.sqrt())
}

fn certified<M: BlockMap + ?Sized>(map: &M, x: &BlockVector) -> Result<(bool, f64)> {
    let r = fixed_point_residual(map, x)?;
    Ok((r <= FIXED_POINT_TOL * (1.0 + x.norm()), r))
}

/// Fixed point of `T_0`: a linear solve for affine maps, otherwise full-sweep
/// iteration `x ← T_0 x` until the residual certificate holds.
pub fn solve_fixed_point<M: BlockMap + ?Sized>(map: &M) -> Result<BlockVector> {
    let layout = map.layout();
    let mut x = BlockVector::zeros(layout);

    if map.is_affine() {
        let (linear, offset) = affine_form(map, 0)?;
        let dim = layout.total_dim();
        let system = DMatrix::identity(dim, dim) - linear;
        let solution = system
            .lu()
            .solve(&offset)
            .ok_or_else(|| Error::Numeric("Id − T_0 is singular".into()))?;
        x = BlockVector::from_flat(layout, solution.as_slice())?;
        for _ in 0..POLISH_ITERATIONS {
            if certified(map, &x)?.0 {
                return Ok(x);
            }
            x = map.apply(0, &x)?;
        }
    }

    let mut residual = f64::INFINITY;
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let next = map.apply(0, &x)?;
        residual = next.dist_sq(&x)?.sqrt();
        x = next;
        if residual <= FIXED_POINT_TOL * (1.0 + x.norm()) {
            let (ok, r) = certified(map, &x)?;
            if ok {
                return Ok(x);
            }
            residual = r;
        }
    }
    Err(Error::NoCertificate {
        iterations: MAX_FIXED_POINT_ITERATIONS,
        residual,
    })
}
