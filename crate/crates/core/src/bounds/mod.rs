//! Deterministic evaluation of the mean-square convergence bounds.

mod block;
mod general;
mod rates;
mod recursion;
mod trajectory;

pub use block::{unweighted_block_bound, prefactor, weighted_block_bound, TauTable};
pub use general::{relaxed_iteration_bound, GeneralBoundInputs};
pub use rates::{min_effective_progress, optimal_single_block_probs, rho, rho_ratio_bounds, RatioBounds};
pub use recursion::{accumulate, recursion_bound, running_products};
pub use trajectory::{read_rows, write_rows, BoundNorm, BoundRow, BoundTrajectory};
