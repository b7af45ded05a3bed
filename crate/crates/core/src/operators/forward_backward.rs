//! Block forward–backward splitting for `0 ∈ A_i x_i + B_i x`, `i = 1..m`.
//!
//! Each `A_i = M_i + δ_i·Id` is δ_i-strongly monotone and `B` is β-cocoercive.
//! With a shift `θ_n ∈ [0, δ]`, `δ = min_i δ_i`, the per-block update is
//!
//! ```text
//! T_{i,n} x = J_{γ_n M_i / (1 + γ_n(δ_i − θ_n))}( ((1 − γ_n θ_n) x_i − γ_n B_i x) / (1 + γ_n(δ_i − θ_n)) )
//! ```
//!
//! which is Lipschitz with constant `ζ_n` (see [`zeta`]) and has the zero of
//! `A + B` as its fixed point; every block gets `τ_{i,n} = ζ_n²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{matrix_from_rows, solve_fixed_point, BlockMap, OperatorFamily, Resolvent, ResolventSpec};
use crate::blockspace::{BlockLayout, BlockVector};
use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// Stand-in cocoercivity constant for a zero coupling.
pub const DEFAULT_LARGE_BETA: f64 = 1e8;

const COCOERCIVE_TOL: f64 = 1e-10;

/// `B x = Q x + q` (for proximal gradient, `g(x) = ½ xᵀQx + qᵀx`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
    /// Cocoercivity constant. Required for a nonsymmetric `Q`; for a symmetric
    /// positive semidefinite `Q` it defaults to `1/λ_max(Q)`, or to
    /// [`DEFAULT_LARGE_BETA`] when `Q = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// A validated affine β-cocoercive coupling.
#[derive(Debug, Clone)]
pub struct Coupling {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
    beta: f64,
}

impl Coupling {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>, beta: Option<f64>) -> Result<Self> {
        let dim = offset.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::Conformance(format!(
                "coupling matrix is {:?}, offset has length {dim}",
                matrix.shape()
            )));
        }
        let symmetric = (&matrix - matrix.transpose()).amax() <= 1e-14 * (1.0 + matrix.amax());
        let beta = match beta {
            Some(b) => b,
            None if symmetric => {
                let eig = matrix.clone().symmetric_eigenvalues();
                if eig.min() < -COCOERCIVE_TOL * (1.0 + matrix.amax()) {
                    return Err(Error::Domain("coupling matrix is not positive semidefinite".into()));
                }
                let top = eig.max();
                if top <= f64::EPSILON * (1.0 + matrix.amax()) {
                    DEFAULT_LARGE_BETA
                } else {
                    1.0 / top
                }
            }
            None => {
                return Err(Error::Domain(
                    "a nonsymmetric coupling needs an explicit cocoercivity constant".into(),
                ))
            }
        };
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("cocoercivity constant β = {beta} must be positive and finite")));
        }
        // ⟨x, Qx⟩ ≥ β‖Qx‖² for all x  ⟺  sym(Q) − β QᵀQ ⪰ 0
        let gram = matrix.transpose() * &matrix;
        let test = (&matrix + matrix.transpose()) * 0.5 - gram * beta;
        let min_eig = test.symmetric_eigenvalues().min();
        let scale = 1.0 + matrix.amax() + beta * matrix.amax().powi(2);
        if min_eig < -COCOERCIVE_TOL * scale {
            return Err(Error::Domain(format!(
                "coupling is not {beta}-cocoercive (smallest eigenvalue {min_eig})"
            )));
        }
        Ok(Self { matrix, offset, beta })
    }

    pub fn from_spec(spec: &CouplingSpec) -> Result<Self> {
        let matrix = matrix_from_rows(&spec.matrix)?;
        let offset = match &spec.offset {
            Some(q) => DVector::from_column_slice(q),
            None => DVector::zeros(matrix.nrows()),
        };
        Self::new(matrix, offset, spec.beta)
    }

    /// `B x = 0` with the stand-in constant `beta`.
    pub fn zero(dim: usize, beta: f64) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim), DVector::zeros(dim), Some(beta))
    }

    /// `B x = (x_1 − x_2, …, x_m − x_1)` on `m` blocks of dimension `d`,
    /// which is ½-cocoercive since `⟨Bx, x⟩ = ‖Bx‖²/2`.
    pub fn cyclic_difference(m: usize, d: usize) -> Result<Self> {
        let dim = m * d;
        let mut matrix = DMatrix::identity(dim, dim);
        for i in 0..m {
            let next = (i + 1) % m;
            for k in 0..d {
                matrix[(i * d + k, next * d + k)] -= 1.0;
            }
        }
        Self::new(matrix, DVector::zeros(dim), Some(0.5))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_symmetric(&self) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() <= 1e-14 * (1.0 + self.matrix.amax())
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// `B x` on the flattened vector.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.offset
    }

    fn apply_rows(&self, row: usize, rows: usize, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.rows(row, rows) * x + self.offset.rows(row, rows)
    }
}

/// Lipschitz constant of the shifted forward–backward operator:
/// `(|1 − γ(θ + 1/(2β))| + γ/(2β)) / (1 + γ(δ − θ))`.
pub fn zeta(gamma: f64, theta: f64, beta: f64, delta: f64) -> f64 {
    let half = gamma / (2.0 * beta);
    ((1.0 - gamma * theta - half).abs() + half) / (1.0 + gamma * (delta - theta))
}

/// Step-size condition `γ < 2β/(1 + β(2θ − δ))`, written as
/// `γ(1/β + 2θ − δ) < 2` so that it stays defined when `1 + β(2θ − δ) ≤ 0`.
fn step_admissible(gamma: f64, theta: f64, beta: f64, delta: f64) -> bool {
    gamma * (1.0 / beta + 2.0 * theta - delta) < 2.0
}

#[derive(Debug, Clone)]
pub struct ForwardBackwardFamily {
    layout: BlockLayout,
    resolvents: Vec<Resolvent>,
    coupling: Coupling,
    gamma: Schedule,
    theta: Schedule,
    delta: f64,
    fixed_point: BlockVector,
}

impl ForwardBackwardFamily {
    /// Validates `γ_n > 0`, `θ_n ∈ [0, δ]` and the step-size condition for
    /// every `n ≤ horizon` and in the limit.
    pub fn new(
        specs: &[ResolventSpec],
        coupling: Coupling,
        gamma: Schedule,
        theta: Schedule,
        horizon: usize,
    ) -> Result<Self> {
        let resolvents = specs.iter().map(Resolvent::new).collect::<Result<Vec<_>>>()?;
        if resolvents.is_empty() {
            return Err(Error::Domain("forward–backward family needs at least one block".into()));
        }
        let layout = BlockLayout::new(resolvents.iter().map(Resolvent::dim).collect())?;
        if coupling.dim() != layout.total_dim() {
            return Err(Error::Conformance(format!(
                "coupling acts on dimension {}, blocks total {}",
                coupling.dim(),
                layout.total_dim()
            )));
        }
        gamma.validate()?;
        theta.validate()?;
        let delta = resolvents.iter().map(Resolvent::delta).fold(f64::INFINITY, f64::min);
        if gamma.inf() <= 0.0 {
            return Err(Error::Domain(format!("γ_n must be positive (inf γ = {})", gamma.inf())));
        }
        if theta.inf() < 0.0 || theta.sup() > delta {
            return Err(Error::Domain(format!(
                "θ_n must lie in [0, δ] = [0, {delta}], schedule spans [{}, {}]",
                theta.inf(),
                theta.sup()
            )));
        }
        let mut family = Self {
            fixed_point: BlockVector::zeros(&layout),
            layout,
            resolvents,
            coupling,
            gamma,
            theta,
            delta,
        };
        for n in 0..=horizon {
            family.check_iteration(n)?;
        }
        let (g, t) = (gamma.limit(), theta.limit());
        if !(g > 0.0 && step_admissible(g, t, family.coupling.beta, delta)) {
            return Err(Error::Certification {
                hypothesis: "step size",
                detail: format!("limit γ = {g} violates γ(1/β + 2θ − δ) < 2"),
            });
        }
        family.fixed_point = solve_fixed_point(&family)?;
        Ok(family)
    }

    /// Proximal gradient for `min Σ_i f_i(x_i) + g(x)` with `B = ∇g` and
    /// `M_i = ∂h_i`, `h_i = f_i − δ_i‖·‖²/2`.
    pub fn proximal_gradient(
        functions: &[ResolventSpec],
        g: &CouplingSpec,
        gamma: Schedule,
        theta: Schedule,
        horizon: usize,
    ) -> Result<Self> {
        if functions.iter().any(|f| matches!(f, ResolventSpec::Affine { .. })) {
            return Err(Error::Domain("proximal gradient needs functions, not affine operators".into()));
        }
        let coupling = Coupling::from_spec(g)?;
        if !coupling.is_symmetric() {
            return Err(Error::Domain("the Hessian of g must be symmetric".into()));
        }
        Self::new(functions, coupling, gamma, theta, horizon)
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn resolvent(&self, i: usize) -> &Resolvent {
        &self.resolvents[i]
    }

    /// `δ = min_i δ_i`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `ζ_n`.
    pub fn zeta(&self, n: usize) -> f64 {
        zeta(self.gamma.at(n), self.theta.at(n), self.coupling.beta, self.delta)
    }

    /// Largest coordinate violation of `0 ∈ A_i x_i + B_i x` over all blocks.
    pub fn inclusion_residual(&self, x: &BlockVector) -> Result<f64> {
        x.check_layout(&self.layout)?;
        let bx = self.coupling.apply(&x.to_flat());
        Ok((0..self.layout.num_blocks())
            .map(|i| {
                let bi = bx.rows(self.layout.offset(i), self.layout.dim(i)).clone_owned();
                self.resolvents[i].inclusion_residual(x.block(i), &bi)
            })
            .fold(0.0, f64::max))
    }
}

impl BlockMap for ForwardBackwardFamily {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn apply_block(&self, i: usize, n: usize, x: &BlockVector) -> Result<DVector<f64>> {
        x.check_layout(&self.layout)?;
        let gamma = self.gamma.at(n);
        let theta = self.theta.at(n);
        let denom = 1.0 + gamma * (self.resolvents[i].delta() - theta);
        let bi = self
            .coupling
            .apply_rows(self.layout.offset(i), self.layout.dim(i), &x.to_flat());
        let forward = (x.block(i) * (1.0 - gamma * theta) - bi * gamma) / denom;
        self.resolvents[i].monotone_part_resolvent(gamma / denom, &forward)
    }

    fn is_affine(&self) -> bool {
        self.resolvents.iter().all(Resolvent::is_affine)
    }
}

impl OperatorFamily for ForwardBackwardFamily {
    fn tau(&self, _i: usize, n: usize) -> f64 {
        self.zeta(n).powi(2)
    }

    fn tau_limsup(&self, _i: usize) -> f64 {
        zeta(self.gamma.limit(), self.theta.limit(), self.coupling.beta, self.delta).powi(2)
    }

    fn fixed_point(&self) -> &BlockVector {
        &self.fixed_point
    }

    fn check_iteration(&self, n: usize) -> Result<()> {
        let (g, t) = (self.gamma.at(n), self.theta.at(n));
        if step_admissible(g, t, self.coupling.beta, self.delta) {
            Ok(())
        } else {
            Err(Error::ScheduleViolation {
                n,
                detail: format!(
                    "γ_n = {g} violates γ_n < 2β/(1 + β(2θ_n − δ)) with β = {}, θ_n = {t}, δ = {}",
                    self.coupling.beta, self.delta
                ),
            })
        }
    }
}
