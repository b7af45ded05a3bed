//! Closed-form resolvents `J_{sA} = (Id + sA)^{-1}` of strongly monotone
//! operators and proximity operators of strongly convex functions.
//!
//! Every spec splits as `A = M + δ·Id` with `M` monotone. Both the full
//! resolvent and the resolvent of the monotone part `M` are available; the
//! forward–backward family needs the latter.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the smallest eigenvalue of `(M + Mᵀ)/2` when checking monotonicity.
const MONOTONE_TOL: f64 = 1e-12;

/// Plain-data description of one block operator, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResolventSpec {
    /// `A x = (M + δ·Id) x + b` with `M + Mᵀ ⪰ 0`. `M` defaults to zero.
    Affine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        delta: f64,
        offset: Vec<f64>,
    },
    /// `A = ∂f`, `f(x) = (δ/2)‖x − c‖²`.
    Quadratic { delta: f64, center: Vec<f64> },
    /// `A = ∂f`, `f(x) = (δ/2)‖x − c‖² + ι_{[lower, upper]}(x)`.
    QuadraticBox {
        delta: f64,
        center: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `A = ∂f`, `f(x) = l1·‖x‖₁ + (δ/2)‖x − c‖²`. The center defaults to zero.
    ElasticNet {
        l1: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone)]
enum Kind {
    Affine { matrix: DMatrix<f64>, offset: DVector<f64> },
    Quadratic { center: DVector<f64> },
    QuadraticBox { center: DVector<f64>, lower: DVector<f64>, upper: DVector<f64> },
    ElasticNet { l1: f64, center: DVector<f64> },
}

/// A validated block operator with strong-monotonicity constant `δ > 0`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    delta: f64,
    kind: Kind,
}

impl Resolvent {
    pub fn new(spec: &ResolventSpec) -> Result<Self> {
        let delta = match spec {
            ResolventSpec::Affine { delta, .. }
            | ResolventSpec::Quadratic { delta, .. }
            | ResolventSpec::QuadraticBox { delta, .. }
            | ResolventSpec::ElasticNet { delta, .. } => *delta,
        };
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("strong monotonicity constant δ = {delta} must be positive")));
        }
        let kind = match spec {
            ResolventSpec::Affine { matrix, offset, .. } => {
                let d = nonempty(offset, "offset")?;
                let matrix = match matrix {
                    Some(rows) => matrix_from_rows(rows)?,
                    None => DMatrix::zeros(d, d),
                };
                if matrix.shape() != (d, d) {
                    return Err(Error::Conformance(format!(
                        "affine matrix is {:?}, offset has length {d}",
                        matrix.shape()
                    )));
                }
                let sym = (&matrix + matrix.transpose()) * 0.5;
                let min_eig = sym.symmetric_eigenvalues().min();
                if min_eig < -MONOTONE_TOL * (1.0 + matrix.norm()) {
                    return Err(Error::Domain(format!(
                        "affine part is not monotone: smallest eigenvalue of its symmetric part is {min_eig}"
                    )));
                }
                Kind::Affine { matrix, offset: finite_vector(offset, "offset")? }
            }
            ResolventSpec::Quadratic { center, .. } => {
                nonempty(center, "center")?;
                Kind::Quadratic { center: finite_vector(center, "center")? }
            }
            ResolventSpec::QuadraticBox { center, lower, upper, .. } => {
                let d = nonempty(center, "center")?;
                if lower.len() != d || upper.len() != d {
                    return Err(Error::Conformance("box bounds must match the center dimension".into()));
                }
                if let Some(j) = (0..d).find(|&j| !(lower[j] <= upper[j])) {
                    return Err(Error::Domain(format!("empty box in coordinate {j}")));
                }
                Kind::QuadraticBox {
                    center: finite_vector(center, "center")?,
                    lower: DVector::from_column_slice(lower),
                    upper: DVector::from_column_slice(upper),
                }
            }
            ResolventSpec::ElasticNet { l1, center, dim, .. } => {
                if !(*l1 >= 0.0 && l1.is_finite()) {
                    return Err(Error::Domain(format!("l1 weight {l1} must be nonnegative")));
                }
                let center = match (center, dim) {
                    (Some(c), None) => {
                        nonempty(c, "center")?;
                        finite_vector(c, "center")?
                    }
                    (Some(c), Some(d)) if c.len() == *d => finite_vector(c, "center")?,
                    (None, Some(d)) if *d > 0 => DVector::zeros(*d),
                    _ => {
                        return Err(Error::Domain(
                            "elastic net needs a center or a positive dim, and they must agree".into(),
                        ))
                    }
                };
                Kind::ElasticNet { l1: *l1, center }
            }
        };
        Ok(Self { delta, kind })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Affine { offset, .. } => offset.len(),
            Kind::Quadratic { center } | Kind::QuadraticBox { center, .. } | Kind::ElasticNet { center, .. } => {
                center.len()
            }
        }
    }

    /// Whether the resolvent is an affine map.
    pub fn is_affine(&self) -> bool {
        matches!(self.kind, Kind::Affine { .. } | Kind::Quadratic { .. })
    }

    /// Lipschitz constant `1/(1 + s·δ)` of `J_{sA}`.
    pub fn lipschitz(&self, scale: f64) -> f64 {
        1.0 / (1.0 + scale * self.delta)
    }

    /// `J_{sA}(x) = (Id + sA)^{-1} x`; for subdifferentials this is `prox_{s f}(x)`.
    pub fn resolvent(&self, scale: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(scale, x)?;
        let s = scale;
        let delta = self.delta;
        match &self.kind {
            Kind::Affine { matrix, offset } => {
                let d = x.len();
                let system = DMatrix::identity(d, d) * (1.0 + s * delta) + matrix * s;
                solve(system, x - offset * s)
            }
            Kind::Quadratic { center } => Ok((x + center * (s * delta)) / (1.0 + s * delta)),
            Kind::QuadraticBox { center, lower, upper } => {
                let y = (x + center * (s * delta)) / (1.0 + s * delta);
                Ok(clamp(y, lower, upper))
            }
            Kind::ElasticNet { l1, center } => {
                let denom = 1.0 + s * delta;
                let v = (x + center * (s * delta)) / denom;
                Ok(soft_threshold(v, s * l1 / denom))
            }
        }
    }

    /// Resolvent `J_{sM}` of the monotone part `M = A − δ·Id`.
    ///
    /// For subdifferentials this is `prox_{s h}` with `h = f − (δ/2)‖·‖²`.
    pub fn monotone_part_resolvent(&self, scale: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(scale, x)?;
        let s = scale;
        let delta = self.delta;
        match &self.kind {
            Kind::Affine { matrix, offset } => {
                let d = x.len();
                let system = DMatrix::identity(d, d) + matrix * s;
                solve(system, x - offset * s)
            }
            // h(x) = −δ⟨c, x⟩ + const
            Kind::Quadratic { center } => Ok(x + center * (s * delta)),
            Kind::QuadraticBox { center, lower, upper } => Ok(clamp(x + center * (s * delta), lower, upper)),
            // h(x) = l1‖x‖₁ − δ⟨c, x⟩ + const
            Kind::ElasticNet { l1, center } => Ok(soft_threshold(x + center * (s * delta), s * l1)),
        }
    }

    /// Single-valued part of `A x`, i.e. without the box normal cone or the
    /// `l1` subdifferential.
    pub fn smooth_part(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            Kind::Affine { matrix, offset } => matrix * x + x * self.delta + offset,
            Kind::Quadratic { center } | Kind::QuadraticBox { center, .. } | Kind::ElasticNet { center, .. } => {
                (x - center) * self.delta
            }
        }
    }

    /// Checks `0 ∈ A x + r` coordinatewise to tolerance `tol`, where `r` is
    /// the remaining (single-valued) part of an inclusion.
    pub fn inclusion_residual(&self, x: &DVector<f64>, r: &DVector<f64>) -> f64 {
        let g = self.smooth_part(x) + r;
        match &self.kind {
            Kind::Affine { .. } | Kind::Quadratic { .. } => g.amax(),
            Kind::QuadraticBox { lower, upper, .. } => (0..x.len())
                .map(|j| {
                    // normal cone of [lower, upper] at x_j
                    let at_lower = x[j] <= lower[j];
                    let at_upper = x[j] >= upper[j];
                    match (at_lower, at_upper) {
                        (true, true) => 0.0,
                        (true, false) => (-g[j]).max(0.0),
                        (false, true) => g[j].max(0.0),
                        (false, false) => g[j].abs(),
                    }
                })
                .fold(0.0, f64::max),
            Kind::ElasticNet { l1, .. } => (0..x.len())
                .map(|j| {
                    if x[j] != 0.0 {
                        (g[j] + l1 * x[j].signum()).abs()
                    } else {
                        (g[j].abs() - l1).max(0.0)
                    }
                })
                .fold(0.0, f64::max),
        }
    }

    fn check(&self, scale: f64, x: &DVector<f64>) -> Result<()> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("resolvent scale {scale} must be positive")));
        }
        if x.len() != self.dim() {
            return Err(Error::Conformance(format!(
                "resolvent of dimension {} applied to a vector of length {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

pub fn soft_threshold(v: DVector<f64>, t: f64) -> DVector<f64> {
    v.map(|vj| vj.signum() * (vj.abs() - t).max(0.0))
}

fn clamp(v: DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(v.len(), (0..v.len()).map(|j| v[j].clamp(lower[j], upper[j])))
}

fn solve(system: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("resolvent system is singular".into()))
}

fn nonempty(v: &[f64], name: &str) -> Result<usize> {
    if v.is_empty() {
        Err(Error::Domain(format!("{name} must not be empty")))
    } else {
        Ok(v.len())
    }
}

fn finite_vector(v: &[f64], name: &str) -> Result<DVector<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(DVector::from_column_slice(v))
    } else {
        Err(Error::Domain(format!("{name} has non-finite entries")))
    }
}

/// Row-major nested vectors to a matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows == 0 || ncols == 0 {
        return Err(Error::Domain("matrix must not be empty".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Conformance("matrix rows have different lengths".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
