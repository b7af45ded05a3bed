//! Closed-form parameter sequences.
//!
//! Schedules are descriptors rather than callbacks so that their infimum,
//! supremum, limit and the summability of `√s_n` can be decided exactly.
//! Every descriptor is monotone in `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// `s_n = value`.
    Constant { value: f64 },
    /// `s_n = limit + (start − limit)·ratioⁿ` with `ratio ∈ [0, 1)`.
    Geometric { start: f64, limit: f64, ratio: f64 },
    /// `s_n = limit + (start − limit)/(n + 1)^power` with `power > 0`.
    Polynomial { start: f64, limit: f64, power: f64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    /// `a_0 ρⁿ`.
    pub fn geometric_decay(a0: f64, ratio: f64) -> Self {
        Schedule::Geometric { start: a0, limit: 0.0, ratio }
    }

    /// `a_0 / (n + 1)^s`.
    pub fn polynomial_decay(a0: f64, power: f64) -> Self {
        Schedule::Polynomial { start: a0, limit: 0.0, power }
    }

    pub fn zero() -> Self {
        Schedule::constant(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("schedule {name} must be finite, got {v}")))
            }
        };
        match *self {
            Schedule::Constant { value } => finite(value, "value"),
            Schedule::Geometric { start, limit, ratio } => {
                finite(start, "start")?;
                finite(limit, "limit")?;
                if !(0.0..1.0).contains(&ratio) {
                    return Err(Error::Domain(format!("geometric ratio {ratio} is outside [0, 1)")));
                }
                Ok(())
            }
            Schedule::Polynomial { start, limit, power } => {
                finite(start, "start")?;
                finite(limit, "limit")?;
                if !(power > 0.0 && power.is_finite()) {
                    return Err(Error::Domain(format!("polynomial power {power} must be positive")));
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Geometric { start, limit, ratio } => limit + (start - limit) * ratio.powi(n as i32),
            Schedule::Polynomial { start, limit, power } => {
                limit + (start - limit) / ((n + 1) as f64).powf(power)
            }
        }
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.at(n)).collect()
    }

    /// `c · s_n`.
    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            Schedule::Constant { value } => Schedule::Constant { value: c * value },
            Schedule::Geometric { start, limit, ratio } => Schedule::Geometric { start: c * start, limit: c * limit, ratio },
            Schedule::Polynomial { start, limit, power } => {
                Schedule::Polynomial { start: c * start, limit: c * limit, power }
            }
        }
    }

    pub fn limit(&self) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Geometric { limit, .. } | Schedule::Polynomial { limit, .. } => limit,
        }
    }

    fn start(&self) -> f64 {
        self.at(0)
    }

    /// Infimum over all `n ≥ 0`.
    pub fn inf(&self) -> f64 {
        self.start().min(self.limit())
    }

    /// Supremum over all `n ≥ 0`.
    pub fn sup(&self) -> f64 {
        self.start().max(self.limit())
    }

    /// Whether `Σ_n √s_n < ∞`, decided from the descriptor.
    pub fn sqrt_summable(&self) -> bool {
        match *self {
            Schedule::Constant { value } => value == 0.0,
            Schedule::Geometric { limit, .. } => limit == 0.0,
            Schedule::Polynomial { start, limit, power } => limit == 0.0 && (start == 0.0 || power > 2.0),
        }
    }
}

/// A finite prefix followed by a descriptor tail: `s_n = prefix[n]` for
/// `n < prefix.len()`, and `tail.at(n − prefix.len())` afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    prefix: Vec<f64>,
    tail: Schedule,
}

impl Sequence {
    pub fn new(prefix: Vec<f64>, tail: Schedule) -> Result<Self> {
        tail.validate()?;
        if let Some(v) = prefix.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sequence value {v} is not finite")));
        }
        Ok(Self { prefix, tail })
    }

    pub fn at(&self, n: usize) -> f64 {
        match self.prefix.get(n) {
            Some(&v) => v,
            None => self.tail.at(n - self.prefix.len()),
        }
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.at(n)).collect()
    }

    pub fn limit(&self) -> f64 {
        self.tail.limit()
    }

    /// `lim sup` equals the limit: every tail descriptor converges.
    pub fn limsup(&self) -> f64 {
        self.tail.limit()
    }

    pub fn inf(&self) -> f64 {
        self.prefix.iter().copied().fold(self.tail.inf(), f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.prefix.iter().copied().fold(self.tail.sup(), f64::max)
    }

    pub fn sqrt_summable(&self) -> bool {
        self.tail.sqrt_summable()
    }
}

impl From<Schedule> for Sequence {
    fn from(tail: Schedule) -> Self {
        Self { prefix: Vec::new(), tail }
    }
}
