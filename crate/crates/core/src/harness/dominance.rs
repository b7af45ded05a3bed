use std::io::Write;

use serde::Serialize;

use super::estimate::MeanSquareEstimate;
use crate::bounds::{BoundNorm, BoundTrajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceRow {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub bound: f64,
    /// `B_n + k·SE_n − mean_n`; nonnegative when the row passes.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub rows: Vec<DominanceRow>,
    pub slack: f64,
    pub pass: bool,
    pub worst: DominanceRow,
}

impl DominanceReport {
    /// Columns `n, mean, se, bound, margin, pass`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: worst margin {:.3e} at n = {} (mean {:.6e}, bound {:.6e}, slack {}·SE)",
            if self.pass { "pass" } else { "fail" },
            self.worst.margin,
            self.worst.n,
            self.worst.mean,
            self.worst.bound,
            self.slack
        )
    }
}

/// Checks `mean_n ≤ B_{n−1} + k·SE_n` for `n = 1..=N`, comparing in the
/// norm the bound is stated in. Row 0 holds by construction and is skipped.
pub fn check_dominance(estimate: &MeanSquareEstimate, bound: &BoundTrajectory, slack: f64) -> Result<DominanceReport> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::Domain(format!("slack {slack} must be nonnegative")));
    }
    if estimate.horizon() != bound.horizon() {
        return Err(Error::Conformance(format!(
            "estimate covers {} iterations, bound covers {}",
            estimate.horizon(),
            bound.horizon()
        )));
    }
    let (mean, se) = match &bound.norm {
        BoundNorm::Weighted(w) => {
            if *w != estimate.weights {
                return Err(Error::Conformance(format!(
                    "bound is weighted by {:?}, estimate by {:?}",
                    w.as_slice(),
                    estimate.weights.as_slice()
                )));
            }
            (&estimate.weighted_mean, &estimate.weighted_se)
        }
        BoundNorm::Plain => (&estimate.plain_mean, &estimate.plain_se),
    };
    let envelope = bound.envelope();
    let rows: Vec<DominanceRow> = (1..envelope.len())
        .map(|n| {
            let se = se.as_ref().map_or(0.0, |s| s[n]);
            let margin = envelope[n] + slack * se - mean[n];
            DominanceRow { n, mean: mean[n], se, bound: envelope[n], margin, pass: margin >= 0.0 }
        })
        .collect();
    let worst = rows
        .iter()
        .copied()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .ok_or_else(|| Error::Domain("dominance check needs a horizon of at least 1".into()))?;
    Ok(DominanceReport {
        pass: rows.iter().all(|r| r.pass),
        rows,
        slack,
        worst,
    })
}
