use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blockspace::WeightVector;
use crate::error::{Error, Result};

/// The norm in which a bound is stated.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundNorm {
    /// `|||x|||² = Σ_i ω_i ‖x_i‖²`.
    Weighted(WeightVector),
    /// `‖x‖²`.
    Plain,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub chi_n: f64,
    pub eta_bar_n: f64,
    pub vartheta_bar_n: f64,
    pub bound: f64,
}

/// `B_n` bounds the expected squared distance of `x_{n+1}`, for `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTrajectory {
    pub chi: Vec<f64>,
    pub eta_bar: Vec<f64>,
    pub vartheta_bar: Vec<f64>,
    pub bound: Vec<f64>,
    /// The bound on `x_0`, i.e. the prefactor times the initial distance.
    pub initial: f64,
    /// A certified upper bound on `lim sup χ_n`; always `< 1`.
    pub chi_limsup: f64,
    pub norm: BoundNorm,
}

impl BoundTrajectory {
    pub fn horizon(&self) -> usize {
        self.bound.len()
    }

    /// Bounds aligned with iterates: entry `n` bounds `x_n`, `n = 0..=N`.
    pub fn envelope(&self) -> Vec<f64> {
        std::iter::once(self.initial).chain(self.bound.iter().copied()).collect()
    }

    pub fn sup_chi(&self) -> f64 {
        self.chi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn rows(&self) -> Vec<BoundRow> {
        (0..self.horizon())
            .map(|n| BoundRow {
                n,
                chi_n: self.chi[n],
                eta_bar_n: self.eta_bar[n],
                vartheta_bar_n: self.vartheta_bar[n],
                bound: self.bound[n],
            })
            .collect()
    }

    /// Columns `n, chi_n, eta_bar_n, vartheta_bar_n, bound`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_rows(writer, &self.rows())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn write_rows<W: Write>(writer: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> Result<Vec<BoundRow>> {
    let rows = csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<Vec<BoundRow>, _>>()?;
    if let Some((k, row)) = rows.iter().enumerate().find(|(k, r)| r.n != *k) {
        return Err(Error::Conformance(format!("row {k} is labelled n = {}", row.n)));
    }
    Ok(rows)
}
