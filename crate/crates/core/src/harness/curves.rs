//! Curves of the probability-normalized rate `ρ(p)/ρ(1)` over `p`, one per `χ`.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::rho;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub chi: f64,
    pub p: f64,
    pub ratio: f64,
}

pub const DEFAULT_CHIS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 0.95];

/// `p = 1/steps, 2/steps, …, 1`.
pub fn uniform_grid(steps: usize) -> Vec<f64> {
    (1..=steps).map(|k| k as f64 / steps as f64).collect()
}

/// Rows `(χ, p, ρ(p)/ρ(1))` for every `χ` and every `p` in the grid.
pub fn rate_curves(chis: &[f64], grid: &[f64]) -> Result<Vec<CurvePoint>> {
    let mut rows = Vec::with_capacity(chis.len() * grid.len());
    for &chi in chis {
        if !(chi > 0.0 && chi < 1.0) {
            return Err(Error::Domain(format!("χ = {chi} is outside (0, 1)")));
        }
        let full = rho(1.0, chi)?;
        for &p in grid {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Domain(format!("p = {p} is outside (0, 1]")));
            }
            rows.push(CurvePoint { chi, p, ratio: rho(p, chi)? / full });
        }
    }
    Ok(rows)
}

/// Columns `chi, p, ratio`.
pub fn write_curves_csv<W: Write>(writer: W, rows: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves_csv<R: std::io::Read>(reader: R) -> Result<Vec<CurvePoint>> {
    Ok(csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<Vec<CurvePoint>, _>>()?)
}

/// A plain line plot of the curves, `p` on the horizontal axis and the
/// ratio on `[0, 1]` vertically.
pub fn render_svg(rows: &[CurvePoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let x = |p: f64| PAD + p * (W - 2.0 * PAD);
    let y = |r: f64| H - PAD - r * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y0} L{x1} {y0} M{x0} {y0} L{x0} {y1}" stroke="black" fill="none"/>"#,
        x0 = x(0.0),
        y0 = y(0.0),
        x1 = x(1.0),
        y1 = y(1.0)
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{t:.1}</text>"#, x(t), y(0.0) + 18.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#, x(0.0) - 6.0, y(t) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">p</text>"#, x(0.5), H - 10.0);
    let _ = writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">ρ(p)/ρ(1)</text>"#, y(0.5), y(0.5));

    let mut chis: Vec<f64> = rows.iter().map(|r| r.chi).collect();
    chis.dedup();
    for (k, chi) in chis.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let path: Vec<String> = rows
            .iter()
            .filter(|r| r.chi == *chi)
            .enumerate()
            .map(|(j, r)| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, x(r.p), y(r.ratio)))
            .collect();
        let _ = writeln!(svg, r#"<path d="{}" stroke="{colour}" stroke-width="2" fill="none"/>"#, path.join(" "));
        let ly = PAD + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}" fill="{colour}">χ = {chi}</text>"#, W - PAD - 60.0);
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rho_ratio_bounds;

    #[test]
    fn curves_are_monotone_and_bounded() {
        let grid = uniform_grid(50);
        let rows = rate_curves(&DEFAULT_CHIS, &grid).unwrap();
        for chi in DEFAULT_CHIS {
            let curve: Vec<&CurvePoint> = rows.iter().filter(|r| r.chi == chi).collect();
            let b = rho_ratio_bounds(chi).unwrap();
            assert_eq!(curve.last().unwrap().ratio, 1.0);
            for w in curve.windows(2) {
                assert!(w[1].ratio >= w[0].ratio);
            }
            assert!(curve.iter().all(|r| r.ratio >= b.lo && r.ratio <= b.hi));
        }
    }

    #[test]
    fn small_p_approaches_lower_bound() {
        let rows = rate_curves(&[0.2], &[1e-6]).unwrap();
        assert!((rows[0].ratio - 0.4971).abs() < 1e-3);
    }

    #[test]
    fn csv_and_svg() {
        let rows = rate_curves(&[0.3, 0.7], &uniform_grid(4)).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_curves_csv(buf.as_slice()).unwrap(), rows);
        let svg = render_svg(&rows);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke-width=\"2\"").count(), 2);
    }
}
