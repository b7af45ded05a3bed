use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Fitted per-iteration ratio `exp(slope)` of the mean.
    pub ratio: f64,
    pub slope: f64,
    /// Set when a nonpositive mean (exact convergence) made the log fit
    /// impossible; the ratio is then reported as 0.
    pub degenerate: bool,
}

/// Least-squares slope of `ln mean_n` over `n ∈ [start, end]`.
pub fn fit_linear_rate(means: &[f64], window: (usize, usize)) -> Result<RateFit> {
    let (start, end) = window;
    if !(start < end && end < means.len()) {
        return Err(Error::Domain(format!(
            "window [{start}, {end}] must contain two points inside 0..{}",
            means.len()
        )));
    }
    let points = &means[start..=end];
    if points.iter().any(|m| !(*m > 0.0)) {
        return Ok(RateFit { ratio: 0.0, slope: f64::NEG_INFINITY, degenerate: true });
    }
    let k = points.len() as f64;
    let n_mean = (start + end) as f64 / 2.0;
    let y: Vec<f64> = points.iter().map(|m| m.ln()).collect();
    let y_mean = y.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (j, yj) in y.iter().enumerate() {
        let dx = (start + j) as f64 - n_mean;
        sxy += dx * (yj - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    Ok(RateFit { ratio: slope.exp(), slope, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_squared_contraction_factor() {
        let c: f64 = 0.7;
        let means: Vec<f64> = (0..100).map(|n| 4.0 * c.powi(2 * n)).collect();
        let fit = fit_linear_rate(&means, (5, 90)).unwrap();
        assert!((fit.ratio - c * c).abs() < 1e-6);
        assert!(!fit.degenerate);
    }

    #[test]
    fn zero_window_is_flagged() {
        let fit = fit_linear_rate(&[1.0, 0.5, 0.0, 0.0, 0.0], (2, 4)).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.ratio, 0.0);
        assert!(fit_linear_rate(&[1.0, 0.5], (1, 1)).is_err());
    }
}
