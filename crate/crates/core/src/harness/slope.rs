//! Rate-exponent extraction: ordinary least squares on log-log points.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SlopeError {
    #[error("slope fit needs at least 3 points with positive values, got {usable}")]
    InsufficientData { usable: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub n_used: usize,
    /// Points dropped because their value was not positive.
    pub n_excluded: usize,
}

/// OLS of log(value) on log(n). Points with value ≤ 0 are excluded and
/// counted; fewer than 3 usable points is an error.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit, SlopeError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(n, v)| (n.ln(), v.ln()))
        .collect();
    let n_excluded = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(SlopeError::InsufficientData { usable: usable.len() });
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &usable {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = usable
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let slope_se = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
        n_used: usable.len(),
        n_excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts = [(10.0, 1.0), (100.0, 0.1), (1000.0, 0.01)];
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-10);
        assert!(fit.slope_se < 1e-10);
    }

    #[test]
    fn exact_two_thirds_law() {
        let pts: Vec<(f64, f64)> = [64.0f64, 256.0, 1024.0, 4096.0]
            .iter()
            .map(|&n| (n, n.powf(-2.0 / 3.0)))
            .collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_values_have_zero_slope() {
        let pts = [(10.0, 0.7), (100.0, 0.7), (1000.0, 0.7)];
        let fit = fit_slope(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn perturbed_line_stays_close() {
        let pts = [
            (64.0, 64.0f64.powf(-2.0 / 3.0) * 1.01),
            (256.0, 256.0f64.powf(-2.0 / 3.0)),
            (1024.0, 1024.0f64.powf(-2.0 / 3.0) * 0.99),
        ];
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn nonpositive_points_are_excluded() {
        let pts = [
            (10.0, 1.0),
            (20.0, -0.5),
            (100.0, 0.1),
            (500.0, 0.0),
            (1000.0, 0.01),
        ];
        let fit = fit_slope(&pts).unwrap();
        assert_eq!(fit.n_used, 3);
        assert_eq!(fit.n_excluded, 2);
        assert!((fit.slope + 1.0).abs() < 1e-10);

        assert_eq!(
            fit_slope(&pts[..2]).unwrap_err(),
            SlopeError::InsufficientData { usable: 1 }
        );
    }
}
