//! Sample-moment helpers shared by the laboratory checks.

use serde::Serialize;

use crate::error::{Error, Result};

/// First, second, and fourth central moments of a sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance (divisor n - 1).
    pub variance: f64,
    /// Central fourth moment (divisor n).
    pub m4: f64,
}

impl Moments {
    pub fn stderr_mean(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Delta-method standard error of the sample variance:
    /// `Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n`.
    pub fn stderr_variance(&self) -> f64 {
        let n = self.n as f64;
        let s4 = self.variance * self.variance;
        ((self.m4 - s4 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    assert!(n >= 2, "moments need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    Moments {
        n,
        mean,
        variance: m2 / (n as f64 - 1.0),
        m4: m4 / n as f64,
    }
}

/// Result of a straight-line least-squares fit `y ~ a + b x` with
/// uncertainty propagated from per-point standard errors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
}

/// Unweighted least squares of `y` on `x`; `se` are the standard errors of
/// the `y` values and feed the coefficient uncertainties only.
pub fn affine_fit(x: &[f64], y: &[f64], se: &[f64]) -> Result<AffineFit> {
    let m = x.len();
    if m < 2 || y.len() != m || se.len() != m {
        return Err(Error::shape("affine fit needs matched x, y, se with >= 2 points"));
    }
    let x_bar = x.iter().sum::<f64>() / m as f64;
    let y_bar = y.iter().sum::<f64>() / m as f64;
    let sxx: f64 = x.iter().map(|&xi| (xi - x_bar) * (xi - x_bar)).sum();
    if sxx <= 0.0 {
        return Err(Error::Conditioning(
            "affine fit needs at least two distinct x values".into(),
        ));
    }
    // Both coefficients are linear in y: slope = sum c_i y_i with
    // c_i = (x_i - x_bar)/Sxx, intercept = sum (1/m - x_bar c_i) y_i.
    let mut slope = 0.0;
    let mut se_slope_sq = 0.0;
    let mut se_intercept_sq = 0.0;
    for i in 0..m {
        let c = (x[i] - x_bar) / sxx;
        slope += c * y[i];
        se_slope_sq += c * c * se[i] * se[i];
        let d = 1.0 / m as f64 - x_bar * c;
        se_intercept_sq += d * d * se[i] * se[i];
    }
    let intercept = y_bar - slope * x_bar;
    let ss_tot: f64 = y.iter().map(|&yi| (yi - y_bar) * (yi - y_bar)).sum();
    let ss_res: f64 = (0..m)
        .map(|i| {
            let fit = intercept + slope * x[i];
            (y[i] - fit) * (y[i] - fit)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(AffineFit {
        intercept,
        slope,
        r_squared,
        se_intercept: se_intercept_sq.sqrt(),
        se_slope: se_slope_sq.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_of_a_known_sample() {
        let m = moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(m.mean, 2.5, max_relative = 1e-15);
        assert_relative_eq!(m.variance, 5.0 / 3.0, max_relative = 1e-15);
        assert!(m.stderr_mean() > 0.0);
        assert!(m.stderr_variance() > 0.0);
    }

    #[test]
    fn affine_fit_recovers_exact_line() {
        let x = [1.0, 0.5, 0.2, 0.1];
        let y: Vec<f64> = x.iter().map(|xi| 2.0 + 3.0 * xi).collect();
        let se = [0.1; 4];
        let fit = affine_fit(&x, &y, &se).unwrap();
        assert_relative_eq!(fit.intercept, 2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.slope, 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn affine_fit_needs_spread() {
        let err = affine_fit(&[1.0, 1.0], &[0.0, 1.0], &[0.1, 0.1]);
        assert!(matches!(err, Err(Error::Conditioning(_))));
    }
}
