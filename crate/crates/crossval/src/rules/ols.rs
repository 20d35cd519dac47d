//! Ordinary least squares with hat-matrix access, the closed-form
//! leave-one-out criterion, GCV, and Woodbury downdating.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rules::{Predictor, Rule};

/// Condition-number ceiling for `X'X`; beyond it the fit fails loudly
/// instead of being silently regularized.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Leverage ceiling for the closed-form leave-one-out denominator.
pub const LEVERAGE_LIMIT: f64 = 1.0 - 1e-10;

/// A fitted least-squares regression with hat-matrix diagonal on demand.
#[derive(Debug, Clone)]
pub struct OlsFit {
    coef: Vec<f64>,
    residuals: Vec<f64>,
    leverage: Vec<f64>,
    xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Full-fit residuals `y_i - x_i . coef`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Diagonal of `H = X (X'X)^-1 X'`.
    pub fn hat_diagonal(&self) -> &[f64] {
        &self.leverage
    }

    pub fn hat_trace(&self) -> f64 {
        self.leverage.iter().sum()
    }

    pub fn rss(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }

    pub fn xtx_inverse(&self) -> &DMatrix<f64> {
        &self.xtx_inv
    }

    pub fn predictor(&self) -> Predictor {
        Predictor::Linear {
            coef: self.coef.clone(),
        }
    }
}

/// Least-squares fit of `y` on the columns of `x`.
///
/// Requires `n >= d` and a numerically invertible `X'X` (condition number at
/// most `CONDITION_LIMIT`); rank deficiency is an error, never a silent
/// ridge.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let n = x.nrows();
    let d = x.ncols();
    if d == 0 {
        return Err(Error::bounds("design matrix needs at least one column"));
    }
    if y.len() != n {
        return Err(Error::shape(format!(
            "design has {n} rows but the response has {} entries",
            y.len()
        )));
    }
    if n < d {
        return Err(Error::bounds(format!(
            "least squares needs n >= d, got n = {n}, d = {d}"
        )));
    }
    let xtx = x.transpose() * x;
    let eigen = xtx.clone().symmetric_eigen();
    let max_ev = eigen.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min_ev = eigen.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if !(min_ev > 0.0) || max_ev / min_ev > CONDITION_LIMIT {
        return Err(Error::Singularity(format!(
            "X'X condition {:.3e} exceeds {CONDITION_LIMIT:.0e}",
            if min_ev > 0.0 { max_ev / min_ev } else { f64::INFINITY }
        )));
    }
    // (X'X)^-1 from the spectral decomposition; X'X is symmetric positive
    // definite at this point.
    let inv_vals = DVector::from_iterator(d, eigen.eigenvalues.iter().map(|l| 1.0 / l));
    let xtx_inv =
        &eigen.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eigen.eigenvectors.transpose();
    let coef = &xtx_inv * (x.transpose() * y);
    let fitted = x * &coef;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let leverage: Vec<f64> = (0..n)
        .map(|i| {
            let xi = x.row(i).transpose();
            (xi.transpose() * &xtx_inv * &xi)[(0, 0)]
        })
        .collect();
    Ok(OlsFit {
        coef: coef.iter().copied().collect(),
        residuals,
        leverage,
        xtx_inv,
    })
}

/// Closed-form leave-one-out criterion,
/// `(1/n) sum r_i^2 / (1 - H_ii)^2`,
/// equal to the mean of the `n` leave-one-out refit errors.
pub fn loo_ols_closed_form(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    let fit = fit_ols(x, y)?;
    loo_from_fit(&fit)
}

pub fn loo_from_fit(fit: &OlsFit) -> Result<f64> {
    check_leverage(fit)?;
    let n = fit.residuals.len() as f64;
    Ok(fit
        .residuals
        .iter()
        .zip(&fit.leverage)
        .map(|(r, h)| {
            let e = r / (1.0 - h);
            e * e
        })
        .sum::<f64>()
        / n)
}

/// The first-power-denominator variant `(1/n) sum r_i^2 / (1 - H_ii)`,
/// provided read-only for comparison; the squared-denominator form above is
/// the one that matches explicit refits.
pub fn loo_ols_unsquared(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    let fit = fit_ols(x, y)?;
    check_leverage(&fit)?;
    let n = fit.residuals.len() as f64;
    Ok(fit
        .residuals
        .iter()
        .zip(&fit.leverage)
        .map(|(r, h)| r * r / (1.0 - h))
        .sum::<f64>()
        / n)
}

fn check_leverage(fit: &OlsFit) -> Result<()> {
    for (i, &h) in fit.leverage.iter().enumerate() {
        if h >= LEVERAGE_LIMIT {
            return Err(Error::DegenerateLeverage { index: i, leverage: h });
        }
    }
    Ok(())
}

/// Generalized cross-validation: `(RSS/n) / (1 - trace(H)/n)^2`.
///
/// Replacing every `1 - H_ii` by `1 - trace(H)/n` in the closed-form
/// leave-one-out makes the criterion rotation-invariant; with equal
/// leverages the two coincide exactly.
pub fn gcv_ols(h_trace: f64, residual_sum_sq: f64, n: usize) -> Result<f64> {
    if h_trace >= n as f64 {
        return Err(Error::DegenerateSmoother(format!(
            "trace(H) = {h_trace} must be below n = {n}"
        )));
    }
    let n = n as f64;
    let denom = 1.0 - h_trace / n;
    Ok(residual_sum_sq / n / (denom * denom))
}

/// The first-power variant `RSS / (n - trace(H))`, read-only for comparison.
pub fn gcv_unsquared(h_trace: f64, residual_sum_sq: f64, n: usize) -> Result<f64> {
    if h_trace >= n as f64 {
        return Err(Error::DegenerateSmoother(format!(
            "trace(H) = {h_trace} must be below n = {n}"
        )));
    }
    Ok(residual_sum_sq / (n as f64 - h_trace))
}

/// Inverse of `X'X - X_removed' X_removed` from the inverse of `X'X`.
///
/// Uses the rank-q update
/// `(A - U'U)^-1 = A^-1 + A^-1 U' (I - U A^-1 U')^-1 U A^-1`,
/// which costs `O(q^3 + q d^2)` instead of a fresh `O(d^3)` inversion.
pub fn woodbury_downdate(xtx_inv: &DMatrix<f64>, x_removed: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = x_removed.nrows();
    let d = xtx_inv.nrows();
    if q == 0 {
        return Err(Error::bounds("need at least one removed row"));
    }
    if xtx_inv.ncols() != d || x_removed.ncols() != d {
        return Err(Error::shape(format!(
            "dimension mismatch: inverse is {d}x{}, removed block has {} columns",
            xtx_inv.ncols(),
            x_removed.ncols()
        )));
    }
    let u_ainv = x_removed * xtx_inv; // q x d
    let capacitance = DMatrix::identity(q, q) - &u_ainv * x_removed.transpose();
    let eigen = capacitance.clone().symmetric_eigen();
    let max_abs = eigen.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    if eigen.eigenvalues.iter().any(|l| l.abs() <= 1e-12 * max_abs.max(1e-300)) {
        return Err(Error::Singularity(
            "downdated matrix is singular: removed rows carry all the information in some direction"
                .into(),
        ));
    }
    let inv_vals = DVector::from_iterator(q, eigen.eigenvalues.iter().map(|l| 1.0 / l));
    let cap_inv =
        &eigen.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eigen.eigenvectors.transpose();
    Ok(xtx_inv + u_ainv.transpose() * cap_inv * u_ainv)
}

/// Least-squares learning rule; `dims` restricts the design to the first
/// `dims` feature columns, which is how nested model menus are built.
#[derive(Debug, Clone)]
pub struct OlsRule {
    pub dims: Option<usize>,
}

impl OlsRule {
    pub fn new() -> Self {
        OlsRule { dims: None }
    }

    pub fn on_first_dims(dims: usize) -> Self {
        OlsRule { dims: Some(dims) }
    }
}

impl Default for OlsRule {
    fn default() -> Self {
        Self::new()
    }
}

impl Rule for OlsRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        if sample.kind() != TaskKind::Regression {
            return Err(Error::shape("least squares expects a regression sample"));
        }
        let d = match self.dims {
            Some(dims) if dims == 0 || dims > sample.dim() => {
                return Err(Error::bounds(format!(
                    "dims = {dims} out of range for d = {}",
                    sample.dim()
                )))
            }
            Some(dims) => dims,
            None => sample.dim(),
        };
        let canon = sample.canonicalized();
        let n = canon.len();
        let x = DMatrix::from_fn(n, d, |i, j| canon.row(i)[j]);
        let y = DVector::from_fn(n, |i, _| canon.response(i));
        Ok(fit_ols(&x, &y)?.predictor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    use crate::rng::derive_rng;

    /// Brute-force leave-one-out by explicit refits, solved through an SVD
    /// path so it shares no code with the closed form.
    pub(crate) fn loo_by_refits(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
        let n = x.nrows();
        let d = x.ncols();
        let mut total = 0.0;
        for i in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let xi = DMatrix::from_fn(n - 1, d, |r, c| x[(keep[r], c)]);
            let yi = DVector::from_fn(n - 1, |r, _| y[keep[r]]);
            let svd = xi.svd(true, true);
            let beta = svd.solve(&yi, 1e-12).expect("refit solvable");
            let pred: f64 = (0..d).map(|c| x[(i, c)] * beta[c]).sum();
            let e = y[i] - pred;
            total += e * e;
        }
        total / n as f64
    }

    fn random_instance(n: usize, d: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = derive_rng(seed, "test.ols", 0);
        let x = DMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        (x, y)
    }

    #[test]
    fn exact_linear_data_fits_exactly() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_column_slice(&[2.0, 4.0, 6.0]);
        let fit = fit_ols(&x, &y).unwrap();
        assert_relative_eq!(fit.coefficients()[0], 2.0, max_relative = 1e-12);
        assert!(fit.rss() < 1e-20);
    }

    #[test]
    fn orthonormal_design_has_projector_trace() {
        // Columns of X orthonormal: H = X X', trace(H) = d.
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let fit = fit_ols(&x, &y).unwrap();
        assert_relative_eq!(fit.hat_trace(), 2.0, max_relative = 1e-12);
        for i in 0..3 {
            let expected: f64 = (0..2).map(|j| x[(i, j)] * x[(i, j)]).sum();
            assert_relative_eq!(fit.hat_diagonal()[i], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_columns() {
        let (x, y) = random_instance(20, 3, 42);
        let fit = fit_ols(&x, &y).unwrap();
        for j in 0..3 {
            let dot: f64 = (0..20).map(|i| x[(i, j)] * fit.residuals()[i]).sum();
            assert!(dot.abs() < 1e-9, "column {j} dot residual = {dot}");
        }
    }

    #[test]
    fn collinear_design_fails_loudly() {
        let x = DMatrix::from_fn(4, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(fit_ols(&x, &y), Err(Error::Singularity(_))));
    }

    #[test]
    fn loo_zero_on_perfect_fit() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(loo_ols_closed_form(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn loo_two_point_instance_matches_refits() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let y = DVector::from_column_slice(&[1.0, 0.0]);
        let closed = loo_ols_closed_form(&x, &y).unwrap();
        let brute = loo_by_refits(&x, &y);
        assert_relative_eq!(closed, brute, max_relative = 1e-9);
    }

    #[test]
    fn loo_matches_refit_oracle() {
        let (x, y) = random_instance(10, 2, 7);
        let closed = loo_ols_closed_form(&x, &y).unwrap();
        let brute = loo_by_refits(&x, &y);
        assert_relative_eq!(closed, brute, max_relative = 1e-9);
    }

    #[test]
    fn loo_degenerate_leverage_is_an_error() {
        // Two points, one with x = 0: removing the nonzero point makes it
        // uninterpolable; its leverage is exactly 1.
        let x = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let y = DVector::from_column_slice(&[0.0, 1.0]);
        assert!(matches!(
            loo_ols_closed_form(&x, &y),
            Err(Error::DegenerateLeverage { .. })
        ));
    }

    #[test]
    fn gcv_interpolating_fit_is_zero() {
        assert_eq!(gcv_ols(2.0, 0.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn display_variants_relate_to_the_oracle_forms() {
        // Under equal leverages h = trace/n, the first-power display equals
        // the squared-denominator criterion times (1 - h), and the display
        // GCV equals the squared-denominator GCV times (1 - h).
        let x = DMatrix::from_fn(6, 2, |i, j| if (i < 3) == (j == 0) { 1.0 } else { 0.0 });
        let y = DVector::from_column_slice(&[1.0, 2.0, 4.0, 0.5, 1.0, 3.0]);
        let fit = fit_ols(&x, &y).unwrap();
        let h = fit.hat_trace() / 6.0;

        let squared = loo_ols_closed_form(&x, &y).unwrap();
        let display = loo_ols_unsquared(&x, &y).unwrap();
        assert_relative_eq!(display, squared * (1.0 - h), max_relative = 1e-12);

        let gcv = gcv_ols(fit.hat_trace(), fit.rss(), 6).unwrap();
        let gcv_display = gcv_unsquared(fit.hat_trace(), fit.rss(), 6).unwrap();
        assert_relative_eq!(gcv_display, gcv * (1.0 - h), max_relative = 1e-12);
        // n = 4, trace = 2, RSS = 1: display form gives 1/(4 - 2).
        assert_relative_eq!(gcv_unsquared(2.0, 1.0, 4).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn gcv_arithmetic_case() {
        // n = 4, trace = 2, RSS = 1: (1/4) / (1/2)^2 = 1.
        assert_relative_eq!(gcv_ols(2.0, 1.0, 4).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn gcv_equals_loo_under_equal_leverages() {
        // Balanced one-way design: two groups of 3, H_ii = 1/3 for all i.
        let x = DMatrix::from_fn(6, 2, |i, j| if (i < 3) == (j == 0) { 1.0 } else { 0.0 });
        let y = DVector::from_column_slice(&[1.0, 2.0, 4.0, 0.5, 1.0, 3.0]);
        let fit = fit_ols(&x, &y).unwrap();
        for &h in fit.hat_diagonal() {
            assert_relative_eq!(h, fit.hat_trace() / 6.0, epsilon = 1e-12);
        }
        let loo = loo_from_fit(&fit).unwrap();
        let gcv = gcv_ols(fit.hat_trace(), fit.rss(), 6).unwrap();
        assert_relative_eq!(loo, gcv, max_relative = 1e-12);
    }

    #[test]
    fn gcv_degenerate_smoother() {
        assert!(matches!(
            gcv_ols(4.0, 1.0, 4),
            Err(Error::DegenerateSmoother(_))
        ));
    }

    #[test]
    fn woodbury_zero_rows_leave_inverse_unchanged() {
        let (x, _) = random_instance(8, 3, 5);
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let zeros = DMatrix::zeros(2, 3);
        let down = woodbury_downdate(&xtx_inv, &zeros).unwrap();
        assert_relative_eq!(down, xtx_inv, epsilon = 1e-12);
    }

    #[test]
    fn woodbury_matches_direct_inverse() {
        let (x, _) = random_instance(10, 3, 11);
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let removed = DMatrix::from_fn(2, 3, |i, j| x[(i, j)]);
        let down = woodbury_downdate(&xtx_inv, &removed).unwrap();
        let direct = (x.transpose() * &x - removed.transpose() * &removed)
            .try_inverse()
            .unwrap();
        let rel = (&down - &direct).norm() / direct.norm();
        assert!(rel < 1e-8, "relative Frobenius error {rel}");
    }

    #[test]
    fn woodbury_rank_drop_is_an_error() {
        // Only one row informs the first coordinate; removing it drops rank.
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let removed = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(matches!(
            woodbury_downdate(&xtx_inv, &removed),
            Err(Error::Singularity(_))
        ));
    }
}
