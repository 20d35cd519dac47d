//! Risk criteria: hold-out, cross-validation, bias-corrected
//! cross-validation, V-fold penalization, and the theoretical bias and
//! overpenalization constants.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rules::{contrast_eval, Contrast, Rule};
use crate::splits::{Scheme, Split, SplitPlan};

/// A criterion value together with its per-split components.
///
/// `value` is the arithmetic mean of `per_split`, reduced in plan order.
#[derive(Debug, Clone, Serialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub n_e: Option<usize>,
    pub scheme: Scheme,
    pub per_split: Vec<f64>,
}

/// Constants of the risk expansion `E[risk](n) = alpha + beta/n` and of the
/// ideal-penalty expansion `E[penalty](n) = gamma/n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoreticalModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TheoreticalModel {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::config(format!("beta must be > 0, got {beta}")));
        }
        Ok(TheoreticalModel { alpha, beta, gamma })
    }

    /// `alpha + beta/n`.
    pub fn mean_risk(&self, n: usize) -> f64 {
        self.alpha + self.beta / n as f64
    }
}

/// Hold-out risk: train on the split's training sub-sample, evaluate the
/// contrast on the validation sub-sample.
pub fn holdout_risk(
    rule: &dyn Rule,
    ds: &Dataset,
    split: &Split,
    contrast: Contrast,
) -> Result<f64> {
    if split.n() != ds.len() {
        return Err(Error::shape(format!(
            "split over n = {} applied to a sample of size {}",
            split.n(),
            ds.len()
        )));
    }
    let predictor = rule.fit(&ds.subset(split.train()))?;
    contrast_eval(contrast, &predictor, &ds.subset(&split.validation()))
}

/// Cross-validation criterion: the per-split hold-out values in plan order
/// and their mean.
pub fn cv_risk(
    rule: &dyn Rule,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
) -> Result<RiskEstimate> {
    let detail = cv_detail(rule, ds, plan, contrast, false)?;
    Ok(RiskEstimate {
        value: mean_in_order(&detail.per_split),
        n_e: plan.n_e(),
        scheme: plan.scheme(),
        per_split: detail.per_split,
    })
}

pub(crate) struct CvDetail {
    /// Hold-out value of each split, in plan order.
    pub per_split: Vec<f64>,
    /// Full-sample empirical contrast of each fold fit, in plan order;
    /// filled only when requested.
    pub per_split_full: Vec<f64>,
}

pub(crate) fn cv_detail(
    rule: &dyn Rule,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
    with_full: bool,
) -> Result<CvDetail> {
    if plan.n() != ds.len() {
        return Err(Error::shape(format!(
            "plan over n = {} applied to a sample of size {}",
            plan.n(),
            ds.len()
        )));
    }
    let mut per_split = Vec::with_capacity(plan.len());
    let mut per_split_full = Vec::with_capacity(if with_full { plan.len() } else { 0 });
    for split in plan.splits() {
        let predictor = rule.fit(&ds.subset(split.train()))?;
        per_split.push(contrast_eval(
            contrast,
            &predictor,
            &ds.subset(&split.validation()),
        )?);
        if with_full {
            per_split_full.push(contrast_eval(contrast, &predictor, ds)?);
        }
    }
    Ok(CvDetail {
        per_split,
        per_split_full,
    })
}

fn mean_in_order(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Bias-corrected cross-validation:
/// CV plus the full-sample empirical contrast of the full fit, minus the
/// mean full-sample empirical contrast of the fold fits.
pub fn corrected_cv_risk(
    rule: &dyn Rule,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
) -> Result<f64> {
    let detail = cv_detail(rule, ds, plan, contrast, true)?;
    let full_fit = rule.fit(ds)?;
    let full_value = contrast_eval(contrast, &full_fit, ds)?;
    Ok(mean_in_order(&detail.per_split) + full_value - mean_in_order(&detail.per_split_full))
}

/// Penalized empirical risk with overpenalization constant `c`:
/// the full-sample empirical contrast plus `c` times the V-fold penalty.
/// The penalty is pinned by the identity "corrected V-fold CV equals the
/// penalized criterion at c = 1", which holds bit-for-bit here.
pub fn vfold_penalized_criterion(
    rule: &dyn Rule,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
    c: f64,
) -> Result<f64> {
    if !matches!(plan.scheme(), Scheme::VFold { .. }) {
        return Err(Error::Scheme(format!(
            "V-fold penalization needs a vfold plan, got {}",
            plan.scheme()
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::bounds(format!(
            "overpenalization constant must be finite and >= 0, got {c}"
        )));
    }
    let detail = cv_detail(rule, ds, plan, contrast, true)?;
    let full_fit = rule.fit(ds)?;
    let empirical = contrast_eval(contrast, &full_fit, ds)?;
    let corrected =
        mean_in_order(&detail.per_split) + empirical - mean_in_order(&detail.per_split_full);
    if c == 1.0 {
        return Ok(corrected);
    }
    let penalty = corrected - empirical;
    Ok(empirical + c * penalty)
}

/// Bias of a cross-validation criterion with training size `n_e` under the
/// risk expansion `alpha + beta/n`: `beta (1/n_e - 1/n)`.
///
/// `n_e = n` is admitted as the boundary case and gives 0.
pub fn theoretical_bias(model: &TheoreticalModel, n: usize, n_e: usize) -> Result<f64> {
    if n_e == 0 || n_e > n {
        return Err(Error::bounds(format!(
            "training size must satisfy 1 <= n_e <= n, got n_e = {n_e}, n = {n}"
        )));
    }
    Ok(model.beta * (1.0 / n_e as f64 - 1.0 / n as f64))
}

/// Overpenalization factor of cross-validation with training size `n_e`:
/// `(1 + n/n_e) / 2`.
pub fn overpenalization_factor_cv(n: usize, n_e: usize) -> Result<f64> {
    if n_e == 0 || n_e > n {
        return Err(Error::bounds(format!(
            "training size must satisfy 1 <= n_e <= n, got n_e = {n_e}, n = {n}"
        )));
    }
    Ok(0.5 * (1.0 + n as f64 / n_e as f64))
}

/// Overpenalization factor of V-fold cross-validation: `1 + 1/(2(V-1))`.
pub fn overpenalization_factor_vfold(v: usize) -> Result<f64> {
    if v < 2 {
        return Err(Error::bounds(format!("V must be >= 2, got {v}")));
    }
    Ok(1.0 + 1.0 / (2.0 * (v as f64 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, DataGenerator, Dataset, TaskKind, XLaw};
    use crate::rules::{HistogramRule, MajorityVoteRule, OlsRule, RegressogramRule, TiePolicy};
    use crate::splits::{self, DEFAULT_MAX_SPLITS};

    fn linear_dataset(n: usize) -> Dataset {
        let gen = DataGenerator::LinearModel {
            beta: vec![2.0],
            sigma: 0.0,
            x_law: XLaw::UniformGrid,
        };
        generate(&gen, n, 0).unwrap()
    }

    fn density_dataset(n: usize, seed: u64) -> Dataset {
        let gen = DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).unwrap();
        generate(&gen, n, seed).unwrap()
    }

    #[test]
    fn holdout_zero_on_noiseless_linear_truth() {
        let ds = linear_dataset(6);
        let split = Split::new(vec![0, 2, 4], 6).unwrap();
        let value = holdout_risk(&OlsRule::new(), &ds, &split, Contrast::Quadratic).unwrap();
        assert!(value < 1e-20, "value = {value}");
    }

    #[test]
    fn holdout_forced_misclassification() {
        let ds = Dataset::new(
            TaskKind::Classification,
            vec![],
            vec![1.0, 1.0, 0.0],
            3,
            0,
        )
        .unwrap();
        let split = Split::new(vec![0, 1], 3).unwrap();
        let rule = MajorityVoteRule::new(TiePolicy::DeterministicZero);
        assert_eq!(
            holdout_risk(&rule, &ds, &split, Contrast::ZeroOne).unwrap(),
            1.0
        );
    }

    #[test]
    fn holdout_flat_histogram_is_minus_one() {
        let ds = density_dataset(8, 1);
        let split = Split::new(vec![0, 1, 2, 3, 4], 8).unwrap();
        let value =
            holdout_risk(&HistogramRule::new(1.0), &ds, &split, Contrast::DensityLs).unwrap();
        assert_eq!(value, -1.0);
    }

    #[test]
    fn holdout_size_mismatch() {
        let ds = linear_dataset(6);
        let split = Split::new(vec![0, 1], 4).unwrap();
        assert!(holdout_risk(&OlsRule::new(), &ds, &split, Contrast::Quadratic).is_err());
    }

    #[test]
    fn cv_single_split_equals_holdout() {
        let ds = density_dataset(10, 2);
        let plan = splits::holdout(10, 6, 9).unwrap();
        let rule = HistogramRule::new(0.25);
        let cv = cv_risk(&rule, &ds, &plan, Contrast::DensityLs).unwrap();
        let ho = holdout_risk(&rule, &ds, &plan.splits()[0], Contrast::DensityLs).unwrap();
        assert_eq!(cv.value.to_bits(), ho.to_bits());
        assert_eq!(cv.per_split.len(), 1);
    }

    #[test]
    fn cv_loo_on_perfect_fit_is_zero() {
        let ds = linear_dataset(5);
        let plan = splits::leave_one_out(5).unwrap();
        let cv = cv_risk(&OlsRule::new(), &ds, &plan, Contrast::Quadratic).unwrap();
        assert!(cv.value < 1e-20);
    }

    #[test]
    fn cv_regressogram_matches_brute_force_over_all_folds() {
        // n = 4, leave-2-out: six folds, each fit on 2 points.
        let x = [0.1, 0.4, 0.6, 0.9];
        let y = [1.0, 2.0, -1.0, 3.0];
        let ds = Dataset::new(TaskKind::Regression, x.to_vec(), y.to_vec(), 4, 1).unwrap();
        let edges = [0.0, 0.5, 1.0];
        let plan = splits::leave_p_out(4, 2, DEFAULT_MAX_SPLITS).unwrap();
        let rule = RegressogramRule::new(edges.to_vec()).unwrap();
        let cv = cv_risk(&rule, &ds, &plan, Contrast::Quadratic).unwrap();

        // Independent brute force: mean over folds of the mean squared error
        // of the per-cell-mean fit.
        let mut fold_values = Vec::new();
        for split in plan.splits() {
            let train = split.train();
            let mut cell_sum = [0.0f64; 2];
            let mut cell_count = [0usize; 2];
            for &i in train {
                let cell = usize::from(x[i] >= 0.5);
                cell_sum[cell] += y[i];
                cell_count[cell] += 1;
            }
            let predict = |xi: f64| {
                let cell = usize::from(xi >= 0.5);
                if cell_count[cell] == 0 {
                    0.0
                } else {
                    cell_sum[cell] / cell_count[cell] as f64
                }
            };
            let validation = split.validation();
            let mse = validation
                .iter()
                .map(|&i| {
                    let e = predict(x[i]) - y[i];
                    e * e
                })
                .sum::<f64>()
                / validation.len() as f64;
            fold_values.push(mse);
        }
        let expected = fold_values.iter().sum::<f64>() / 6.0;
        assert!((cv.value - expected).abs() <= 1e-12);
    }

    #[test]
    fn corrected_equals_plain_for_data_ignoring_rule() {
        let ds = density_dataset(12, 3);
        let plan = splits::vfold(12, 3, 4).unwrap();
        let rule = HistogramRule::new(1.0);
        let plain = cv_risk(&rule, &ds, &plan, Contrast::DensityLs).unwrap();
        let corrected = corrected_cv_risk(&rule, &ds, &plan, Contrast::DensityLs).unwrap();
        assert_eq!(plain.value.to_bits(), corrected.to_bits());
    }

    #[test]
    fn corrected_loo_on_perfect_fit_is_zero() {
        let ds = linear_dataset(5);
        let plan = splits::leave_one_out(5).unwrap();
        let corrected =
            corrected_cv_risk(&OlsRule::new(), &ds, &plan, Contrast::Quadratic).unwrap();
        assert!(corrected.abs() < 1e-18);
    }

    #[test]
    fn penalized_identities() {
        let ds = density_dataset(12, 5);
        let plan = splits::vfold(12, 4, 6).unwrap();
        let rule = HistogramRule::new(0.25);

        let corrected = corrected_cv_risk(&rule, &ds, &plan, Contrast::DensityLs).unwrap();
        let at_one =
            vfold_penalized_criterion(&rule, &ds, &plan, Contrast::DensityLs, 1.0).unwrap();
        assert_eq!(corrected.to_bits(), at_one.to_bits());

        let full = contrast_eval(Contrast::DensityLs, &rule.fit(&ds).unwrap(), &ds).unwrap();
        let at_zero =
            vfold_penalized_criterion(&rule, &ds, &plan, Contrast::DensityLs, 0.0).unwrap();
        assert_eq!(full.to_bits(), at_zero.to_bits());

        let at_two =
            vfold_penalized_criterion(&rule, &ds, &plan, Contrast::DensityLs, 2.0).unwrap();
        let recomputed = full + 2.0 * (corrected - full);
        assert!((at_two - recomputed).abs() <= 1e-15);
    }

    #[test]
    fn penalized_rejects_non_vfold_plans() {
        let ds = density_dataset(8, 6);
        let plan = splits::monte_carlo(8, 4, 3, 7).unwrap();
        assert!(matches!(
            vfold_penalized_criterion(
                &HistogramRule::new(0.5),
                &ds,
                &plan,
                Contrast::DensityLs,
                1.0
            ),
            Err(Error::Scheme(_))
        ));
    }

    #[test]
    fn theoretical_bias_values() {
        let model = TheoreticalModel::new(0.0, 1.0, 2.0).unwrap();
        let near_full = theoretical_bias(&model, 1000, 999).unwrap();
        assert!((near_full - 1.0 / 999_000.0).abs() < 1e-18);
        // Negligible next to the estimation error beta/n itself.
        assert!(near_full < 1e-2 * model.beta / 1000.0);

        let half = theoretical_bias(&model, 100, 50).unwrap();
        assert!((half - model.beta / 100.0).abs() < 1e-15);

        assert_eq!(theoretical_bias(&model, 100, 100).unwrap(), 0.0);
        assert!(theoretical_bias(&model, 100, 0).is_err());
        assert!(theoretical_bias(&model, 100, 101).is_err());
    }

    #[test]
    fn overpenalization_factors() {
        assert!((overpenalization_factor_vfold(5).unwrap() - 1.125).abs() < 1e-15);
        assert!((overpenalization_factor_vfold(10).unwrap() - 1.0556).abs() < 5e-5);
        assert_eq!(overpenalization_factor_cv(100, 100).unwrap(), 1.0);
        assert_eq!(overpenalization_factor_cv(100, 50).unwrap(), 1.5);
        assert!(overpenalization_factor_vfold(1).is_err());
    }

    #[test]
    fn cv_value_is_permutation_equivariant() {
        let ds = density_dataset(15, 8);
        let plan = splits::vfold(15, 4, 2).unwrap();
        let rule = HistogramRule::new(0.2);
        let original = cv_risk(&rule, &ds, &plan, Contrast::DensityLs).unwrap();

        // Relabel: row j of the permuted sample is row perm[j] of the
        // original, so original index i becomes inv[i].
        let perm: Vec<usize> = vec![4, 9, 1, 13, 0, 7, 11, 2, 14, 5, 8, 3, 12, 6, 10];
        let mut inv = [0usize; 15];
        for (j, &i) in perm.iter().enumerate() {
            inv[i] = j;
        }
        let permuted_ds = ds.subset(&perm);
        let relabeled: Vec<Split> = plan
            .splits()
            .iter()
            .map(|s| Split::new(s.train().iter().map(|&i| inv[i]).collect(), 15).unwrap())
            .collect();
        let mut value = 0.0;
        for (k, split) in relabeled.iter().enumerate() {
            let v = holdout_risk(&rule, &permuted_ds, split, Contrast::DensityLs).unwrap();
            assert_eq!(
                v.to_bits(),
                original.per_split[k].to_bits(),
                "per-split value changed under relabeling"
            );
            value += v;
        }
        value /= relabeled.len() as f64;
        assert_eq!(value.to_bits(), original.value.to_bits());
    }

    #[test]
    fn cv_aggregates_over_concatenated_plans() {
        let ds = density_dataset(12, 9);
        let rule = HistogramRule::new(0.25);
        let plan_a = splits::monte_carlo(12, 6, 3, 1).unwrap();
        let plan_b = splits::monte_carlo(12, 6, 5, 2).unwrap();
        let combined = plan_a.concat(&plan_b).unwrap();
        let va = cv_risk(&rule, &ds, &plan_a, Contrast::DensityLs).unwrap().value;
        let vb = cv_risk(&rule, &ds, &plan_b, Contrast::DensityLs).unwrap().value;
        let vc = cv_risk(&rule, &ds, &combined, Contrast::DensityLs).unwrap().value;
        let weighted = (3.0 * va + 5.0 * vb) / 8.0;
        assert!((vc - weighted).abs() <= 1e-12);
    }

    #[test]
    fn cv_over_all_subsets_coincides_with_lpo() {
        // A plan that enumerates every size-n_e training set once, whatever
        // its scheme tag, produces the exact leave-p-out value.
        let ds = density_dataset(8, 11);
        let rule = HistogramRule::new(0.25);
        let lpo = splits::leave_p_out(8, 3, DEFAULT_MAX_SPLITS).unwrap();
        let json = serde_json::to_string(&lpo).unwrap();
        let retagged: splits::SplitPlan = serde_json::from_str(
            &json
                .replace("\"leave_p_out\",\"p\":3", "\"monte_carlo\",\"v\":56")
                .replace("\"seed\":null", "\"seed\":9"),
        )
        .unwrap();
        let a = cv_risk(&rule, &ds, &lpo, Contrast::DensityLs).unwrap();
        let b = cv_risk(&rule, &ds, &retagged, Contrast::DensityLs).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn risk_estimate_json_shape() {
        let ds = density_dataset(8, 10);
        let plan = splits::vfold(8, 2, 3).unwrap();
        let est = cv_risk(&HistogramRule::new(0.5), &ds, &plan, Contrast::DensityLs).unwrap();
        let json = serde_json::to_string(&est).unwrap();
        let v = json.find("\"value\"").unwrap();
        let ne = json.find("\"n_e\"").unwrap();
        let sc = json.find("\"scheme\"").unwrap();
        let ps = json.find("\"per_split\"").unwrap();
        assert!(v < ne && ne < sc && sc < ps);
    }
}
