//! Learning rules, predictors, and contrast functions.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};

pub mod density;
pub mod knn;
pub mod majority;
pub mod ols;
pub mod partition;

pub use density::HistogramRule;
pub use knn::KnnRule;
pub use majority::{MajorityVoteRule, TiePolicy};
pub use ols::OlsRule;
pub use partition::RegressogramRule;

/// A pure map from a sub-sample to a predictor.
///
/// Fits must be deterministic given the sub-sample, the rule parameters, and
/// the rule's internal seed stream. Rules reorder the sub-sample canonically
/// before fitting, so the fit depends only on the row multiset.
pub trait Rule: Send + Sync {
    fn fit(&self, sample: &Dataset) -> Result<Predictor>;
}

impl<R: Rule + ?Sized> Rule for std::sync::Arc<R> {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        (**self).fit(sample)
    }
}

/// Output of a fitted rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    /// `x -> x . coef` over the first `coef.len()` features.
    Linear { coef: Vec<f64> },
    /// Nonnegative piecewise-constant density on the regular grid with
    /// `bins` cells of width `1/bins`; cells are right-open, the last closed.
    HistogramDensity { bins: usize, values: Vec<f64> },
    /// Piecewise-constant regression function on `[0,1]`.
    Regressogram { edges: Vec<f64>, means: Vec<f64> },
    /// k-nearest-neighbour predictor carrying its training sample.
    Knn {
        xs: Vec<f64>,
        ys: Vec<f64>,
        d: usize,
        k: usize,
        classify: bool,
    },
    /// Constant classifier.
    ConstantLabel { label: f64 },
    /// Pointwise mean of the parts (regression aggregation).
    Average(Vec<Predictor>),
    /// Pointwise majority vote of the parts (classification aggregation);
    /// label ties go to the smallest label.
    Vote(Vec<Predictor>),
}

impl Predictor {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Predictor::Linear { coef } => coef.iter().zip(x).map(|(c, v)| c * v).sum(),
            Predictor::HistogramDensity { bins, values } => {
                if !(0.0..=1.0).contains(&x[0]) {
                    return 0.0;
                }
                values[grid_cell(x[0], *bins)]
            }
            Predictor::Regressogram { edges, means } => {
                let xi = x[0].clamp(0.0, 1.0);
                means[partition::cell_of(edges, xi)]
            }
            Predictor::Knn { .. } => knn::evaluate(self, x),
            Predictor::ConstantLabel { label } => *label,
            Predictor::Average(parts) => {
                parts.iter().map(|p| p.evaluate(x)).sum::<f64>() / parts.len() as f64
            }
            Predictor::Vote(parts) => {
                let labels: Vec<f64> = parts.iter().map(|p| p.evaluate(x)).collect();
                majority_label(&labels)
            }
        }
    }

    /// Exact squared L2 norm for density predictors.
    pub fn l2_norm_sq(&self) -> Option<f64> {
        match self {
            Predictor::HistogramDensity { bins, values } => {
                let h = 1.0 / *bins as f64;
                Some(values.iter().map(|v| v * v).sum::<f64>() * h)
            }
            _ => None,
        }
    }
}

/// Cell index of `x` in the regular grid; right-open cells, last closed.
pub(crate) fn grid_cell(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor() as usize).min(bins - 1)
}

/// Majority label with ties going to the smallest label.
pub(crate) fn majority_label(labels: &[f64]) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = sorted[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best_count {
            best = sorted[i];
            best_count = j - i;
        }
        i = j;
    }
    best
}

/// Pointwise cost or sample-adequacy functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contrast {
    /// `(prediction - y)^2`, regression.
    Quadratic,
    /// `1[prediction != y]`, classification.
    ZeroOne,
    /// `||f||^2 - (2/n) sum f(X_i)`, least-squares density estimation.
    DensityLs,
    /// `-(1/n) sum ln f(X_i)`; returns `+inf` when some `f(X_i) = 0`.
    DensityLoglik,
}

impl Contrast {
    pub fn task_kind(self) -> TaskKind {
        match self {
            Contrast::Quadratic => TaskKind::Regression,
            Contrast::ZeroOne => TaskKind::Classification,
            Contrast::DensityLs | Contrast::DensityLoglik => TaskKind::Density,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Contrast::Quadratic => "quadratic",
            Contrast::ZeroOne => "zero-one",
            Contrast::DensityLs => "density-ls",
            Contrast::DensityLoglik => "density-loglik",
        }
    }
}

impl std::str::FromStr for Contrast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Contrast::Quadratic),
            "zero-one" | "zeroone" | "zero_one" => Ok(Contrast::ZeroOne),
            "density-ls" | "density_ls" => Ok(Contrast::DensityLs),
            "density-loglik" | "density_loglik" => Ok(Contrast::DensityLoglik),
            other => Err(Error::config(format!("unknown contrast '{other}'"))),
        }
    }
}

/// Sum in value order, so the result depends only on the multiset of terms.
pub(crate) fn multiset_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Empirical contrast of `predictor` on `sample`: the mean pointwise cost
/// for prediction tasks, or the adequacy functional for density tasks.
pub fn contrast_eval(contrast: Contrast, predictor: &Predictor, sample: &Dataset) -> Result<f64> {
    if sample.kind() != contrast.task_kind() {
        return Err(Error::shape(format!(
            "contrast {} expects a {} sample, got {}",
            contrast.as_str(),
            contrast.task_kind().as_str(),
            sample.kind().as_str()
        )));
    }
    let n = sample.len() as f64;
    match contrast {
        Contrast::Quadratic => {
            let costs: Vec<f64> = (0..sample.len())
                .map(|i| {
                    let e = predictor.evaluate(sample.row(i)) - sample.response(i);
                    e * e
                })
                .collect();
            Ok(multiset_sum(costs) / n)
        }
        Contrast::ZeroOne => {
            let costs: Vec<f64> = (0..sample.len())
                .map(|i| {
                    if predictor.evaluate(sample.row(i)) == sample.response(i) {
                        0.0
                    } else {
                        1.0
                    }
                })
                .collect();
            Ok(multiset_sum(costs) / n)
        }
        Contrast::DensityLs => {
            let l2 = predictor.l2_norm_sq().ok_or_else(|| {
                Error::shape("density contrast needs a predictor with an exact L2 norm")
            })?;
            let values: Vec<f64> = (0..sample.len())
                .map(|i| predictor.evaluate(sample.row(i)))
                .collect();
            Ok(l2 - 2.0 * multiset_sum(values) / n)
        }
        Contrast::DensityLoglik => {
            let mut logs = Vec::with_capacity(sample.len());
            for i in 0..sample.len() {
                let f = predictor.evaluate(sample.row(i));
                if f <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                logs.push(f.ln());
            }
            Ok(-multiset_sum(logs) / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;

    fn density_sample(points: &[f64]) -> Dataset {
        Dataset::new(TaskKind::Density, points.to_vec(), Vec::new(), points.len(), 1).unwrap()
    }

    #[test]
    fn zero_one_correct_constant() {
        let ds = Dataset::new(TaskKind::Classification, vec![], vec![1.0, 1.0], 2, 0).unwrap();
        let pred = Predictor::ConstantLabel { label: 1.0 };
        assert_eq!(contrast_eval(Contrast::ZeroOne, &pred, &ds).unwrap(), 0.0);
    }

    #[test]
    fn density_ls_uniform_predictor() {
        let ds = density_sample(&[0.2, 0.8]);
        let pred = Predictor::HistogramDensity {
            bins: 1,
            values: vec![1.0],
        };
        assert_eq!(contrast_eval(Contrast::DensityLs, &pred, &ds).unwrap(), -1.0);
    }

    #[test]
    fn quadratic_zero_predictor() {
        let ds = Dataset::new(TaskKind::Regression, vec![0.0, 0.0], vec![1.0, 2.0], 2, 1).unwrap();
        let pred = Predictor::Linear { coef: vec![0.0] };
        assert_eq!(
            contrast_eval(Contrast::Quadratic, &pred, &ds).unwrap(),
            2.5
        );
    }

    #[test]
    fn loglik_zero_density_is_infinite() {
        let ds = density_sample(&[0.9]);
        let pred = Predictor::HistogramDensity {
            bins: 2,
            values: vec![2.0, 0.0],
        };
        assert_eq!(
            contrast_eval(Contrast::DensityLoglik, &pred, &ds).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let ds = density_sample(&[0.5]);
        let pred = Predictor::Linear { coef: vec![1.0] };
        assert!(contrast_eval(Contrast::Quadratic, &pred, &ds).is_err());
    }

    #[test]
    fn contrast_value_depends_only_on_multiset() {
        let ds = Dataset::new(
            TaskKind::Regression,
            vec![0.3, 0.7, 0.1, 0.9],
            vec![1.0, -1.0, 0.5, 2.0],
            4,
            1,
        )
        .unwrap();
        let shuffled = ds.subset(&[2, 0, 3, 1]);
        let pred = Predictor::Linear { coef: vec![0.7] };
        let a = contrast_eval(Contrast::Quadratic, &pred, &ds).unwrap();
        let b = contrast_eval(Contrast::Quadratic, &pred, &shuffled).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn vote_breaks_ties_toward_smallest_label() {
        let parts = vec![
            Predictor::ConstantLabel { label: 2.0 },
            Predictor::ConstantLabel { label: 0.0 },
        ];
        assert_eq!(Predictor::Vote(parts).evaluate(&[]), 0.0);
    }

    #[test]
    fn average_is_the_pointwise_mean() {
        let parts = vec![
            Predictor::Linear { coef: vec![1.0] },
            Predictor::Linear { coef: vec![3.0] },
        ];
        assert_eq!(Predictor::Average(parts).evaluate(&[0.5]), 1.0);
    }
}
