//! Exact risks for the fixed generator designs, with a seeded Monte-Carlo
//! fallback for everything else.

use serde::Serialize;

use crate::dataset::{generate, DataGenerator, XLaw};
use crate::error::{Error, Result};
use crate::rules::Predictor;

/// Test-set size used when a risk has no closed form.
pub const DEFAULT_MC_TEST_SIZE: usize = 100_000;

/// A risk value, either exact or estimated on a declared test set.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum RiskValue {
    Exact(f64),
    MonteCarlo {
        value: f64,
        stderr: f64,
        test_size: usize,
    },
}

impl RiskValue {
    pub fn value(&self) -> f64 {
        match *self {
            RiskValue::Exact(v) => v,
            RiskValue::MonteCarlo { value, .. } => value,
        }
    }

    pub fn stderr(&self) -> f64 {
        match *self {
            RiskValue::Exact(_) => 0.0,
            RiskValue::MonteCarlo { stderr, .. } => stderr,
        }
    }
}

/// True risk of `predictor` under `gen`, in the contrast canonically
/// attached to the generator:
///
/// * piecewise-constant density truth, histogram predictor — exact
///   `||f||^2 - 2 int f f* + int f*^2` (the squared L2 distance);
/// * linear-model truth, linear predictor — exact `sigma^2 + E[(f - f*)^2]`
///   under the feature law;
/// * Bernoulli labels, any constant classifier — exact misclassification
///   probability.
///
/// Unsupported combinations fall back to a seeded Monte-Carlo estimate on
/// `DEFAULT_MC_TEST_SIZE` points with a declared standard error.
pub fn true_risk(predictor: &Predictor, gen: &DataGenerator) -> Result<RiskValue> {
    match exact_risk(predictor, gen)? {
        Some(v) => Ok(RiskValue::Exact(v)),
        None => true_risk_mc(predictor, gen, DEFAULT_MC_TEST_SIZE, 0),
    }
}

fn exact_risk(predictor: &Predictor, gen: &DataGenerator) -> Result<Option<f64>> {
    match (gen, predictor) {
        (
            DataGenerator::PiecewiseConstantDensity { .. },
            Predictor::HistogramDensity { .. },
        ) => {
            let truth = generator_pieces(gen)?;
            let fitted = histogram_pieces(predictor);
            let l2 = predictor.l2_norm_sq().expect("histogram has an exact norm");
            let cross = piecewise_integral(&fitted, &truth, |a, b| a * b);
            let truth_sq = piecewise_integral(&truth, &truth, |a, b| a * b);
            Ok(Some(l2 - 2.0 * cross + truth_sq))
        }
        (DataGenerator::LinearModel { beta, sigma, x_law }, Predictor::Linear { coef }) => {
            let delta = coefficient_gap(coef, beta);
            Ok(Some(sigma * sigma + quadratic_form(&delta, *x_law)))
        }
        (DataGenerator::BernoulliLabels { p1 }, _) => {
            let label = predictor.evaluate(&[]);
            if label == 1.0 {
                Ok(Some(1.0 - p1))
            } else if label == 0.0 {
                Ok(Some(*p1))
            } else {
                Err(Error::config(format!(
                    "constant classifier must output 0 or 1, got {label}"
                )))
            }
        }
        _ => Ok(None),
    }
}

/// Excess risk over the best possible predictor: the squared L2 distance for
/// densities, `E[(f - f*)^2]` for regression, and the regret against the
/// Bayes label for classification.
pub fn excess_risk(predictor: &Predictor, gen: &DataGenerator) -> Result<f64> {
    match gen {
        DataGenerator::PiecewiseConstantDensity { .. } => {
            match exact_risk(predictor, gen)? {
                Some(v) => Ok(v),
                None => Err(Error::config(
                    "exact excess risk needs a histogram predictor",
                )),
            }
        }
        DataGenerator::LinearModel { beta, x_law, .. } => {
            if let Predictor::Linear { coef } = predictor {
                let delta = coefficient_gap(coef, beta);
                Ok(quadratic_form(&delta, *x_law))
            } else {
                Err(Error::config("exact excess risk needs a linear predictor"))
            }
        }
        DataGenerator::BernoulliLabels { p1 } => {
            let risk = exact_risk(predictor, gen)?.expect("bernoulli risks are exact");
            Ok(risk - p1.min(1.0 - p1))
        }
    }
}

/// The additive constant linking a density criterion to the L2 distance:
/// criterion values estimate `risk - int f*^2`, so checks comparing them to
/// `true_risk` shift by this offset. Zero for prediction tasks.
pub fn adequacy_offset(gen: &DataGenerator) -> f64 {
    match gen {
        DataGenerator::PiecewiseConstantDensity { .. } => {
            let truth = generator_pieces(gen).expect("validated generator");
            piecewise_integral(&truth, &truth, |a, b| a * b)
        }
        _ => 0.0,
    }
}

/// Monte-Carlo risk on a fresh test set; exact in the generator pieces it
/// can compute (the L2 norms), sampled in the rest.
pub fn true_risk_mc(
    predictor: &Predictor,
    gen: &DataGenerator,
    test_size: usize,
    seed: u64,
) -> Result<RiskValue> {
    if test_size < 2 {
        return Err(Error::bounds("Monte-Carlo risk needs a test size >= 2"));
    }
    gen.validate()?;
    match gen {
        DataGenerator::PiecewiseConstantDensity { .. } => {
            let l2 = predictor.l2_norm_sq().ok_or_else(|| {
                Error::config("density risk needs a predictor with an exact L2 norm")
            })?;
            let truth = generator_pieces(gen)?;
            let truth_sq = piecewise_integral(&truth, &truth, |a, b| a * b);
            let test = generate(gen, test_size, seed)?;
            let values: Vec<f64> = (0..test.len())
                .map(|i| predictor.evaluate(test.row(i)))
                .collect();
            let m = crate::mclab::stats::moments(&values);
            Ok(RiskValue::MonteCarlo {
                value: l2 - 2.0 * m.mean + truth_sq,
                stderr: 2.0 * m.stderr_mean(),
                test_size,
            })
        }
        DataGenerator::LinearModel { .. } => {
            let test = generate(gen, test_size, seed)?;
            let costs: Vec<f64> = (0..test.len())
                .map(|i| {
                    let e = predictor.evaluate(test.row(i)) - test.response(i);
                    e * e
                })
                .collect();
            let m = crate::mclab::stats::moments(&costs);
            Ok(RiskValue::MonteCarlo {
                value: m.mean,
                stderr: m.stderr_mean(),
                test_size,
            })
        }
        DataGenerator::BernoulliLabels { .. } => {
            let test = generate(gen, test_size, seed)?;
            let costs: Vec<f64> = (0..test.len())
                .map(|i| {
                    if predictor.evaluate(&[]) == test.response(i) {
                        0.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let m = crate::mclab::stats::moments(&costs);
            Ok(RiskValue::MonteCarlo {
                value: m.mean,
                stderr: m.stderr_mean(),
                test_size,
            })
        }
    }
}

/// Variance of the pointwise cost of a fixed predictor under the generator:
/// the exact second term of the hold-out variance decomposition, before the
/// division by the validation size.
pub fn pointwise_cost_variance(predictor: &Predictor, gen: &DataGenerator) -> Result<f64> {
    match (gen, predictor) {
        (DataGenerator::PiecewiseConstantDensity { .. }, Predictor::HistogramDensity { .. }) => {
            // Per-point contribution ||f||^2 - 2 f(X): variance 4 Var f(X).
            let truth = generator_pieces(gen)?;
            let fitted = histogram_pieces(predictor);
            let mean = piecewise_integral(&fitted, &truth, |a, b| a * b);
            let second = piecewise_integral(&fitted, &truth, |a, b| a * a * b);
            Ok(4.0 * (second - mean * mean))
        }
        (DataGenerator::LinearModel { beta, sigma, x_law }, Predictor::Linear { coef }) => {
            // Cost (D - eps)^2 with D = x . delta and eps ~ N(0, sigma^2):
            // Var = E[D^4] - E[D^2]^2 + 4 E[D^2] sigma^2 + 2 sigma^4.
            let delta = coefficient_gap(coef, beta);
            let d2 = quadratic_form(&delta, *x_law);
            let d4 = fourth_moment(&delta, *x_law)?;
            let s2 = sigma * sigma;
            Ok(d4 - d2 * d2 + 4.0 * d2 * s2 + 2.0 * s2 * s2)
        }
        (DataGenerator::BernoulliLabels { .. }, _) => {
            let risk = exact_risk(predictor, gen)?.expect("bernoulli risks are exact");
            Ok(risk * (1.0 - risk))
        }
        _ => Err(Error::config(
            "pointwise cost variance has no closed form for this combination",
        )),
    }
}

fn coefficient_gap(coef: &[f64], beta: &[f64]) -> Vec<f64> {
    (0..beta.len().max(coef.len()))
        .map(|j| coef.get(j).copied().unwrap_or(0.0) - beta.get(j).copied().unwrap_or(0.0))
        .collect()
}

/// `E[(x . delta)^2]` under the feature law.
fn quadratic_form(delta: &[f64], x_law: XLaw) -> f64 {
    match x_law {
        // Uniform on [0,1]: E[x_j x_k] = 1/4 + delta_jk / 12.
        XLaw::UniformGrid => {
            let s: f64 = delta.iter().sum();
            let q: f64 = delta.iter().map(|d| d * d).sum();
            s * s / 4.0 + q / 12.0
        }
        XLaw::StandardNormal => delta.iter().map(|d| d * d).sum(),
    }
}

/// `E[(x . delta)^4]` under the feature law; used by the variance
/// decomposition, where only the supported designs need it.
fn fourth_moment(delta: &[f64], x_law: XLaw) -> Result<f64> {
    match x_law {
        XLaw::UniformGrid => {
            if delta.len() != 1 {
                return Err(Error::config("the grid design is one-dimensional"));
            }
            Ok(delta[0].powi(4) / 5.0)
        }
        XLaw::StandardNormal => {
            // x . delta ~ N(0, |delta|^2).
            let s2: f64 = delta.iter().map(|d| d * d).sum();
            Ok(3.0 * s2 * s2)
        }
    }
}

// -- piecewise-constant functions on [0,1] -----------------------------------

#[derive(Debug, Clone)]
pub(crate) struct Piecewise {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

pub(crate) fn generator_pieces(gen: &DataGenerator) -> Result<Piecewise> {
    match gen {
        DataGenerator::PiecewiseConstantDensity {
            breakpoints,
            densities,
        } => {
            gen.validate()?;
            Ok(Piecewise {
                breaks: breakpoints.clone(),
                values: densities.clone(),
            })
        }
        _ => Err(Error::config("not a piecewise-constant generator")),
    }
}

pub(crate) fn histogram_pieces(predictor: &Predictor) -> Piecewise {
    let Predictor::HistogramDensity { bins, values } = predictor else {
        panic!("histogram_pieces needs a histogram predictor")
    };
    Piecewise {
        breaks: (0..=*bins).map(|k| k as f64 / *bins as f64).collect(),
        values: values.clone(),
    }
}

/// `int_0^1 f(a(x), b(x)) dx` for a segment-wise product rule `f`; exact for
/// piecewise-constant `a` and `b`.
pub(crate) fn piecewise_integral(
    a: &Piecewise,
    b: &Piecewise,
    term: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    let mut ia = 0;
    let mut ib = 0;
    let mut lo = 0.0;
    while lo < 1.0 && ia < a.values.len() && ib < b.values.len() {
        let hi = a.breaks[ia + 1].min(b.breaks[ib + 1]);
        total += (hi - lo) * term(a.values[ia], b.values[ib]);
        if a.breaks[ia + 1] <= hi {
            ia += 1;
        }
        if b.breaks[ib + 1] <= hi {
            ib += 1;
        }
        lo = hi;
    }
    total
}
