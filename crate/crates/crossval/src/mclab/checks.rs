//! Statistical checks on the criterion laws: expectation, unbiasedness of
//! the corrected criterion, variance ordering, affine structure of the
//! Monte-Carlo and repeated V-fold variances, the variance-constant
//! structure, the hold-out variance decomposition, smart-rule probes, and
//! overpenalization sweeps.
//!
//! Every acceptance band is three standard errors wide; standard errors of
//! variances come from the delta method on fourth moments.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{generate, DataGenerator};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::rules::{contrast_eval, Contrast};
use crate::splits::binomial;

use super::constants::{c1_vf, c2_vf};
use super::stats::{affine_fit, moments, AffineFit};
use super::true_risk::{
    adequacy_offset, excess_risk, pointwise_cost_variance, true_risk,
};
use super::{criterion_samples, risk_samples, CriterionKind, PlanSpec, RuleSpec};

/// The common ingredients of a laboratory check.
#[derive(Debug, Clone, Serialize)]
pub struct LabDesign {
    pub generator: DataGenerator,
    pub n: usize,
    pub rule: RuleSpec,
    pub contrast: Contrast,
    pub replicates: usize,
    pub master_seed: u64,
}

const BAND: f64 = 3.0;

fn combined(se: &[f64]) -> f64 {
    se.iter().map(|s| s * s).sum::<f64>().sqrt()
}

// -- expectation law ----------------------------------------------------------

/// Mean criterion against mean true risk at the scheme's training size.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectationLawReport {
    pub scheme: String,
    pub n_e: usize,
    pub criterion_mean: f64,
    pub criterion_stderr: f64,
    /// Mean exact risk at training size `n_e`, shifted to the criterion scale.
    pub risk_mean: f64,
    pub risk_stderr: f64,
    pub pass: bool,
}

/// Checks `E[criterion] = E[risk of a fit on n_e points]` within three
/// combined standard errors.
pub fn expectation_law_check(design: &LabDesign, scheme: PlanSpec) -> Result<ExpectationLawReport> {
    let probe = scheme.build(design.n, 0, u64::MAX)?;
    let n_e = probe.n_e().ok_or_else(|| {
        Error::config("expectation check needs a scheme with equal training sizes")
    })?;
    let samples = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &[scheme],
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let crit = moments(&samples[0]);
    let risks = risk_samples(
        &design.generator,
        n_e,
        &design.rule,
        design.replicates,
        derive_seed(design.master_seed, "mclab.risk", 1),
    )?;
    let risk = moments(&risks);
    let offset = adequacy_offset(&design.generator);
    let lhs = crit.mean;
    let rhs = risk.mean - offset;
    let tol = BAND * combined(&[crit.stderr_mean(), risk.stderr_mean()]);
    Ok(ExpectationLawReport {
        scheme: scheme.label(),
        n_e,
        criterion_mean: lhs,
        criterion_stderr: crit.stderr_mean(),
        risk_mean: rhs,
        risk_stderr: risk.stderr_mean(),
        pass: (lhs - rhs).abs() <= tol,
    })
}

// -- corrected-criterion unbiasedness ----------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CorrectedUnbiasednessReport {
    pub scheme: String,
    /// Paired mean of `corrected criterion - risk at n` (criterion scale).
    pub bias: f64,
    pub bias_stderr: f64,
    pub pass: bool,
}

/// Paired check that the corrected criterion estimates the mean risk at the
/// full sample size without bias.
pub fn corrected_unbiasedness_check(
    design: &LabDesign,
    scheme: PlanSpec,
) -> Result<CorrectedUnbiasednessReport> {
    let offset = adequacy_offset(&design.generator);
    let diffs: Vec<f64> = (0..design.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let ds = generate(
                &design.generator,
                design.n,
                derive_seed(design.master_seed, "mclab.data", r),
            )?;
            let rule = design
                .rule
                .build(derive_seed(design.master_seed, "mclab.rules", r))?;
            let plan = scheme.build(
                design.n,
                derive_seed(design.master_seed, "mclab.plan", r),
                u64::MAX,
            )?;
            let corrected =
                crate::criteria::corrected_cv_risk(rule.as_ref(), &ds, &plan, design.contrast)?;
            let fit = rule.fit(&ds)?;
            let risk = true_risk(&fit, &design.generator)?.value();
            Ok(corrected + offset - risk)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = moments(&diffs);
    Ok(CorrectedUnbiasednessReport {
        scheme: scheme.label(),
        bias: m.mean,
        bias_stderr: m.stderr_mean(),
        pass: m.mean.abs() <= BAND * m.stderr_mean(),
    })
}

// -- variance ordering --------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VarianceOrderingReport {
    pub n_e: usize,
    pub v: usize,
    pub var_holdout: f64,
    pub var_holdout_stderr: f64,
    pub var_mc: f64,
    pub var_mc_stderr: f64,
    pub var_lpo: f64,
    pub var_lpo_stderr: f64,
    pub pass: bool,
}

/// Checks `Var(hold-out) >= Var(MC CV with V splits) >= Var(leave-p-out)`
/// at fixed training size, with a three-standard-error slack on each
/// inequality.
pub fn variance_ordering_check(
    design: &LabDesign,
    n_e: usize,
    v: usize,
) -> Result<VarianceOrderingReport> {
    let plans = [
        PlanSpec::Holdout { n_e },
        PlanSpec::MonteCarlo { v, n_e },
        PlanSpec::LeavePOut { p: design.n - n_e },
    ];
    let columns = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &plans,
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let ho = moments(&columns[0]);
    let mc = moments(&columns[1]);
    let lpo = moments(&columns[2]);
    let first = ho.variance - mc.variance
        >= -BAND * combined(&[ho.stderr_variance(), mc.stderr_variance()]);
    let second = mc.variance - lpo.variance
        >= -BAND * combined(&[mc.stderr_variance(), lpo.stderr_variance()]);
    Ok(VarianceOrderingReport {
        n_e,
        v,
        var_holdout: ho.variance,
        var_holdout_stderr: ho.stderr_variance(),
        var_mc: mc.variance,
        var_mc_stderr: mc.stderr_variance(),
        var_lpo: lpo.variance,
        var_lpo_stderr: lpo.stderr_variance(),
        pass: first && second,
    })
}

// -- affine-in-1/V law --------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VariancePoint {
    pub x: f64,
    pub variance: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineVarianceReport {
    pub points: Vec<VariancePoint>,
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    /// Exhaustive reference variance (leave-p-out) when enumerable.
    pub reference_variance: Option<f64>,
    pub reference_stderr: Option<f64>,
    pub intercept_consistent: Option<bool>,
    pub slope_nonnegative: bool,
    pub r_squared_min: f64,
    pub pass: bool,
}

fn affine_variance_report(
    xs: Vec<f64>,
    columns: &[Vec<f64>],
    reference: Option<(f64, f64)>,
) -> Result<AffineVarianceReport> {
    let points: Vec<VariancePoint> = xs
        .iter()
        .zip(columns)
        .map(|(&x, samples)| {
            let m = moments(samples);
            VariancePoint {
                x,
                variance: m.variance,
                stderr: m.stderr_variance(),
            }
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.variance).collect();
    let ses: Vec<f64> = points.iter().map(|p| p.stderr).collect();
    let fit: AffineFit = affine_fit(&xs, &ys, &ses)?;
    let slope_nonnegative = fit.slope >= -BAND * fit.se_slope;
    let intercept_consistent = reference.map(|(var, se)| {
        (fit.intercept - var).abs() <= BAND * combined(&[fit.se_intercept, se])
    });
    let r_squared_min = 0.95;
    let pass =
        fit.r_squared >= r_squared_min && slope_nonnegative && intercept_consistent.unwrap_or(true);
    Ok(AffineVarianceReport {
        points,
        intercept: fit.intercept,
        slope: fit.slope,
        r_squared: fit.r_squared,
        se_intercept: fit.se_intercept,
        se_slope: fit.se_slope,
        reference_variance: reference.map(|(v, _)| v),
        reference_stderr: reference.map(|(_, s)| s),
        intercept_consistent,
        slope_nonnegative,
        r_squared_min,
        pass,
    })
}

/// Monte-Carlo CV variance as a function of `1/V`: least-squares fit over
/// `v_grid`, intercept checked against the enumerated leave-p-out variance.
pub fn affine_in_inv_v_check(
    design: &LabDesign,
    n_e: usize,
    v_grid: &[usize],
) -> Result<AffineVarianceReport> {
    if v_grid.len() < 3 {
        return Err(Error::config("the V grid needs at least 3 values"));
    }
    let mut plans: Vec<PlanSpec> = v_grid
        .iter()
        .map(|&v| PlanSpec::MonteCarlo { v, n_e })
        .collect();
    plans.push(PlanSpec::LeavePOut { p: design.n - n_e });
    let columns = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &plans,
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let lpo = moments(&columns[v_grid.len()]);
    let xs: Vec<f64> = v_grid.iter().map(|&v| 1.0 / v as f64).collect();
    affine_variance_report(
        xs,
        &columns[..v_grid.len()],
        Some((lpo.variance, lpo.stderr_variance())),
    )
}

/// Repeated V-fold variance as a function of `1/L`; the intercept is checked
/// against the leave-(n/V)-out variance when that is enumerable.
pub fn repeated_vfold_variance_check(
    design: &LabDesign,
    v: usize,
    l_grid: &[usize],
) -> Result<AffineVarianceReport> {
    if l_grid.len() < 3 {
        return Err(Error::config("the L grid needs at least 3 values"));
    }
    let mut plans: Vec<PlanSpec> = l_grid
        .iter()
        .map(|&l| PlanSpec::RepeatedVFold { v, l })
        .collect();
    let p = design.n / v;
    let enumerable = design.n.is_multiple_of(v) && binomial(design.n as u64, p as u64) <= 1_000_000;
    if enumerable {
        plans.push(PlanSpec::LeavePOut { p });
    }
    let columns = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &plans,
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let reference = if enumerable {
        let m = moments(&columns[l_grid.len()]);
        Some((m.variance, m.stderr_variance()))
    } else {
        None
    };
    let xs: Vec<f64> = l_grid.iter().map(|&l| 1.0 / l as f64).collect();
    affine_variance_report(xs, &columns[..l_grid.len()], reference)
}

// -- variance-constant structure ----------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VarianceFitReport {
    pub w1_hat: f64,
    pub w2_hat: f64,
    pub v_fit: (usize, usize),
    pub v_test: usize,
    pub observed: Vec<VariancePoint>,
    pub predicted: Vec<f64>,
    pub relative_error: f64,
    pub r_squared: f64,
    pub w2_positive: bool,
    pub pass: bool,
}

/// Solve for `(W1, W2)` in
/// `Var = (1/n^2) C1_vf(V,n) W1 + (1/n) C2_vf(V,n) W2`
/// from the empirical variances at two V values, then predict the variance
/// at a third and compare.
pub fn variance_constant_cross_prediction(
    design: &LabDesign,
    v_fit: (usize, usize),
    v_test: usize,
) -> Result<VarianceFitReport> {
    if !matches!(design.rule, RuleSpec::Histogram { .. }) {
        return Err(Error::config(
            "the variance-constant structure applies to histogram density rules",
        ));
    }
    let (v1, v2) = v_fit;
    let plans = [
        PlanSpec::VFold { v: v1 },
        PlanSpec::VFold { v: v2 },
        PlanSpec::VFold { v: v_test },
    ];
    let columns = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &plans,
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let n = design.n as f64;
    let row = |v: usize| -> Result<[f64; 2]> {
        Ok([c1_vf(v, design.n)? / (n * n), c2_vf(v, design.n)? / n])
    };
    let a1 = row(v1)?;
    let a2 = row(v2)?;
    let det = a1[0] * a2[1] - a1[1] * a2[0];
    let scale = (a1[0] * a2[1]).abs().max((a1[1] * a2[0]).abs());
    if det.abs() <= 1e-9 * scale {
        return Err(Error::Conditioning(format!(
            "the V pair ({v1}, {v2}) gives a singular system; pick two V values with distinct constants"
        )));
    }
    let m1 = moments(&columns[0]);
    let m2 = moments(&columns[1]);
    let mt = moments(&columns[2]);
    let w1 = (m1.variance * a2[1] - m2.variance * a1[1]) / det;
    let w2 = (m2.variance * a1[0] - m1.variance * a2[0]) / det;
    let predict = |v: usize| -> Result<f64> {
        let r = row(v)?;
        Ok(r[0] * w1 + r[1] * w2)
    };
    let observed = vec![
        VariancePoint {
            x: v1 as f64,
            variance: m1.variance,
            stderr: m1.stderr_variance(),
        },
        VariancePoint {
            x: v2 as f64,
            variance: m2.variance,
            stderr: m2.stderr_variance(),
        },
        VariancePoint {
            x: v_test as f64,
            variance: mt.variance,
            stderr: mt.stderr_variance(),
        },
    ];
    let predicted = vec![predict(v1)?, predict(v2)?, predict(v_test)?];
    let relative_error = (predicted[2] - mt.variance).abs() / mt.variance;
    let mean_obs = observed.iter().map(|p| p.variance).sum::<f64>() / 3.0;
    let ss_tot: f64 = observed
        .iter()
        .map(|p| (p.variance - mean_obs).powi(2))
        .sum();
    let ss_res: f64 = observed
        .iter()
        .zip(&predicted)
        .map(|(p, &q)| (p.variance - q).powi(2))
        .sum();
    Ok(VarianceFitReport {
        w1_hat: w1,
        w2_hat: w2,
        v_fit,
        v_test,
        observed,
        predicted,
        relative_error,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        w2_positive: w2 > 0.0,
        pass: relative_error <= 0.10,
    })
}

// -- hold-out variance decomposition -------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HoldoutDecompositionReport {
    pub n_e: usize,
    pub var_total: f64,
    pub var_total_stderr: f64,
    /// Variance of the true risk of a fit on `n_e` points.
    pub term_risk: f64,
    pub term_risk_stderr: f64,
    /// Mean conditional pointwise-cost variance over the validation size.
    pub term_validation: f64,
    pub term_validation_stderr: f64,
    pub pass: bool,
}

/// Two-term reconstruction of the hold-out criterion variance:
/// `Var(criterion) = Var(risk of the fit) + E[pointwise cost variance]/n_v`.
/// The left side is estimated over replicated hold-out runs, the right side
/// over fits on fresh training samples with the inner moments exact.
pub fn holdout_variance_decomposition_check(
    design: &LabDesign,
    n_e: usize,
) -> Result<HoldoutDecompositionReport> {
    let columns = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &[PlanSpec::Holdout { n_e }],
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let total = moments(&columns[0]);

    let n_v = (design.n - n_e) as f64;
    let stats: Vec<(f64, f64)> = (0..design.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let ds = generate(
                &design.generator,
                n_e,
                derive_seed(design.master_seed, "mclab.risk", r),
            )?;
            let rule = design
                .rule
                .build(derive_seed(design.master_seed, "mclab.rules", r))?;
            let fit = rule.fit(&ds)?;
            let risk = true_risk(&fit, &design.generator)?.value();
            let pcv = pointwise_cost_variance(&fit, &design.generator)?;
            Ok((risk, pcv / n_v))
        })
        .collect::<Result<Vec<_>>>()?;
    let risks: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let conds: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let risk_m = moments(&risks);
    let cond_m = moments(&conds);

    let rhs = risk_m.variance + cond_m.mean;
    let tol = BAND
        * combined(&[
            total.stderr_variance(),
            risk_m.stderr_variance(),
            cond_m.stderr_mean(),
        ]);
    Ok(HoldoutDecompositionReport {
        n_e,
        var_total: total.variance,
        var_total_stderr: total.stderr_variance(),
        term_risk: risk_m.variance,
        term_risk_stderr: risk_m.stderr_variance(),
        term_validation: cond_m.mean,
        term_validation_stderr: cond_m.stderr_mean(),
        pass: (total.variance - rhs).abs() <= tol,
    })
}

// -- increment variance ---------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct IncrementsReport {
    pub scheme: String,
    pub var_increment: f64,
    pub var_increment_stderr: f64,
    pub var_individual_min: f64,
    pub var_individual_stderr: f64,
    pub pass: bool,
}

/// For two comparable rules, the criterion increment should fluctuate much
/// less than either criterion; checked as `Var(inc) < min individual
/// variance` with a three-standard-error separation.
pub fn increments_check(
    design: &LabDesign,
    other: &RuleSpec,
    scheme: PlanSpec,
) -> Result<IncrementsReport> {
    let a = criterion_samples(
        &design.generator,
        design.n,
        &design.rule,
        design.contrast,
        &[scheme],
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let b = criterion_samples(
        &design.generator,
        design.n,
        other,
        design.contrast,
        &[scheme],
        CriterionKind::Plain,
        design.replicates,
        design.master_seed,
    )?;
    let diffs: Vec<f64> = a[0].iter().zip(&b[0]).map(|(x, y)| x - y).collect();
    let am = moments(&a[0]);
    let bm = moments(&b[0]);
    let dm = moments(&diffs);
    let (min_var, min_se) = if am.variance <= bm.variance {
        (am.variance, am.stderr_variance())
    } else {
        (bm.variance, bm.stderr_variance())
    };
    Ok(IncrementsReport {
        scheme: scheme.label(),
        var_increment: dm.variance,
        var_increment_stderr: dm.stderr_variance(),
        var_individual_min: min_var,
        var_individual_stderr: min_se,
        pass: min_var - dm.variance > BAND * combined(&[min_se, dm.stderr_variance()]),
    })
}

// -- smart-rule probe -----------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub n: usize,
    pub mean_risk: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmartnessReport {
    pub exact: bool,
    pub points: Vec<ProbePoint>,
    /// Sample sizes at which the mean risk increased relative to the
    /// previous grid point (beyond noise, for Monte-Carlo probes).
    pub increases: Vec<usize>,
}

/// Mean risk of a constant majority vote on `n` Bernoulli labels, by exact
/// binomial summation.
pub fn exact_majority_risk(n: usize, p1: f64, randomized_tie: bool) -> f64 {
    let q = 1.0 - p1;
    let mut pmf = q.powi(n as i32);
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            pmf *= (n - k + 1) as f64 / k as f64 * (p1 / q);
        }
        let point_risk = match (2 * k).cmp(&n) {
            std::cmp::Ordering::Greater => 1.0 - p1,
            std::cmp::Ordering::Less => p1,
            std::cmp::Ordering::Equal => {
                if randomized_tie {
                    0.5
                } else {
                    p1
                }
            }
        };
        total += pmf * point_risk;
    }
    total
}

/// Mean risk as a function of the sample size, exact for majority votes on
/// Bernoulli labels, Monte-Carlo otherwise. A rule is "smart" when the curve
/// never increases.
pub fn smartness_probe(
    rule: &RuleSpec,
    gen: &DataGenerator,
    n_list: &[usize],
    replicates: usize,
    master_seed: u64,
) -> Result<SmartnessReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("n_list must be strictly increasing"));
    }
    let exact = matches!(
        (rule, gen),
        (
            RuleSpec::MajorityVote { .. },
            DataGenerator::BernoulliLabels { .. }
        )
    );
    let points: Vec<ProbePoint> = if exact {
        let (randomized_tie, p1) = match (rule, gen) {
            (
                RuleSpec::MajorityVote { randomized_tie },
                DataGenerator::BernoulliLabels { p1 },
            ) => (*randomized_tie, *p1),
            _ => unreachable!(),
        };
        n_list
            .iter()
            .map(|&n| ProbePoint {
                n,
                mean_risk: exact_majority_risk(n, p1, randomized_tie),
                stderr: 0.0,
            })
            .collect()
    } else {
        n_list
            .iter()
            .enumerate()
            .map(|(i, &n)| -> Result<ProbePoint> {
                let risks = risk_samples(
                    gen,
                    n,
                    rule,
                    replicates,
                    derive_seed(master_seed, "mclab.risk", i as u64),
                )?;
                let m = moments(&risks);
                Ok(ProbePoint {
                    n,
                    mean_risk: m.mean,
                    stderr: m.stderr_mean(),
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut increases = Vec::new();
    for w in points.windows(2) {
        let slack = if exact {
            1e-12
        } else {
            BAND * combined(&[w[0].stderr, w[1].stderr])
        };
        if w[1].mean_risk > w[0].mean_risk + slack {
            increases.push(w[1].n);
        }
    }
    Ok(SmartnessReport {
        exact,
        points,
        increases,
    })
}

// -- overpenalization sweep -------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub c_grid: Vec<f64>,
    /// Mean of `excess(selected) / min excess` per overpenalization constant.
    pub relative_excess: Vec<f64>,
    pub argmin_c: f64,
    pub penalty_means: Vec<f64>,
}

/// Performance of selection by `empirical risk + C * mean ideal penalty` as
/// a function of `C`. The mean ideal penalty per rule is estimated on a
/// first batch of replicates; the selection performance on a second,
/// independent batch, as the mean relative excess risk against the menu's
/// best entry.
pub fn surpenalization_sweep(
    menu: &[(String, RuleSpec)],
    gen: &DataGenerator,
    n: usize,
    contrast: Contrast,
    c_grid: &[f64],
    replicates: usize,
    master_seed: u64,
) -> Result<SweepReport> {
    if menu.is_empty() {
        return Err(Error::config("sweep needs a nonempty menu"));
    }
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
        return Err(Error::config("C grid must be nonempty and nonnegative"));
    }
    let offset = adequacy_offset(gen);

    // Stage 1: mean ideal penalty per menu entry.
    let penalty_rows: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let ds = generate(gen, n, derive_seed(master_seed, "mclab.data", r))?;
            menu.iter()
                .enumerate()
                .map(|(i, (_, spec))| {
                    let rule = spec.build(derive_seed(
                        master_seed,
                        "mclab.rules",
                        r * menu.len() as u64 + i as u64,
                    ))?;
                    let fit = rule.fit(&ds)?;
                    let risk = true_risk(&fit, gen)?.value() - offset;
                    let empirical = contrast_eval(contrast, &fit, &ds)?;
                    Ok(risk - empirical)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let penalty_means: Vec<f64> = (0..menu.len())
        .map(|i| penalty_rows.iter().map(|row| row[i]).sum::<f64>() / replicates as f64)
        .collect();

    // Stage 2: selection performance per C on fresh replicates.
    let ratio_rows: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let ds = generate(gen, n, derive_seed(master_seed, "mclab.sweep", r))?;
            let mut empirical = Vec::with_capacity(menu.len());
            let mut excess = Vec::with_capacity(menu.len());
            for (i, (_, spec)) in menu.iter().enumerate() {
                let rule = spec.build(derive_seed(
                    master_seed,
                    "mclab.sweep-rules",
                    r * menu.len() as u64 + i as u64,
                ))?;
                let fit = rule.fit(&ds)?;
                empirical.push(contrast_eval(contrast, &fit, &ds)?);
                excess.push(excess_risk(&fit, gen)?);
            }
            let best = excess.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(c_grid
                .iter()
                .map(|&c| {
                    let mut chosen = 0;
                    let mut best_score = f64::INFINITY;
                    for i in 0..menu.len() {
                        let score = empirical[i] + c * penalty_means[i];
                        if score < best_score {
                            best_score = score;
                            chosen = i;
                        }
                    }
                    if best > 0.0 {
                        excess[chosen] / best
                    } else {
                        1.0
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let relative_excess: Vec<f64> = (0..c_grid.len())
        .map(|k| ratio_rows.iter().map(|row| row[k]).sum::<f64>() / replicates as f64)
        .collect();
    let mut argmin = 0;
    for (k, &v) in relative_excess.iter().enumerate() {
        if v < relative_excess[argmin] {
            argmin = k;
        }
    }
    Ok(SweepReport {
        c_grid: c_grid.to_vec(),
        relative_excess,
        argmin_c: c_grid[argmin],
        penalty_means,
    })
}
