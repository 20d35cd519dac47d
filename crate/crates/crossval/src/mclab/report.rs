//! Check orchestration and JSON/CSV report emission.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::checks::{
    affine_in_inv_v_check, corrected_unbiasedness_check, expectation_law_check,
    holdout_variance_decomposition_check, increments_check, repeated_vfold_variance_check,
    smartness_probe, surpenalization_sweep, variance_constant_cross_prediction,
    variance_ordering_check, LabDesign,
};
use super::config::ExperimentSpec;
use super::{MomentReport, PlanSpec};

/// Result of one named check: a PASS/FAIL verdict (or none for purely
/// descriptive probes) plus the full report as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: Option<bool>,
    pub summary: String,
    pub detail: serde_json::Value,
}

impl CheckOutcome {
    pub fn summary_line(&self) -> String {
        match self.pass {
            Some(true) => format!("PASS {}: {}", self.name, self.summary),
            Some(false) => format!("FAIL {}: {}", self.name, self.summary),
            None => format!("INFO {}: {}", self.name, self.summary),
        }
    }
}

fn outcome<T: Serialize>(name: &str, pass: Option<bool>, summary: String, report: &T) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        pass,
        summary,
        detail: serde_json::to_value(report).expect("reports serialize"),
    }
}

/// Run every check requested by the configuration. Each check gets its own
/// derived seed so adding or removing checks never changes the others.
pub fn run_requested_checks(spec: &ExperimentSpec) -> Result<Vec<CheckOutcome>> {
    let mut outcomes = Vec::new();
    for (idx, name) in spec.checks.iter().enumerate() {
        let seed = derive_seed(spec.config.master_seed, "mclab.check", idx as u64);
        outcomes.push(run_check(spec, name, seed)?);
    }
    Ok(outcomes)
}

fn design_for(spec: &ExperimentSpec, seed: u64) -> Result<LabDesign> {
    Ok(LabDesign {
        generator: spec.config.generator.clone(),
        n: spec.config.n,
        rule: spec.extra_rule("check_rule", &spec.config.rules[0].1)?,
        contrast: spec.config.contrast,
        replicates: spec.config.replicates,
        master_seed: seed,
    })
}

fn run_check(spec: &ExperimentSpec, name: &str, seed: u64) -> Result<CheckOutcome> {
    let n = spec.config.n;
    match name {
        "expectation_law" => {
            let design = design_for(spec, seed)?;
            let scheme = spec.extra_scheme("check_scheme", spec.config.schemes[0])?;
            let report = expectation_law_check(&design, scheme)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!(
                    "criterion mean {:.5} vs risk at n_e={} mean {:.5}",
                    report.criterion_mean, report.n_e, report.risk_mean
                ),
                &report,
            ))
        }
        "corrected_unbiased" => {
            let design = design_for(spec, seed)?;
            let scheme = spec.extra_scheme("check_scheme", spec.config.schemes[0])?;
            let report = corrected_unbiasedness_check(&design, scheme)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!("bias {:.6} +- {:.6}", report.bias, report.bias_stderr),
                &report,
            ))
        }
        "variance_ordering" => {
            let design = design_for(spec, seed)?;
            let n_e = spec.extra_usize("check_ne", n / 2)?;
            let v = spec.extra_usize("check_v", 10)?;
            let report = variance_ordering_check(&design, n_e, v)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!(
                    "var holdout {:.3e} >= mc {:.3e} >= lpo {:.3e}",
                    report.var_holdout, report.var_mc, report.var_lpo
                ),
                &report,
            ))
        }
        "affine_in_inv_v" => {
            let design = design_for(spec, seed)?;
            let n_e = spec.extra_usize("check_ne", n / 2)?;
            let v_grid = spec.extra_usize_list("v_grid", &[1, 2, 5, 10, 20, 50])?;
            let report = affine_in_inv_v_check(&design, n_e, &v_grid)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!("R^2 = {:.4}, slope {:.3e}", report.r_squared, report.slope),
                &report,
            ))
        }
        "cross_prediction" => {
            let design = design_for(spec, seed)?;
            let v_fit = spec.extra_usize_list("v_fit", &[2, 5])?;
            if v_fit.len() != 2 {
                return Err(Error::config("v_fit needs exactly two values"));
            }
            let v_test = spec.extra_usize("v_test", 10)?;
            let report =
                variance_constant_cross_prediction(&design, (v_fit[0], v_fit[1]), v_test)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!(
                    "predicted variance at V={} within {:.1}%",
                    v_test,
                    100.0 * report.relative_error
                ),
                &report,
            ))
        }
        "holdout_decomposition" => {
            let design = design_for(spec, seed)?;
            let n_e = spec.extra_usize("check_ne", n / 2)?;
            let report = holdout_variance_decomposition_check(&design, n_e)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!(
                    "total {:.3e} vs {:.3e} + {:.3e}",
                    report.var_total, report.term_risk, report.term_validation
                ),
                &report,
            ))
        }
        "repeated_vfold" => {
            let design = design_for(spec, seed)?;
            let v = spec.extra_usize("rvf_v", 3)?;
            let l_grid = spec.extra_usize_list("l_grid", &[1, 2, 5, 10])?;
            let report = repeated_vfold_variance_check(&design, v, &l_grid)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!("R^2 = {:.4}, slope {:.3e}", report.r_squared, report.slope),
                &report,
            ))
        }
        "increments" => {
            let design = design_for(spec, seed)?;
            if spec.config.rules.len() < 2 {
                return Err(Error::config("the increments check needs two rules"));
            }
            let other = spec.extra_rule("increment_rule", &spec.config.rules[1].1)?;
            let scheme = spec.extra_scheme("check_scheme", spec.config.schemes[0])?;
            let report = increments_check(&design, &other, scheme)?;
            Ok(outcome(
                name,
                Some(report.pass),
                format!(
                    "Var(increment) {:.3e} vs min individual {:.3e}",
                    report.var_increment, report.var_individual_min
                ),
                &report,
            ))
        }
        "smartness" => {
            let design = design_for(spec, seed)?;
            let n_list = spec.extra_usize_list("n_list", &(1..=20).collect::<Vec<_>>())?;
            let report = smartness_probe(
                &design.rule,
                &design.generator,
                &n_list,
                design.replicates,
                seed,
            )?;
            let smart = report.increases.is_empty();
            Ok(outcome(
                name,
                None,
                format!(
                    "{} risk curve; {}",
                    if report.exact { "exact" } else { "monte-carlo" },
                    if smart {
                        "non-increasing (smart)".to_string()
                    } else {
                        format!("increases at n = {:?} (not smart)", report.increases)
                    }
                ),
                &report,
            ))
        }
        "sweep" => {
            let c_grid = spec.extra_f64_list(
                "c_grid",
                &[0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
            )?;
            let report = surpenalization_sweep(
                &spec.config.rules,
                &spec.config.generator,
                n,
                spec.config.contrast,
                &c_grid,
                spec.config.replicates,
                seed,
            )?;
            Ok(outcome(
                name,
                None,
                format!("relative excess minimized at C = {}", report.argmin_c),
                &report,
            ))
        }
        other => Err(Error::config(format!("unknown check '{other}'"))),
    }
}

/// Write the moment report as pretty JSON plus two CSV tables.
pub fn write_moment_report(out_dir: &Path, report: &MomentReport) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    std::fs::write(out_dir.join("cells.csv"), cells_csv(report))?;
    std::fs::write(out_dir.join("increments.csv"), increments_csv(report))?;
    Ok(())
}

pub fn cells_csv(report: &MomentReport) -> String {
    let mut out = String::from(
        "rule,scheme,replicates_used,mean,variance,stderr_mean,stderr_variance,\
corrected_mean,corrected_variance,bias_vs_true_risk,bias_stderr\n",
    );
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.rule,
            c.scheme,
            c.replicates_used,
            c.mean,
            c.variance,
            c.stderr_mean,
            c.stderr_variance,
            c.corrected_mean,
            c.corrected_variance,
            c.bias_vs_true_risk.map_or(String::new(), |v| v.to_string()),
            c.bias_stderr.map_or(String::new(), |v| v.to_string()),
        );
    }
    out
}

pub fn increments_csv(report: &MomentReport) -> String {
    let mut out = String::from("rule_a,rule_b,scheme,replicates_used,variance,stderr_variance\n");
    for i in &report.increments {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            i.rule_a, i.rule_b, i.scheme, i.replicates_used, i.variance, i.stderr_variance
        );
    }
    out
}

/// Write the check outcomes as JSON, a plain-text summary, and per-check
/// CSV tables for the grid-shaped reports; returns the summary lines.
pub fn write_check_outcomes(out_dir: &Path, outcomes: &[CheckOutcome]) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("checks.json"),
        serde_json::to_string_pretty(outcomes)?,
    )?;
    for o in outcomes {
        if let Some(csv) = check_csv(o) {
            std::fs::write(out_dir.join(format!("check_{}.csv", o.name)), csv)?;
        }
    }
    let lines: Vec<String> = outcomes.iter().map(CheckOutcome::summary_line).collect();
    std::fs::write(out_dir.join("checks.txt"), lines.join("\n") + "\n")?;
    Ok(lines)
}

/// CSV table for a check whose report carries a grid (variance points,
/// sweep curves, risk-vs-n probes); `None` for scalar reports.
fn check_csv(outcome: &CheckOutcome) -> Option<String> {
    let detail = &outcome.detail;
    if let Some(points) = detail.get("points").and_then(|p| p.as_array()) {
        // Affine variance reports and smartness probes both expose `points`.
        if points.first()?.get("variance").is_some() {
            let mut out = String::from("x,variance,stderr\n");
            for p in points {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    p["x"], p["variance"], p["stderr"]
                );
            }
            return Some(out);
        }
        if points.first()?.get("mean_risk").is_some() {
            let mut out = String::from("n,mean_risk,stderr\n");
            for p in points {
                let _ = writeln!(out, "{},{},{}", p["n"], p["mean_risk"], p["stderr"]);
            }
            return Some(out);
        }
    }
    if let (Some(grid), Some(curve)) = (
        detail.get("c_grid").and_then(|g| g.as_array()),
        detail.get("relative_excess").and_then(|g| g.as_array()),
    ) {
        let mut out = String::from("c,relative_excess\n");
        for (c, v) in grid.iter().zip(curve) {
            let _ = writeln!(out, "{c},{v}");
        }
        return Some(out);
    }
    if let (Some(obs), Some(pred)) = (
        detail.get("observed").and_then(|g| g.as_array()),
        detail.get("predicted").and_then(|g| g.as_array()),
    ) {
        let mut out = String::from("v,observed_variance,stderr,predicted_variance\n");
        for (p, q) in obs.iter().zip(pred) {
            let _ = writeln!(out, "{},{},{},{q}", p["x"], p["variance"], p["stderr"]);
        }
        return Some(out);
    }
    None
}

/// Scheme spec helper shared by the CLI: resolve the scheme implied by
/// estimate/select flags.
pub fn scheme_from_flags(
    scheme: &str,
    v: Option<usize>,
    n_e: Option<usize>,
    p: Option<usize>,
    l: Option<usize>,
) -> Result<PlanSpec> {
    match scheme {
        "holdout" => Ok(PlanSpec::Holdout {
            n_e: n_e.ok_or_else(|| Error::config("holdout needs --ne"))?,
        }),
        "vfold" => Ok(PlanSpec::VFold {
            v: v.ok_or_else(|| Error::config("vfold needs --v"))?,
        }),
        "mc" => Ok(PlanSpec::MonteCarlo {
            v: v.ok_or_else(|| Error::config("mc needs --v"))?,
            n_e: n_e.ok_or_else(|| Error::config("mc needs --ne"))?,
        }),
        "loo" => Ok(PlanSpec::LeaveOneOut),
        "lpo" => Ok(PlanSpec::LeavePOut {
            p: p.ok_or_else(|| Error::config("lpo needs --p"))?,
        }),
        "rvf" => Ok(PlanSpec::RepeatedVFold {
            v: v.ok_or_else(|| Error::config("rvf needs --v"))?,
            l: l.ok_or_else(|| Error::config("rvf needs --l"))?,
        }),
        other => Err(Error::config(format!("unknown scheme '{other}'"))),
    }
}
