//! A full replicated experiment through the library API: moments of the
//! criteria per (rule, scheme), increment variances, and paired bias
//! against the exact risks.
//!
//! Run: `cargo run --example experiment_report`

use crossval::mclab::{run_experiment, ExperimentConfig, PlanSpec, RuleSpec};
use crossval::splits::DEFAULT_MAX_SPLITS;
use crossval::{Contrast, DataGenerator};

fn main() -> crossval::Result<()> {
    let config = ExperimentConfig {
        generator: DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?,
        n: 50,
        rules: vec![
            ("h=1/2".into(), RuleSpec::Histogram { h: 0.5 }),
            ("h=1/4".into(), RuleSpec::Histogram { h: 0.25 }),
        ],
        contrast: Contrast::DensityLs,
        schemes: vec![
            PlanSpec::VFold { v: 2 },
            PlanSpec::VFold { v: 5 },
            PlanSpec::MonteCarlo { v: 10, n_e: 25 },
            PlanSpec::LeaveOneOut,
        ],
        replicates: 1500,
        master_seed: 99,
        frozen_plans: false,
        max_splits: DEFAULT_MAX_SPLITS,
    };
    let report = run_experiment(&config)?;

    println!(
        "{} replicates, master seed {} ({} failures)\n",
        report.replicates, report.master_seed, report.failures
    );
    println!(
        "{:<7} {:<14} {:>10} {:>11} {:>11} {:>10}",
        "rule", "scheme", "mean", "variance", "corrected", "bias@n"
    );
    for c in &report.cells {
        println!(
            "{:<7} {:<14} {:>10.5} {:>11.3e} {:>11.5} {:>10.5}",
            c.rule,
            c.scheme,
            c.mean,
            c.variance,
            c.corrected_mean,
            c.bias_vs_true_risk.unwrap_or(f64::NAN)
        );
    }
    println!("\nincrement variances (h=1/2 minus h=1/4):");
    for i in &report.increments {
        println!("  {:<14} {:.3e}", i.scheme, i.variance);
    }
    println!("\nthe plain-CV bias shrinks as n_e grows, the corrected column is centered,");
    println!("and increments fluctuate less than either criterion.");
    Ok(())
}
