//! The expectation law and the corrected criterion's unbiasedness,
//! measured on a small replicated experiment.
//!
//! Run: `cargo run --example bias_laws`

use crossval::mclab::{
    corrected_unbiasedness_check, expectation_law_check, LabDesign, PlanSpec, RuleSpec,
};
use crossval::{Contrast, DataGenerator};

fn main() -> crossval::Result<()> {
    let design = LabDesign {
        generator: DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?,
        n: 50,
        rule: RuleSpec::Histogram { h: 0.25 },
        contrast: Contrast::DensityLs,
        replicates: 2000,
        master_seed: 12,
    };

    println!("plain CV estimates the risk at the training size n_e:");
    for v in [2usize, 5] {
        let report = expectation_law_check(&design, PlanSpec::VFold { v })?;
        println!(
            "  V = {v}: criterion {:.5} +- {:.5} vs risk(n_e = {}) {:.5} +- {:.5} -> {}",
            report.criterion_mean,
            report.criterion_stderr,
            report.n_e,
            report.risk_mean,
            report.risk_stderr,
            if report.pass { "agree" } else { "DISAGREE" }
        );
    }

    println!("\ncorrected CV estimates the risk at n without bias:");
    for v in [2usize, 5] {
        let report = corrected_unbiasedness_check(&design, PlanSpec::VFold { v })?;
        println!(
            "  V = {v}: paired bias {:+.5} +- {:.5} -> {}",
            report.bias,
            report.bias_stderr,
            if report.pass { "compatible with 0" } else { "BIASED" }
        );
    }
    Ok(())
}
