//! Plain, corrected, and penalized criteria for histogram density
//! estimation on one sample.
//!
//! Run: `cargo run --example density_criteria`

use crossval::criteria::{corrected_cv_risk, cv_risk, vfold_penalized_criterion};
use crossval::rules::HistogramRule;
use crossval::splits::vfold;
use crossval::{generate, Contrast, DataGenerator};

fn main() -> crossval::Result<()> {
    let truth = DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?;
    let ds = generate(&truth, 200, 3)?;
    let plan = vfold(200, 5, 11)?;

    println!("5-fold criteria on 200 points from a two-cell density:\n");
    println!("{:<8} {:>12} {:>14}", "width", "cv", "corrected cv");
    for h in [1.0, 0.5, 0.25, 0.125, 0.0625] {
        let rule = HistogramRule::new(h);
        let plain = cv_risk(&rule, &ds, &plan, Contrast::DensityLs)?;
        let corrected = corrected_cv_risk(&rule, &ds, &plan, Contrast::DensityLs)?;
        println!("{h:<8} {:>12.5} {:>14.5}", plain.value, corrected);
    }

    let rule = HistogramRule::new(0.25);
    println!("\npenalized criterion (h = 1/4) as the constant varies:");
    for c in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let value = vfold_penalized_criterion(&rule, &ds, &plan, Contrast::DensityLs, c)?;
        println!("  C = {c:<4} -> {value:.5}");
    }
    let corrected = corrected_cv_risk(&rule, &ds, &plan, Contrast::DensityLs)?;
    let at_one = vfold_penalized_criterion(&rule, &ds, &plan, Contrast::DensityLs, 1.0)?;
    println!(
        "\nat C = 1 the penalized criterion is the corrected one, bit for bit: {}",
        corrected.to_bits() == at_one.to_bits()
    );
    Ok(())
}
