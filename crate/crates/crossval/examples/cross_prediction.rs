//! The V-fold criterion variance decomposes on the constants C1, C2 with
//! rule-and-law weights W1, W2: fit the weights at two V values, predict a
//! third.
//!
//! Run: `cargo run --example cross_prediction`

use crossval::mclab::{variance_constant_cross_prediction, LabDesign, RuleSpec};
use crossval::{Contrast, DataGenerator};

fn main() -> crossval::Result<()> {
    let design = LabDesign {
        generator: DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?,
        n: 60,
        rule: RuleSpec::Histogram { h: 0.25 },
        contrast: Contrast::DensityLs,
        replicates: 4000,
        master_seed: 31,
    };
    let report = variance_constant_cross_prediction(&design, (2, 5), 10)?;
    println!("fit W1, W2 from Var at V = 2 and V = 5, predict V = 10:");
    println!("  W1 = {:.4}, W2 = {:.5}", report.w1_hat, report.w2_hat);
    for (p, q) in report.observed.iter().zip(&report.predicted) {
        println!(
            "  V = {:<3} observed {:.4e} +- {:.1e}   predicted {:.4e}",
            p.x, p.variance, p.stderr, q
        );
    }
    println!(
        "  relative error at the test point: {:.2}%",
        100.0 * report.relative_error
    );
    Ok(())
}
