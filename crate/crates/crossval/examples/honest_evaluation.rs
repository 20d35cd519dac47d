//! Reusing the selection criterion underestimates the risk of the selected
//! rule; wrapping the whole pipeline as a rule fixes that.
//!
//! Run: `cargo run --example honest_evaluation`

use std::sync::Arc;

use crossval::criteria::cv_risk;
use crossval::select::{wrap_selection_as_rule, RuleMenu};
use crossval::rules::{HistogramRule, Rule};
use crossval::splits::vfold;
use crossval::{generate, Contrast, DataGenerator};

fn menu() -> crossval::Result<RuleMenu> {
    RuleMenu::new(vec![
        ("h=1".into(), Arc::new(HistogramRule::new(1.0)) as Arc<dyn Rule>),
        ("h=1/2".into(), Arc::new(HistogramRule::new(0.5)) as Arc<dyn Rule>),
        ("h=1/4".into(), Arc::new(HistogramRule::new(0.25)) as Arc<dyn Rule>),
    ])
}

fn main() -> crossval::Result<()> {
    let truth = DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?;
    let replicates = 60;
    let mut naive_sum = 0.0;
    let mut honest_sum = 0.0;
    for r in 0..replicates {
        let ds = generate(&truth, 30, 100 + r)?;
        let outer = vfold(30, 5, 200 + r)?;

        // Naive: report the winning criterion value itself.
        let mut naive = f64::INFINITY;
        for (_, rule) in menu()?.iter() {
            naive = naive.min(cv_risk(rule.as_ref(), &ds, &outer, Contrast::DensityLs)?.value);
        }

        // Honest: cross-validate the whole pipeline (inner selection redraws
        // its own plans, so this is nested cross-validation).
        let wrapped = wrap_selection_as_rule(
            menu()?,
            Box::new(|n, seed| vfold(n, 5, seed)),
            Contrast::DensityLs,
            300 + r,
        );
        let honest = cv_risk(&wrapped, &ds, &outer, Contrast::DensityLs)?.value;

        naive_sum += naive;
        honest_sum += honest;
    }
    let naive = naive_sum / replicates as f64;
    let honest = honest_sum / replicates as f64;
    println!("mean over {replicates} replicates (n = 30, two-cell truth):");
    println!("  reused minimum criterion   {naive:.4}");
    println!("  wrapped-pipeline criterion {honest:.4}");
    println!("  optimism of the reuse      {:.4}", honest - naive);
    Ok(())
}
