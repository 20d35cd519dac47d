//! Argmin selection, voting selection, and aggregated prediction.
//!
//! Run: `cargo run --example selection`

use std::sync::Arc;

use crossval::select::{aggregate_predict, cv_select, vote_select, RuleMenu};
use crossval::rules::{HistogramRule, KnnRule, RegressogramRule, Rule};
use crossval::splits::vfold;
use crossval::{generate, Contrast, DataGenerator, XLaw};

fn main() -> crossval::Result<()> {
    // Density menu: bin widths.
    let truth = DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?;
    let ds = generate(&truth, 200, 5)?;
    let plan = vfold(200, 5, 1)?;
    let menu = RuleMenu::new(vec![
        ("h=1".into(), Arc::new(HistogramRule::new(1.0)) as Arc<dyn Rule>),
        ("h=1/2".into(), Arc::new(HistogramRule::new(0.5)) as Arc<dyn Rule>),
        ("h=1/4".into(), Arc::new(HistogramRule::new(0.25)) as Arc<dyn Rule>),
        ("h=1/8".into(), Arc::new(HistogramRule::new(0.125)) as Arc<dyn Rule>),
    ])?;

    let argmin = cv_select(&menu, &ds, &plan, Contrast::DensityLs)?;
    println!("argmin selection over bin widths:");
    for entry in &argmin.criterion_values {
        println!("  {:<6} cv = {:.5}", entry.id, entry.value);
    }
    println!("  chosen: {}\n", argmin.chosen);

    let vote = vote_select(&menu, &ds, &plan, Contrast::DensityLs)?;
    println!(
        "voting selection: per-split winners {:?} -> {}\n",
        vote.per_split_winners.as_ref().unwrap(),
        vote.chosen
    );

    // Regression menu for aggregation: piecewise means vs nearest neighbours.
    let line = DataGenerator::LinearModel {
        beta: vec![1.0],
        sigma: 0.2,
        x_law: XLaw::UniformGrid,
    };
    let reg = generate(&line, 60, 9)?;
    let reg_plan = vfold(60, 5, 2)?;
    let reg_menu = RuleMenu::new(vec![
        (
            "part4".into(),
            Arc::new(RegressogramRule::regular(4)?) as Arc<dyn Rule>,
        ),
        (
            "part8".into(),
            Arc::new(RegressogramRule::regular(8)?) as Arc<dyn Rule>,
        ),
        ("knn5".into(), Arc::new(KnnRule::new(5)?) as Arc<dyn Rule>),
    ])?;
    println!("aggregated regression prediction f(x) vs the line y = x:");
    for x in [0.1, 0.5, 0.9] {
        let value = aggregate_predict(&reg_menu, &reg, &reg_plan, Contrast::Quadratic, &[x])?;
        println!("  x = {x:<4} aggregate = {value:.4}");
    }
    Ok(())
}
