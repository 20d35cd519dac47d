//! Selection quality as a function of the overpenalization constant on a
//! noisy nested least-squares menu: a constant slightly above 1 usually
//! wins.
//!
//! Run: `cargo run --example overpenalization`

use crossval::mclab::{surpenalization_sweep, RuleSpec};
use crossval::{Contrast, DataGenerator, XLaw};

fn main() -> crossval::Result<()> {
    let gen = DataGenerator::LinearModel {
        beta: vec![0.6, 0.4, 0.25, 0.15, 0.1, 0.0, 0.0, 0.0],
        sigma: 1.2,
        x_law: XLaw::StandardNormal,
    };
    let menu: Vec<(String, RuleSpec)> = (1..=8)
        .map(|d| (format!("dims={d}"), RuleSpec::Ols { dims: Some(d) }))
        .collect();
    let c_grid: Vec<f64> = (2..=10).map(|k| k as f64 / 5.0).collect();

    let report = surpenalization_sweep(&menu, &gen, 30, Contrast::Quadratic, &c_grid, 400, 2024)?;
    println!("selection by empirical risk + C * mean ideal penalty (n = 30, sigma = 1.2):");
    println!("  {:>5} {:>22}", "C", "mean relative excess");
    for (c, v) in report.c_grid.iter().zip(&report.relative_excess) {
        let marker = if *c == report.argmin_c { "  <- best" } else { "" };
        println!("  {c:>5} {v:>22.4}{marker}");
    }
    println!("\nmean ideal penalties by model dimension:");
    for ((id, _), pen) in menu.iter().zip(&report.penalty_means) {
        println!("  {id:<8} {pen:>9.4}");
    }
    Ok(())
}
