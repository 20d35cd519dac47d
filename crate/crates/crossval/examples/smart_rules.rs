//! Mean risk against sample size for the constant majority vote: the
//! deterministic tie-break makes the rule worse at n = 2 than at n = 1,
//! the fair-coin tie-break repairs it.
//!
//! Run: `cargo run --example smart_rules`

use crossval::mclab::{smartness_probe, RuleSpec};
use crossval::DataGenerator;

fn main() -> crossval::Result<()> {
    let gen = DataGenerator::BernoulliLabels { p1: 0.9 };
    let n_list: Vec<usize> = (1..=12).collect();

    let zero = smartness_probe(
        &RuleSpec::MajorityVote { randomized_tie: false },
        &gen,
        &n_list,
        0,
        0,
    )?;
    let coin = smartness_probe(
        &RuleSpec::MajorityVote { randomized_tie: true },
        &gen,
        &n_list,
        0,
        0,
    )?;

    println!("exact mean risk of the majority vote, P(Y = 1) = 0.9:");
    println!("  {:>3} {:>12} {:>12}", "n", "ties -> 0", "ties -> coin");
    for (a, b) in zero.points.iter().zip(&coin.points) {
        println!("  {:>3} {:>12.6} {:>12.6}", a.n, a.mean_risk, b.mean_risk);
    }
    println!(
        "\n  deterministic ties: risk increases at n = {:?} (not a smart rule)",
        zero.increases
    );
    println!(
        "  randomized ties:    {} (a smart rule)",
        if coin.increases.is_empty() {
            "never increases"
        } else {
            "increases somewhere"
        }
    );
    Ok(())
}
