//! Build every split family and print the plans.
//!
//! Run: `cargo run --example split_plans`

use crossval::splits::{
    holdout, leave_one_out, leave_p_out, monte_carlo, repeated_vfold, vfold, DEFAULT_MAX_SPLITS,
};

fn main() -> crossval::Result<()> {
    let n = 8;
    let seed = 42;

    let plans = vec![
        holdout(n, 5, seed)?,
        vfold(n, 3, seed)?,
        monte_carlo(n, 5, 4, seed)?,
        leave_one_out(n)?,
        leave_p_out(n, 2, DEFAULT_MAX_SPLITS)?,
        repeated_vfold(n, 4, 2, seed)?,
    ];
    for plan in &plans {
        println!(
            "{:<14} splits = {:<3} n_e = {:<8} reg_exact = {}",
            plan.scheme().to_string(),
            plan.len(),
            plan.n_e().map_or("mixed".into(), |v| v.to_string()),
            plan.reg_exact()
        );
    }

    println!("\nV-fold plan as JSON (the CLI `split` output format):");
    println!("{}", serde_json::to_string_pretty(&plans[1])?);

    println!("\nAsking for leave-15-out on 30 points trips the budget guard:");
    match leave_p_out(30, 15, DEFAULT_MAX_SPLITS) {
        Err(e) => println!("  {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
