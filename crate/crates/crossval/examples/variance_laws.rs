//! Variance laws of the criteria: the general ordering, the affine
//! dependence on 1/V, and the analytic scheme constants.
//!
//! Run: `cargo run --example variance_laws`

use crossval::mclab::{
    affine_in_inv_v_check, c1_mc, c1_vf, c2_mc, c2_vf, repeated_vfold_variance_check,
    variance_ordering_check, LabDesign, RuleSpec,
};
use crossval::{Contrast, DataGenerator};

fn main() -> crossval::Result<()> {
    let design = LabDesign {
        generator: DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?,
        n: 12,
        rule: RuleSpec::Histogram { h: 0.25 },
        contrast: Contrast::DensityLs,
        replicates: 1500,
        master_seed: 23,
    };

    let ordering = variance_ordering_check(&design, 6, 10)?;
    println!("variance ordering at n_e = 6 (n = 12):");
    println!("  hold-out    {:.4e}", ordering.var_holdout);
    println!("  MC CV, V=10 {:.4e}", ordering.var_mc);
    println!("  leave-6-out {:.4e}", ordering.var_lpo);
    println!("  ordering holds: {}\n", ordering.pass);

    let affine = affine_in_inv_v_check(&design, 6, &[1, 2, 5, 10, 20])?;
    println!("Var(MC CV) against 1/V:");
    for p in &affine.points {
        println!("  1/V = {:<6.3} var = {:.4e} +- {:.1e}", p.x, p.variance, p.stderr);
    }
    println!(
        "  fit: intercept {:.4e} (lpo measures {:.4e}), slope {:.4e}, R^2 = {:.4}\n",
        affine.intercept,
        affine.reference_variance.unwrap(),
        affine.slope,
        affine.r_squared
    );

    let repeated = repeated_vfold_variance_check(&design, 3, &[1, 2, 5, 10])?;
    println!(
        "Var(repeated 3-fold) against 1/L: slope {:.4e}, R^2 = {:.4}\n",
        repeated.slope, repeated.r_squared
    );

    println!("analytic constants, V-fold vs Monte-Carlo at n_e = n(V-1)/V:");
    let n = 1_000_000;
    println!(
        "  {:<4} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9}",
        "V", "C1vf", "C2vf", "C1mc", "C2mc", "C1 ratio", "C2 ratio"
    );
    for v in [3usize, 5, 10, 100] {
        let ne = n * (v - 1) / v;
        println!(
            "  {:<4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>9.4} {:>9.4}",
            v,
            c1_vf(v, n)?,
            c2_vf(v, n)?,
            c1_mc(v, n, ne)?,
            c2_mc(v, n, ne)?,
            c1_mc(v, n, ne)? / c1_vf(v, n)?,
            c2_mc(v, n, ne)? / c2_vf(v, n)?,
        );
    }
    println!("  (the ratios approach 3 and 2 - 1/V as V grows)");
    Ok(())
}
