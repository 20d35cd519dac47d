//! The closed-form leave-one-out for least squares against explicit refits,
//! the GCV surrogate, and Woodbury downdating.
//!
//! Run: `cargo run --example closed_form_loo`

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crossval::rng::derive_rng;
use crossval::rules::ols::{
    fit_ols, gcv_ols, gcv_unsquared, loo_ols_closed_form, woodbury_downdate,
};

fn main() -> crossval::Result<()> {
    let mut rng = derive_rng(7, "example.loo", 0);
    let n = 30;
    let d = 4;
    let x = DMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let beta = DVector::from_column_slice(&[1.0, -0.5, 0.25, 0.0]);
    let y = &x * &beta + DVector::from_fn(n, |_, _| 0.3 * (rng.random::<f64>() - 0.5));

    let closed = loo_ols_closed_form(&x, &y)?;
    println!("closed-form leave-one-out  {closed:.10}");

    // Explicit refits, the slow way the closed form replaces.
    let mut brute = 0.0;
    for i in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let xi = DMatrix::from_fn(n - 1, d, |r, c| x[(keep[r], c)]);
        let yi = DVector::from_fn(n - 1, |r, _| y[keep[r]]);
        let b = xi.svd(true, true).solve(&yi, 1e-13).unwrap();
        let e = y[i] - (0..d).map(|c| x[(i, c)] * b[c]).sum::<f64>();
        brute += e * e;
    }
    brute /= n as f64;
    println!("{n} explicit refits         {brute:.10}");
    println!("relative gap               {:.2e}", (closed - brute).abs() / brute);

    let fit = fit_ols(&x, &y)?;
    println!(
        "\ntrace(H) = {:.4} (= d for a full-rank design)",
        fit.hat_trace()
    );
    println!(
        "GCV                        {:.10}",
        gcv_ols(fit.hat_trace(), fit.rss(), n)?
    );
    println!(
        "GCV (first-power form)         {:.10}",
        gcv_unsquared(fit.hat_trace(), fit.rss(), n)?
    );

    // Downdate the inverse after removing the first two rows.
    let removed = DMatrix::from_fn(2, d, |i, j| x[(i, j)]);
    let down = woodbury_downdate(fit.xtx_inverse(), &removed)?;
    let direct = (x.transpose() * &x - removed.transpose() * &removed)
        .try_inverse()
        .unwrap();
    println!(
        "\nWoodbury downdate vs direct inverse, Frobenius gap {:.2e}",
        (&down - &direct).norm() / direct.norm()
    );
    Ok(())
}
