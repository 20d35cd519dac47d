//! Closed-form variance constants for V-fold and Monte-Carlo
//! cross-validation of least-squares histogram density estimators.
//!
//! The criterion variance decomposes as
//! `(1/n^2) C1 W1 + (1/n) C2 W2`, where the `W_i` depend only on the bin
//! width and the sampling law, and the `C_i` below depend only on the scheme
//! geometry.

use crate::error::{Error, Result};

/// `C1` for V-fold:
/// `1 + 4/(V-1) + 4/(V-1)^2 + 1/(V-1)^3 - V^2/(n (V-1)^2)`.
pub fn c1_vf(v: usize, n: usize) -> Result<f64> {
    check_vf(v, n)?;
    let v = v as f64;
    let n = n as f64;
    let w = v - 1.0;
    Ok(1.0 + 4.0 / w + 4.0 / (w * w) + 1.0 / (w * w * w) - v * v / (n * w * w))
}

/// `C2` for V-fold: `(1 + V/(n (V-1)))^2`.
pub fn c2_vf(v: usize, n: usize) -> Result<f64> {
    check_vf(v, n)?;
    let v = v as f64;
    let n = n as f64;
    let t = 1.0 + v / (n * (v - 1.0));
    Ok(t * t)
}

/// `C1` for Monte-Carlo CV with `v` splits of training size `n_e`:
/// `(1/V) (n^2/n_e^2 + 2 n^2/(n_e (n - n_e)) - (1/n) n^3/n_e^3)
///  + (1 - 1/V) (1 + (1/(n-1)) (n/n_e + 1)^2 - (1/n) n^2/n_e^2)`.
pub fn c1_mc(v: usize, n: usize, n_e: usize) -> Result<f64> {
    check_mc(v, n, n_e)?;
    let v = v as f64;
    let n = n as f64;
    let ne = n_e as f64;
    let r = n / ne;
    let single = r * r + 2.0 * n * n / (ne * (n - ne)) - r * r * r / n;
    let shared = 1.0 + (r + 1.0) * (r + 1.0) / (n - 1.0) - r * r / n;
    Ok(single / v + (1.0 - 1.0 / v) * shared)
}

/// `C2` for Monte-Carlo CV:
/// `(1/V) (n/(n - n_e) + (1/n^2) n^3/n_e^3) + (1 - 1/V) (1 + (1/n)(n/n_e))^2`.
pub fn c2_mc(v: usize, n: usize, n_e: usize) -> Result<f64> {
    check_mc(v, n, n_e)?;
    let v = v as f64;
    let n = n as f64;
    let ne = n_e as f64;
    let r = n / ne;
    let single = n / (n - ne) + r * r * r / n;
    let shared = {
        let t = 1.0 + r / n;
        t * t
    };
    Ok(single / v + (1.0 - 1.0 / v) * shared)
}

fn check_vf(v: usize, n: usize) -> Result<()> {
    if v < 2 {
        return Err(Error::bounds(format!("V-fold constants need V >= 2, got V = {v}")));
    }
    if n < 2 || v > n {
        return Err(Error::bounds(format!(
            "V-fold constants need 2 <= V <= n, got V = {v}, n = {n}"
        )));
    }
    Ok(())
}

fn check_mc(v: usize, n: usize, n_e: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::bounds("Monte-Carlo constants need V >= 1"));
    }
    if n_e == 0 || n_e >= n {
        return Err(Error::bounds(format!(
            "Monte-Carlo constants need 1 <= n_e <= n-1, got n_e = {n_e}, n = {n}"
        )));
    }
    Ok(())
}
