//! Regular-grid histogram density estimation on `[0,1]`.

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rules::{grid_cell, Predictor, Rule};

/// Fit a regular histogram of bin width `h` to points in `[0,1]`.
///
/// `1/h` must be a whole number of cells (within 1e-9). Cell `k` takes the
/// value `count_k / (n h)`, so the estimate integrates to one and its
/// squared L2 norm is exactly `sum_k value_k^2 h`.
pub fn fit_histogram_density(sample: &[f64], h: f64) -> Result<Predictor> {
    let bins = bins_for(h)?;
    if sample.is_empty() {
        return Err(Error::shape("histogram needs at least one point"));
    }
    let mut counts = vec![0usize; bins];
    for &x in sample {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::shape(format!("density point {x} outside [0,1]")));
        }
        counts[grid_cell(x, bins)] += 1;
    }
    let n = sample.len() as f64;
    let values: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (n * h))
        .collect();
    Ok(Predictor::HistogramDensity { bins, values })
}

fn bins_for(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::config(format!("bin width must lie in (0,1], got {h}")));
    }
    let bins = (1.0 / h).round();
    if (bins * h - 1.0).abs() > 1e-9 || bins < 1.0 {
        return Err(Error::config(format!(
            "grid error: 1/h = {} is not a whole number of cells",
            1.0 / h
        )));
    }
    Ok(bins as usize)
}

/// Histogram density learning rule with fixed bin width.
#[derive(Debug, Clone)]
pub struct HistogramRule {
    pub h: f64,
}

impl HistogramRule {
    pub fn new(h: f64) -> Self {
        HistogramRule { h }
    }
}

impl Rule for HistogramRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        if sample.kind() != TaskKind::Density || sample.dim() != 1 {
            return Err(Error::shape(
                "histogram rule expects a one-dimensional density sample",
            ));
        }
        let points: Vec<f64> = (0..sample.len()).map(|i| sample.row(i)[0]).collect();
        fit_histogram_density(&points, self.h)
    }
}
