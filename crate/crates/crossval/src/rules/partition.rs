//! Regressograms: piecewise-constant regression on a fixed partition of `[0,1]`.

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rules::{multiset_sum, Predictor, Rule};

/// Validate partition edges `0 = e_0 < ... < e_K = 1`.
pub fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::config("partition needs at least one cell"));
    }
    if edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
        return Err(Error::config("partition edges must run from 0 to 1"));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("partition edges must be strictly increasing"));
    }
    Ok(())
}

/// Cell index of `x` in `edges`; cells are right-open, the last closed.
pub fn cell_of(edges: &[f64], x: f64) -> usize {
    let cells = edges.len() - 1;
    for k in 0..cells {
        if x < edges[k + 1] {
            return k;
        }
    }
    cells - 1
}

/// Per-cell mean of the responses; an empty cell predicts 0.
pub fn fit_regressogram(x: &[f64], y: &[f64], edges: &[f64]) -> Result<Predictor> {
    check_edges(edges)?;
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::shape("regressogram needs matching nonempty x and y"));
    }
    let cells = edges.len() - 1;
    let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for (&xi, &yi) in x.iter().zip(y) {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::shape(format!("regressogram point {xi} outside [0,1]")));
        }
        per_cell[cell_of(edges, xi)].push(yi);
    }
    let means: Vec<f64> = per_cell
        .into_iter()
        .map(|ys| {
            if ys.is_empty() {
                0.0
            } else {
                let n = ys.len() as f64;
                multiset_sum(ys) / n
            }
        })
        .collect();
    Ok(Predictor::Regressogram {
        edges: edges.to_vec(),
        means,
    })
}

/// Regressogram learning rule on a fixed partition; `regular(k)` gives the
/// even partition into `k` cells.
#[derive(Debug, Clone)]
pub struct RegressogramRule {
    pub edges: Vec<f64>,
}

impl RegressogramRule {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        Ok(RegressogramRule { edges })
    }

    pub fn regular(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::config("partition needs at least one cell"));
        }
        let edges: Vec<f64> = (0..=cells).map(|k| k as f64 / cells as f64).collect();
        Self::new(edges)
    }
}

impl Rule for RegressogramRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        if sample.kind() != TaskKind::Regression || sample.dim() != 1 {
            return Err(Error::shape(
                "regressogram expects a one-dimensional regression sample",
            ));
        }
        let canon = sample.canonicalized();
        let x: Vec<f64> = (0..canon.len()).map(|i| canon.row(i)[0]).collect();
        let y = canon.responses().to_vec();
        fit_regressogram(&x, &y, &self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_the_global_mean() {
        let pred = fit_regressogram(&[0.1, 0.6, 0.9], &[1.0, 2.0, 6.0], &[0.0, 1.0]).unwrap();
        assert_eq!(pred.evaluate(&[0.4]), 3.0);
    }

    #[test]
    fn two_points_in_distinct_cells_interpolate() {
        let pred = fit_regressogram(&[0.2, 0.8], &[5.0, -1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(pred.evaluate(&[0.1]), 5.0);
        assert_eq!(pred.evaluate(&[0.9]), -1.0);
    }

    #[test]
    fn empty_middle_cell_predicts_zero() {
        let edges = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let pred = fit_regressogram(&[0.1, 0.9], &[4.0, 2.0], &edges).unwrap();
        assert_eq!(pred.evaluate(&[0.5]), 0.0);
    }
}
