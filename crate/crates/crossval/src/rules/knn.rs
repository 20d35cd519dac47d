//! k-nearest-neighbour prediction.

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rules::{majority_label, multiset_sum, Predictor, Rule};

/// k-nearest neighbours; distance ties break toward the smaller index in the
/// canonicalized training sample, and `k` is clipped to the sample size when
/// the training fold is small.
#[derive(Debug, Clone)]
pub struct KnnRule {
    pub k: usize,
}

impl KnnRule {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::bounds("k must be >= 1"));
        }
        Ok(KnnRule { k })
    }
}

impl Rule for KnnRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        let classify = match sample.kind() {
            TaskKind::Regression => false,
            TaskKind::Classification => true,
            TaskKind::Density => {
                return Err(Error::shape("nearest neighbours need a prediction task"))
            }
        };
        if sample.dim() == 0 {
            return Err(Error::shape("nearest neighbours need at least one feature"));
        }
        let canon = sample.canonicalized();
        let mut xs = Vec::with_capacity(canon.len() * canon.dim());
        for i in 0..canon.len() {
            xs.extend_from_slice(canon.row(i));
        }
        Ok(Predictor::Knn {
            xs,
            ys: canon.responses().to_vec(),
            d: canon.dim(),
            k: self.k.min(canon.len()),
            classify,
        })
    }
}

pub(crate) fn evaluate(pred: &Predictor, x: &[f64]) -> f64 {
    let Predictor::Knn { xs, ys, d, k, classify } = pred else {
        unreachable!("knn::evaluate called on a non-knn predictor")
    };
    let n = ys.len();
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = &xs[i * d..(i + 1) * d];
            let dist: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (dist, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let picked: Vec<f64> = order.iter().take(*k).map(|&(_, i)| ys[i]).collect();
    if *classify {
        majority_label(&picked)
    } else {
        let len = picked.len() as f64;
        multiset_sum(picked) / len
    }
}
