//! Constant majority-vote classifiers over binary labels.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::rules::{Predictor, Rule};

/// What to do when the labels split exactly in half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Predict 0 on ties.
    DeterministicZero,
    /// Predict 1 with probability 1/2, drawn from the rule's seed stream.
    Randomized { seed: u64 },
}

/// Ignores the features and predicts the majority label of its sub-sample.
///
/// With the randomized tie policy, each tie consumes the next draw from the
/// stream `(seed, "rules.majority-tie", k)`; fits are deterministic given the
/// sub-sample and the stream position, and draws are serialized by fit order.
#[derive(Debug)]
pub struct MajorityVoteRule {
    tie: TiePolicy,
    draws: AtomicU64,
}

impl MajorityVoteRule {
    pub fn new(tie: TiePolicy) -> Self {
        MajorityVoteRule {
            tie,
            draws: AtomicU64::new(0),
        }
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie
    }
}

/// Majority label among binary `labels`; see `TiePolicy` for ties.
pub fn fit_majority_vote(labels: &[f64], rule: &MajorityVoteRule) -> Result<Predictor> {
    if labels.is_empty() {
        return Err(Error::shape("majority vote needs at least one label"));
    }
    if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::shape("majority vote expects binary labels"));
    }
    let ones = labels.iter().filter(|&&y| y == 1.0).count();
    let zeros = labels.len() - ones;
    let label = match ones.cmp(&zeros) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => match rule.tie {
            TiePolicy::DeterministicZero => 0.0,
            TiePolicy::Randomized { seed } => {
                let k = rule.draws.fetch_add(1, Ordering::SeqCst);
                if derive_rng(seed, "rules.majority-tie", k).random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            }
        },
    };
    Ok(Predictor::ConstantLabel { label })
}

impl Rule for MajorityVoteRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        if sample.kind() != TaskKind::Classification {
            return Err(Error::shape("majority vote expects a classification sample"));
        }
        fit_majority_vote(sample.responses(), self)
    }
}
