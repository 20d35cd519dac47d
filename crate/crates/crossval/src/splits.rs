//! Split families: hold-out, V-fold, Monte-Carlo, leave-one-out,
//! leave-p-out, repeated V-fold.
//!
//! A split is a proper nonempty training-index subset; the validation set is
//! always the complement and is never stored. No constructor here reads a
//! dataset, so split randomness is independent of the data by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Default cap on enumerated split families.
pub const DEFAULT_MAX_SPLITS: u64 = 1_000_000;

/// A training-index subset of `{0..n-1}` with `1 <= |E| <= n-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    train: Vec<usize>,
    n: usize,
}

impl Split {
    pub fn new(mut train: Vec<usize>, n: usize) -> Result<Self> {
        train.sort_unstable();
        train.dedup();
        if train.is_empty() || train.len() >= n {
            return Err(Error::bounds(format!(
                "training set must be a proper nonempty subset: |E| = {}, n = {n}",
                train.len()
            )));
        }
        if *train.last().unwrap() >= n {
            return Err(Error::bounds(format!(
                "training index {} out of range for n = {n}",
                train.last().unwrap()
            )));
        }
        Ok(Split { train, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted training indices.
    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn train_len(&self) -> usize {
        self.train.len()
    }

    /// Sorted validation indices (the complement of the training set).
    pub fn validation(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - self.train.len());
        let mut it = self.train.iter().peekable();
        for i in 0..self.n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}

/// Which family of splits a plan came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Holdout,
    #[serde(rename = "vfold")]
    VFold { v: usize },
    MonteCarlo { v: usize },
    LeaveOneOut,
    LeavePOut { p: usize },
    #[serde(rename = "repeated_vfold")]
    RepeatedVFold { v: usize, l: usize },
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Holdout => write!(f, "holdout"),
            Scheme::VFold { v } => write!(f, "vfold(V={v})"),
            Scheme::MonteCarlo { v } => write!(f, "mc(V={v})"),
            Scheme::LeaveOneOut => write!(f, "loo"),
            Scheme::LeavePOut { p } => write!(f, "lpo(p={p})"),
            Scheme::RepeatedVFold { v, l } => write!(f, "rvf(V={v},L={l})"),
        }
    }
}

/// An ordered family of splits plus the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    scheme: Scheme,
    n: usize,
    /// Common training size when all splits agree (hypothesis "Reg").
    n_e: Option<usize>,
    seed: Option<u64>,
    /// True exactly when every `|E_j|` coincides.
    reg_exact: bool,
    splits: Vec<Split>,
}

impl SplitPlan {
    fn assemble(scheme: Scheme, n: usize, seed: Option<u64>, splits: Vec<Split>) -> SplitPlan {
        let first = splits.first().map(Split::train_len);
        let reg_exact = splits.iter().all(|s| Some(s.train_len()) == first);
        SplitPlan {
            scheme,
            n,
            n_e: if reg_exact { first } else { None },
            seed,
            reg_exact,
            splits,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_e(&self) -> Option<usize> {
        self.n_e
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn reg_exact(&self) -> bool {
        self.reg_exact
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Concatenate two plans over the same sample; scheme metadata is kept
    /// from `self` unless the schemes differ, then it falls back to a
    /// Monte-Carlo tag with the combined count.
    pub fn concat(&self, other: &SplitPlan) -> Result<SplitPlan> {
        if self.n != other.n {
            return Err(Error::shape(format!(
                "cannot concatenate plans over n = {} and n = {}",
                self.n, other.n
            )));
        }
        let mut splits = self.splits.clone();
        splits.extend(other.splits.iter().cloned());
        let scheme = if self.scheme == other.scheme {
            self.scheme
        } else {
            Scheme::MonteCarlo { v: splits.len() }
        };
        Ok(SplitPlan::assemble(scheme, self.n, self.seed, splits))
    }
}

fn check_n_e(n: usize, n_e: usize) -> Result<()> {
    if n_e == 0 || n_e >= n {
        return Err(Error::bounds(format!(
            "training size must satisfy 1 <= n_e <= n-1, got n_e = {n_e}, n = {n}"
        )));
    }
    Ok(())
}

/// One uniform random training set of size `n_e`.
pub fn holdout(n: usize, n_e: usize, seed: u64) -> Result<SplitPlan> {
    check_n_e(n, n_e)?;
    let split = uniform_subset(n, n_e, &mut derive_rng(seed, "splits.holdout", 0))?;
    Ok(SplitPlan::assemble(
        Scheme::Holdout,
        n,
        Some(seed),
        vec![split],
    ))
}

/// Random partition into `v` validation blocks of near-equal size; the
/// splits are the block complements.
pub fn vfold(n: usize, v: usize, seed: u64) -> Result<SplitPlan> {
    let splits = vfold_splits(n, v, seed, 0)?;
    Ok(SplitPlan::assemble(
        Scheme::VFold { v },
        n,
        Some(seed),
        splits,
    ))
}

/// Blocks for repetition `rep` of a (possibly repeated) V-fold plan.
/// Indices are shuffled, then dealt round-robin: block `j` takes positions
/// `j, j+v, j+2v, ...`, so the first `n mod v` blocks carry the extra element.
fn vfold_splits(n: usize, v: usize, seed: u64, rep: u64) -> Result<Vec<Split>> {
    if v < 2 || v > n {
        return Err(Error::bounds(format!(
            "V must satisfy 2 <= V <= n, got V = {v}, n = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = derive_rng(seed, "splits.vfold", rep);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut splits = Vec::with_capacity(v);
    for j in 0..v {
        let block: Vec<usize> = order.iter().skip(j).step_by(v).copied().collect();
        let mut train: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
        train.sort_unstable();
        splits.push(Split::new(train, n)?);
    }
    Ok(splits)
}

/// `v` i.i.d. uniform training sets of size `n_e`; repeats are permitted.
pub fn monte_carlo(n: usize, n_e: usize, v: usize, seed: u64) -> Result<SplitPlan> {
    check_n_e(n, n_e)?;
    if v == 0 {
        return Err(Error::bounds("V must be >= 1"));
    }
    let mut splits = Vec::with_capacity(v);
    for j in 0..v {
        splits.push(uniform_subset(
            n,
            n_e,
            &mut derive_rng(seed, "splits.mc", j as u64),
        )?);
    }
    Ok(SplitPlan::assemble(
        Scheme::MonteCarlo { v },
        n,
        Some(seed),
        splits,
    ))
}

fn uniform_subset(n: usize, n_e: usize, rng: &mut impl Rng) -> Result<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order.truncate(n_e);
    Split::new(order, n)
}

/// The deterministic plan whose `j`-th split leaves out exactly index `j`.
pub fn leave_one_out(n: usize) -> Result<SplitPlan> {
    if n < 2 {
        return Err(Error::bounds(format!("leave-one-out needs n >= 2, got {n}")));
    }
    let mut splits = Vec::with_capacity(n);
    for j in 0..n {
        let train: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        splits.push(Split::new(train, n)?);
    }
    Ok(SplitPlan::assemble(Scheme::LeaveOneOut, n, None, splits))
}

/// All training sets of size `n - p`, in lexicographic order of the
/// validation sets. Fails loudly when `C(n,p)` exceeds `max_splits`.
pub fn leave_p_out(n: usize, p: usize, max_splits: u64) -> Result<SplitPlan> {
    if p == 0 || p >= n {
        return Err(Error::bounds(format!(
            "p must satisfy 1 <= p <= n-1, got p = {p}, n = {n}"
        )));
    }
    let count = binomial(n as u64, p as u64);
    if count > max_splits {
        return Err(Error::Budget {
            required: count,
            limit: max_splits,
        });
    }
    let mut splits = Vec::with_capacity(count as usize);
    // Lexicographic enumeration of the size-p validation sets.
    let mut val: Vec<usize> = (0..p).collect();
    loop {
        let train: Vec<usize> = (0..n).filter(|i| !val.contains(i)).collect();
        splits.push(Split::new(train, n)?);
        // advance to the next combination
        let mut i = p;
        loop {
            if i == 0 {
                return Ok(SplitPlan::assemble(Scheme::LeavePOut { p }, n, None, splits));
            }
            i -= 1;
            if val[i] != i + n - p {
                break;
            }
        }
        val[i] += 1;
        for j in i + 1..p {
            val[j] = val[j - 1] + 1;
        }
    }
}

/// `l` independent V-fold plans concatenated; repetition 0 reproduces
/// `vfold(n, v, seed)` exactly.
pub fn repeated_vfold(n: usize, v: usize, l: usize, seed: u64) -> Result<SplitPlan> {
    if l == 0 {
        return Err(Error::bounds("L must be >= 1"));
    }
    let mut splits = Vec::with_capacity(v * l);
    for rep in 0..l {
        splits.extend(vfold_splits(n, v, seed, rep as u64)?);
    }
    Ok(SplitPlan::assemble(
        Scheme::RepeatedVFold { v, l },
        n,
        Some(seed),
        splits,
    ))
}

/// `C(n, p)` saturating at `u64::MAX`.
pub fn binomial(n: u64, p: u64) -> u64 {
    if p > n {
        return 0;
    }
    let p = p.min(n - p);
    let mut acc: u128 = 1;
    for i in 0..p {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

// -- JSON wire format: {scheme, n, n_e, seed, reg_exact, splits} -------------

#[derive(Serialize, Deserialize)]
struct PlanWire {
    scheme: Scheme,
    n: usize,
    n_e: Option<usize>,
    seed: Option<u64>,
    reg_exact: bool,
    splits: Vec<Vec<usize>>,
}

impl Serialize for SplitPlan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PlanWire {
            scheme: self.scheme,
            n: self.n,
            n_e: self.n_e,
            seed: self.seed,
            reg_exact: self.reg_exact,
            splits: self.splits.iter().map(|s| s.train.clone()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SplitPlan {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = PlanWire::deserialize(deserializer)?;
        let splits: Result<Vec<Split>> = wire
            .splits
            .into_iter()
            .map(|train| Split::new(train, wire.n))
            .collect();
        let splits = splits.map_err(serde::de::Error::custom)?;
        if splits.is_empty() {
            return Err(serde::de::Error::custom("plan has no splits"));
        }
        let plan = SplitPlan::assemble(wire.scheme, wire.n, wire.seed, splits);
        if plan.reg_exact != wire.reg_exact || plan.n_e != wire.n_e {
            return Err(serde::de::Error::custom(
                "plan metadata inconsistent with its splits",
            ));
        }
        Ok(plan)
    }
}
