//! Estimator selection: argmin over a rule menu, per-split voting,
//! aggregation of per-split winners, and honest evaluation by wrapping a
//! whole selection pipeline as a learning rule.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::criteria::cv_risk;
use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::rules::{contrast_eval, majority_label, Contrast, Predictor, Rule};
use crate::splits::SplitPlan;

/// An ordered menu of identified learning rules; identifiers are unique and
/// the order is fixed because every tie breaks toward the earlier entry.
#[derive(Clone)]
pub struct RuleMenu {
    entries: Vec<(String, Arc<dyn Rule>)>,
}

impl RuleMenu {
    pub fn new(entries: Vec<(String, Arc<dyn Rule>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("rule menu must not be empty"));
        }
        for (i, (id, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::config(format!("duplicate rule identifier '{id}'")));
            }
        }
        Ok(RuleMenu { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<dyn Rule>)> {
        self.entries.iter().map(|(id, rule)| (id.as_str(), rule))
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn Rule>> {
        self.entries
            .iter()
            .find(|(other, _)| other == id)
            .map(|(_, rule)| rule)
    }
}

/// Criterion value of one menu entry.
#[derive(Debug, Clone, Serialize)]
pub struct MenuValue {
    pub id: String,
    pub value: f64,
}

/// Outcome of a selection procedure.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    /// Identifier attaining the criterion minimum (ties: first in menu order).
    pub chosen: String,
    pub criterion_values: Vec<MenuValue>,
    /// Per-split winners for voting and aggregation procedures.
    pub per_split_winners: Option<Vec<String>>,
}

/// Index of the smallest value, first index winning ties.
pub(crate) fn argmin_by_menu_order(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Hold-out values for every (rule, split) pair; rows follow menu order,
/// columns follow plan order. Rule failures carry the offending identifier.
fn holdout_matrix(
    menu: &RuleMenu,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
) -> Result<Vec<Vec<f64>>> {
    if plan.n() != ds.len() {
        return Err(Error::shape(format!(
            "plan over n = {} applied to a sample of size {}",
            plan.n(),
            ds.len()
        )));
    }
    let mut matrix = Vec::with_capacity(menu.len());
    for (id, rule) in menu.iter() {
        let mut row = Vec::with_capacity(plan.len());
        for split in plan.splits() {
            let predictor = rule
                .fit(&ds.subset(split.train()))
                .map_err(|e| e.in_rule(id))?;
            row.push(
                contrast_eval(contrast, &predictor, &ds.subset(&split.validation()))
                    .map_err(|e| e.in_rule(id))?,
            );
        }
        matrix.push(row);
    }
    Ok(matrix)
}

/// Select the menu entry minimizing the cross-validation criterion.
pub fn cv_select(
    menu: &RuleMenu,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
) -> Result<SelectionResult> {
    let mut values = Vec::with_capacity(menu.len());
    for (id, rule) in menu.iter() {
        let estimate = cv_risk(rule.as_ref(), ds, plan, contrast).map_err(|e| e.in_rule(id))?;
        values.push(estimate.value);
    }
    let chosen = argmin_by_menu_order(&values);
    Ok(SelectionResult {
        chosen: menu.entries[chosen].0.clone(),
        criterion_values: pack_values(menu, &values),
        per_split_winners: None,
    })
}

/// Voting selection: each split picks its hold-out argmin, the majority of
/// the per-split winners is chosen. Vote ties break by menu order among the
/// tied identifiers.
pub fn vote_select(
    menu: &RuleMenu,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
) -> Result<SelectionResult> {
    let matrix = holdout_matrix(menu, ds, plan, contrast)?;
    let winners: Vec<usize> = (0..plan.len())
        .map(|j| {
            let column: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
            argmin_by_menu_order(&column)
        })
        .collect();
    let mut counts = vec![0usize; menu.len()];
    for &w in &winners {
        counts[w] += 1;
    }
    let top = *counts.iter().max().unwrap();
    let chosen = counts.iter().position(|&c| c == top).unwrap();
    let values: Vec<f64> = matrix
        .iter()
        .map(|row| row.iter().sum::<f64>() / row.len() as f64)
        .collect();
    Ok(SelectionResult {
        chosen: menu.entries[chosen].0.clone(),
        criterion_values: pack_values(menu, &values),
        per_split_winners: Some(
            winners
                .iter()
                .map(|&w| menu.entries[w].0.clone())
                .collect(),
        ),
    })
}

fn pack_values(menu: &RuleMenu, values: &[f64]) -> Vec<MenuValue> {
    menu.ids()
        .zip(values)
        .map(|(id, &value)| MenuValue {
            id: id.to_string(),
            value,
        })
        .collect()
}

/// Aggregated prediction at `x`: each split's hold-out winner is refit on
/// the full sample, then the per-split predictions are averaged (regression)
/// or majority-voted (classification).
pub fn aggregate_predict(
    menu: &RuleMenu,
    ds: &Dataset,
    plan: &SplitPlan,
    contrast: Contrast,
    x: &[f64],
) -> Result<f64> {
    if ds.kind() == TaskKind::Density {
        return Err(Error::UnsupportedTask(
            "aggregation is defined for prediction tasks only".into(),
        ));
    }
    let matrix = holdout_matrix(menu, ds, plan, contrast)?;
    let winners: Vec<usize> = (0..plan.len())
        .map(|j| {
            let column: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
            argmin_by_menu_order(&column)
        })
        .collect();
    // Fit each distinct winner on the full sample once.
    let mut fitted: Vec<Option<Predictor>> = vec![None; menu.len()];
    for &w in &winners {
        if fitted[w].is_none() {
            let (id, rule) = &menu.entries[w];
            fitted[w] = Some(rule.fit(ds).map_err(|e| e.in_rule(id))?);
        }
    }
    let predictions: Vec<f64> = winners
        .iter()
        .map(|&w| fitted[w].as_ref().unwrap().evaluate(x))
        .collect();
    Ok(match ds.kind() {
        TaskKind::Regression => predictions.iter().sum::<f64>() / predictions.len() as f64,
        TaskKind::Classification => majority_label(&predictions),
        TaskKind::Density => unreachable!(),
    })
}

/// Builds the split plan a wrapped rule uses on a sub-sample of size `n`.
pub type PlanFactory = dyn Fn(usize, u64) -> Result<SplitPlan> + Send + Sync;

/// A selection pipeline packaged as a learning rule.
///
/// Fitting runs the whole pipeline on the sub-sample it receives: draw an
/// inner plan (with a seed from the rule's own stream, so the plan stays
/// independent of the data at every nesting level), select by
/// cross-validation, refit the winner on the whole sub-sample. Estimating
/// the risk of the wrapped rule therefore accounts for the selection step
/// instead of reusing its criterion value; with hold-out outside and inside,
/// this is exactly a train/validation/test three-way split. Wrapping a menu
/// of wrapped rules gives two-stage selection.
pub struct WrappedSelectionRule {
    menu: RuleMenu,
    plan_factory: Box<PlanFactory>,
    contrast: Contrast,
    seed: u64,
    fits: AtomicU64,
}

/// Wrap `menu` + `plan_factory` + `contrast` as a single learning rule.
pub fn wrap_selection_as_rule(
    menu: RuleMenu,
    plan_factory: Box<PlanFactory>,
    contrast: Contrast,
    seed: u64,
) -> WrappedSelectionRule {
    WrappedSelectionRule {
        menu,
        plan_factory,
        contrast,
        seed,
        fits: AtomicU64::new(0),
    }
}

impl WrappedSelectionRule {
    /// Seed the k-th fit will use for its inner plan.
    pub fn inner_seed(&self, k: u64) -> u64 {
        derive_seed(self.seed, "select.inner-plan", k)
    }
}

impl Rule for WrappedSelectionRule {
    fn fit(&self, sample: &Dataset) -> Result<Predictor> {
        let k = self.fits.fetch_add(1, Ordering::SeqCst);
        let inner_seed = self.inner_seed(k);
        let plan = (self.plan_factory)(sample.len(), inner_seed)
            .map_err(|e| Error::Config(format!("inner plan for n = {}: {e}", sample.len())))?;
        let selection = cv_select(&self.menu, sample, &plan, self.contrast)?;
        let rule = self
            .menu
            .get(&selection.chosen)
            .expect("chosen id comes from the menu");
        rule.fit(sample)
    }
}
