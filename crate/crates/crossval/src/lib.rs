//! Cross-validation engine and Monte-Carlo laboratory.
//!
//! The crate has three layers:
//!
//! * containers and machinery — [`dataset`] (samples, synthetic generators,
//!   CSV), [`splits`] (hold-out, V-fold, Monte-Carlo, leave-one-out,
//!   leave-p-out, repeated V-fold), [`rules`] (least squares with closed-form
//!   leave-one-out, GCV and Woodbury downdating; histograms; regressograms;
//!   nearest neighbours; majority votes);
//! * criteria and procedures — [`criteria`] (hold-out, cross-validation,
//!   bias-corrected cross-validation, V-fold penalization, theoretical bias
//!   and overpenalization constants) and [`select`] (argmin selection, voting,
//!   aggregation, and honest evaluation by wrapping a whole selection
//!   pipeline as a learning rule);
//! * the laboratory — [`mclab`], seeded Monte-Carlo experiments that measure
//!   the bias and variance of the criteria against exact risks, plus the
//!   analytic variance constants for V-fold and Monte-Carlo schemes.
//!
//! Everything is deterministic given the seeds: random quantities come from
//! per-purpose ChaCha12 streams (see [`rng`]), criteria reduce in plan order,
//! and experiment results do not depend on the worker count.

// Validation code negates float comparisons on purpose: `!(a < b)` also
// rejects NaN, which `a >= b` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod dataset;
pub mod error;
pub mod mclab;
pub mod rng;
pub mod rules;
pub mod select;
pub mod splits;

pub use dataset::{generate, load_csv, permute, save_csv, DataGenerator, Dataset, TaskKind, XLaw};
pub use error::{Error, Result};
pub use rules::{Contrast, Predictor, Rule};
pub use splits::{Scheme, Split, SplitPlan};
