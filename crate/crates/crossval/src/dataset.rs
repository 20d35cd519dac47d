//! Sample containers, synthetic data generators, and CSV ingestion.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Task kind carried by a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Regression,
    Classification,
    Density,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
            TaskKind::Density => "density",
        }
    }
}

/// An ordered, index-addressable sample.
///
/// Rows are `d` real features; responses are real for regression, dense
/// integer labels `0..K-1` (stored as `f64`) for classification, and absent
/// for density estimation. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    kind: TaskKind,
    /// Row-major feature block, `n * d` entries.
    x: Vec<f64>,
    /// Responses; empty iff `kind == Density`.
    y: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Build a dataset and check the container invariants.
    pub fn new(kind: TaskKind, x: Vec<f64>, y: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::shape("dataset must contain at least one row"));
        }
        if x.len() != n * d {
            return Err(Error::shape(format!(
                "feature block has {} entries, expected n*d = {}",
                x.len(),
                n * d
            )));
        }
        match kind {
            TaskKind::Density => {
                if !y.is_empty() {
                    return Err(Error::shape("density datasets carry no responses"));
                }
                if d == 0 {
                    return Err(Error::shape("density datasets need at least one feature"));
                }
            }
            TaskKind::Regression | TaskKind::Classification => {
                if y.len() != n {
                    return Err(Error::shape(format!(
                        "expected {} responses, got {}",
                        n,
                        y.len()
                    )));
                }
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::shape("features must be finite"));
        }
        if kind == TaskKind::Regression && y.iter().any(|v| !v.is_finite()) {
            return Err(Error::shape("responses must be finite"));
        }
        if kind == TaskKind::Classification {
            for (i, &label) in y.iter().enumerate() {
                if !(label.is_finite() && label >= 0.0 && label.fract() == 0.0) {
                    return Err(Error::shape(format!(
                        "row {i}: label {label} is not a dense integer id"
                    )));
                }
            }
        }
        Ok(Dataset { kind, x, y, n, d })
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0 // never true: n >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Feature row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Response of row `i`; panics for density datasets.
    pub fn response(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    /// The sub-sample made of `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(indices.len() * self.d);
        let mut y = Vec::with_capacity(if self.y.is_empty() { 0 } else { indices.len() });
        for &i in indices {
            x.extend_from_slice(self.row(i));
            if !self.y.is_empty() {
                y.push(self.y[i]);
            }
        }
        Dataset {
            kind: self.kind,
            x,
            y,
            n: indices.len(),
            d: self.d,
        }
    }

    /// Row indices sorted by row content (features, then response).
    ///
    /// Learning rules reorder their sub-sample this way before fitting, so a
    /// fit depends only on the multiset of rows, not on row order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| {
            let ra = self.row(a);
            let rb = self.row(b);
            for (va, vb) in ra.iter().zip(rb) {
                match va.total_cmp(vb) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            if self.y.is_empty() {
                std::cmp::Ordering::Equal
            } else {
                self.y[a].total_cmp(&self.y[b])
            }
        });
        idx
    }

    /// The same sample with rows in canonical order.
    pub fn canonicalized(&self) -> Dataset {
        let order = self.canonical_order();
        self.subset(&order)
    }
}

/// Feature law for the linear-model generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XLaw {
    /// Deterministic midpoint grid `(i + 1/2)/n` on `[0,1]`; one feature only.
    /// Population quantities for this fixed design are taken under the
    /// uniform law on `[0,1]`.
    UniformGrid,
    /// I.i.d. standard normal coordinates.
    StandardNormal,
}

/// The unknown sampling law behind an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DataGenerator {
    /// `y = x . beta + sigma * eps` with `eps ~ N(0,1)`.
    LinearModel {
        beta: Vec<f64>,
        sigma: f64,
        x_law: XLaw,
    },
    /// Piecewise-constant density on `[0,1]`; `breakpoints` include 0 and 1,
    /// `densities` has one value per cell.
    PiecewiseConstantDensity {
        breakpoints: Vec<f64>,
        densities: Vec<f64>,
    },
    /// Featureless binary labels, `P(Y = 1) = p1`.
    BernoulliLabels { p1: f64 },
}

impl DataGenerator {
    /// Convenience constructor that validates the cell layout.
    pub fn piecewise_density(breakpoints: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        let gen = DataGenerator::PiecewiseConstantDensity {
            breakpoints,
            densities,
        };
        gen.validate()?;
        Ok(gen)
    }

    /// Uniform density on `[0,1]`.
    pub fn uniform_density() -> Self {
        DataGenerator::PiecewiseConstantDensity {
            breakpoints: vec![0.0, 1.0],
            densities: vec![1.0],
        }
    }

    pub fn task_kind(&self) -> TaskKind {
        match self {
            DataGenerator::LinearModel { .. } => TaskKind::Regression,
            DataGenerator::PiecewiseConstantDensity { .. } => TaskKind::Density,
            DataGenerator::BernoulliLabels { .. } => TaskKind::Classification,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DataGenerator::LinearModel { beta, sigma, x_law } => {
                if beta.is_empty() {
                    return Err(Error::config("linear model needs at least one coefficient"));
                }
                if !beta.iter().all(|b| b.is_finite()) {
                    return Err(Error::config("linear model coefficients must be finite"));
                }
                if !(sigma.is_finite() && *sigma >= 0.0) {
                    return Err(Error::config(format!("sigma must be >= 0, got {sigma}")));
                }
                if *x_law == XLaw::UniformGrid && beta.len() != 1 {
                    return Err(Error::config(
                        "the uniform grid design is one-dimensional; use the standard normal law for d > 1",
                    ));
                }
                Ok(())
            }
            DataGenerator::PiecewiseConstantDensity {
                breakpoints,
                densities,
            } => {
                if breakpoints.len() < 2 || densities.len() + 1 != breakpoints.len() {
                    return Err(Error::config(
                        "piecewise density needs breakpoints 0 = b0 < ... < bK = 1 and one density per cell",
                    ));
                }
                if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
                    return Err(Error::config("breakpoints must start at 0 and end at 1"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config("breakpoints must be strictly increasing"));
                }
                if densities.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::config("cell densities must be finite and >= 0"));
                }
                let mass: f64 = breakpoints
                    .windows(2)
                    .zip(densities)
                    .map(|(w, v)| (w[1] - w[0]) * v)
                    .sum();
                if (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::config(format!(
                        "density must integrate to 1 within 1e-12, got {mass}"
                    )));
                }
                Ok(())
            }
            DataGenerator::BernoulliLabels { p1 } => {
                if !(p1.is_finite() && 0.0 < *p1 && *p1 < 1.0) {
                    return Err(Error::config(format!("p1 must lie in (0,1), got {p1}")));
                }
                Ok(())
            }
        }
    }
}

/// Draw `n` rows from `gen`.
///
/// Row `i` consumes its own derived stream `(seed, "dataset.generate", i)`,
/// so output is bit-identical for identical `(gen, n, seed)` no matter how
/// the rows are produced.
pub fn generate(gen: &DataGenerator, n: usize, seed: u64) -> Result<Dataset> {
    gen.validate()?;
    if n == 0 {
        return Err(Error::bounds("n must be >= 1"));
    }
    match gen {
        DataGenerator::LinearModel { beta, sigma, x_law } => {
            let d = beta.len();
            let mut x = Vec::with_capacity(n * d);
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = derive_rng(seed, "dataset.generate", i as u64);
                let mut dot = 0.0;
                match x_law {
                    XLaw::UniformGrid => {
                        let xi = (i as f64 + 0.5) / n as f64;
                        x.push(xi);
                        dot = xi * beta[0];
                    }
                    XLaw::StandardNormal => {
                        for &b in beta {
                            let xi: f64 = rng.sample(StandardNormal);
                            x.push(xi);
                            dot += xi * b;
                        }
                    }
                }
                let eps: f64 = rng.sample(StandardNormal);
                y.push(dot + sigma * eps);
            }
            Dataset::new(TaskKind::Regression, x, y, n, d)
        }
        DataGenerator::PiecewiseConstantDensity {
            breakpoints,
            densities,
        } => {
            // Inverse CDF over the cells.
            let probs: Vec<f64> = breakpoints
                .windows(2)
                .zip(densities)
                .map(|(w, v)| (w[1] - w[0]) * v)
                .collect();
            let mut x = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = derive_rng(seed, "dataset.generate", i as u64);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut drawn = None;
                for (k, &p) in probs.iter().enumerate() {
                    if u < acc + p || k == probs.len() - 1 {
                        let frac = if p > 0.0 { (u - acc) / p } else { 0.0 };
                        let lo = breakpoints[k];
                        let hi = breakpoints[k + 1];
                        drawn = Some((lo + frac.clamp(0.0, 1.0) * (hi - lo)).min(1.0));
                        break;
                    }
                    acc += p;
                }
                x.push(drawn.expect("cells cover [0,1]"));
            }
            Dataset::new(TaskKind::Density, x, Vec::new(), n, 1)
        }
        DataGenerator::BernoulliLabels { p1 } => {
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                let mut rng = derive_rng(seed, "dataset.generate", i as u64);
                let u: f64 = rng.random();
                y.push(if u < *p1 { 1.0 } else { 0.0 });
            }
            Dataset::new(TaskKind::Classification, Vec::new(), y, n, 0)
        }
    }
}

/// Uniformly random reordering of the rows; the row multiset is unchanged.
pub fn permute(ds: &Dataset, seed: u64) -> Dataset {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut rng = derive_rng(seed, "dataset.permute", 0);
    // Fisher-Yates
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    ds.subset(&order)
}

/// Write `ds` in the crate CSV layout:
/// `#kind=<kind>,d=<d>` then `x1,...,xd[,y]`, decimal point, no locale.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(ds))?;
    Ok(())
}

pub fn to_csv_string(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#kind={},d={}", ds.kind().as_str(), ds.dim());
    let mut header: Vec<String> = (1..=ds.dim()).map(|j| format!("x{j}")).collect();
    if ds.kind() != TaskKind::Density {
        header.push("y".to_string());
    }
    let _ = writeln!(out, "{}", header.join(","));
    for i in 0..ds.len() {
        let mut fields: Vec<String> = ds.row(i).iter().map(|v| format!("{v}")).collect();
        match ds.kind() {
            TaskKind::Density => {}
            TaskKind::Regression => fields.push(format!("{}", ds.response(i))),
            TaskKind::Classification => fields.push(format!("{}", ds.response(i) as u64)),
        }
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    from_csv_string(&text)
}

pub fn from_csv_string(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let (kind, d) = parse_kind_line(first)?;

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 2,
        message: "missing column header".into(),
    })?;
    let expected_cols = d + usize::from(kind != TaskKind::Density);
    let header_cols = header.split(',').count();
    if header_cols != expected_cols {
        return Err(Error::Parse {
            line: 2,
            message: format!("header has {header_cols} columns, expected {expected_cols}"),
        });
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut n = 0usize;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row_no = idx + 1; // 1-based line number in the file
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Parse {
                line: row_no,
                message: format!(
                    "ragged row: {} fields, expected {expected_cols}",
                    fields.len()
                ),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: row_no,
                message: format!("non-numeric field '{field}' in column {}", j + 1),
            })?;
            if j < d {
                x.push(value);
            } else {
                y.push(value);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Parse {
            line: 3,
            message: "no data rows".into(),
        });
    }
    Dataset::new(kind, x, y, n, d)
}

fn parse_kind_line(line: &str) -> Result<(TaskKind, usize)> {
    let err = |message: String| Error::Parse { line: 1, message };
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| err("first line must be '#kind=<kind>,d=<int>'".into()))?;
    let mut kind = None;
    let mut d = None;
    for part in body.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| err(format!("malformed declaration '{part}'")))?;
        match key.trim() {
            "kind" => {
                kind = Some(match value.trim() {
                    "regression" => TaskKind::Regression,
                    "classification" => TaskKind::Classification,
                    "density" => TaskKind::Density,
                    other => return Err(err(format!("unknown kind '{other}'"))),
                })
            }
            "d" => {
                d = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| err(format!("bad dimension '{value}'")))?,
                )
            }
            other => return Err(err(format!("unknown declaration key '{other}'"))),
        }
    }
    match (kind, d) {
        (Some(kind), Some(d)) => Ok((kind, d)),
        _ => Err(err("first line must declare both kind and d".into())),
    }
}
