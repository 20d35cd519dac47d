//! Flat key-value experiment configuration files.
//!
//! Format: one `key = value` per line, `#` comments, lists separated by
//! whitespace, structured items in the `name:key=value;key=value` spec
//! syntax. Example:
//!
//! ```text
//! generator   = density:breaks=0,0.5,1;dens=1.5,0.5
//! n           = 50
//! rules       = hist:h=1 hist:h=0.5 hist:h=0.25
//! contrast    = density-ls
//! schemes     = vfold:v=2 vfold:v=5
//! replicates  = 1000
//! master_seed = 42
//! checks      = expectation_law corrected_unbiased
//! ```

use std::collections::BTreeMap;

use crate::dataset::{DataGenerator, XLaw};
use crate::error::{Error, Result};
use crate::rules::Contrast;
use crate::splits::DEFAULT_MAX_SPLITS;

use super::{ExperimentConfig, PlanSpec, RuleSpec};

/// A parsed configuration: the experiment itself, the requested checks, and
/// any extra keys the checks may consume.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: ExperimentConfig,
    pub checks: Vec<String>,
    pub extras: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let require = |key: &str| -> Result<&String> {
        map.get(key)
            .ok_or_else(|| Error::config(format!("missing required key '{key}'")))
    };

    let generator = parse_generator(require("generator")?)?;
    let n: usize = parse_scalar(require("n")?, "n")?;
    let rules: Vec<(String, RuleSpec)> = require("rules")?
        .split_whitespace()
        .map(|item| RuleSpec::parse(item).map(|spec| (item.to_string(), spec)))
        .collect::<Result<_>>()?;
    let contrast: Contrast = require("contrast")?.parse()?;
    let schemes: Vec<PlanSpec> = require("schemes")?
        .split_whitespace()
        .map(PlanSpec::parse)
        .collect::<Result<_>>()?;
    let replicates: usize = parse_scalar(require("replicates")?, "replicates")?;
    let master_seed: u64 = parse_scalar(require("master_seed")?, "master_seed")?;
    let frozen_plans = match map.get("frozen_plans").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => {
            return Err(Error::config(format!(
                "frozen_plans must be true or false, got '{other}'"
            )))
        }
    };
    let max_splits = match map.get("max_splits") {
        None => DEFAULT_MAX_SPLITS,
        Some(raw) => parse_scalar(raw, "max_splits")?,
    };
    let checks: Vec<String> = map
        .get("checks")
        .map(|raw| raw.split_whitespace().map(str::to_string).collect())
        .unwrap_or_default();

    let config = ExperimentConfig {
        generator,
        n,
        rules,
        contrast,
        schemes,
        replicates,
        master_seed,
        frozen_plans,
        max_splits,
    };
    config.validate()?;
    Ok(ExperimentSpec {
        config,
        checks,
        extras: map,
    })
}

fn parse_scalar<T: std::str::FromStr>(raw: &str, key: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::config(format!("bad value '{raw}' for '{key}'")))
}

/// Parse `density:breaks=0,0.5,1;dens=1.5,0.5`,
/// `linear:beta=1,0.5;sigma=2;xlaw=normal|grid`, or `bernoulli:p1=0.9`.
pub fn parse_generator(text: &str) -> Result<DataGenerator> {
    let (name, rest) = text.split_once(':').unwrap_or((text, ""));
    let params: BTreeMap<&str, &str> = rest
        .split(';')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.trim(), v.trim()))
        .collect();
    let list = |key: &str| -> Result<Vec<f64>> {
        let raw = params
            .get(key)
            .ok_or_else(|| Error::config(format!("generator '{text}' needs '{key}'")))?;
        raw.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::config(format!("bad number '{v}' in '{key}'")))
            })
            .collect()
    };
    match name.trim() {
        "density" => {
            let gen = DataGenerator::PiecewiseConstantDensity {
                breakpoints: list("breaks")?,
                densities: list("dens")?,
            };
            gen.validate()?;
            Ok(gen)
        }
        "linear" => {
            let sigma_raw = params
                .get("sigma")
                .ok_or_else(|| Error::config("linear generator needs 'sigma'"))?;
            let x_law = match params.get("xlaw").copied().unwrap_or("normal") {
                "normal" => XLaw::StandardNormal,
                "grid" => XLaw::UniformGrid,
                other => return Err(Error::config(format!("unknown xlaw '{other}'"))),
            };
            let gen = DataGenerator::LinearModel {
                beta: list("beta")?,
                sigma: parse_scalar(sigma_raw, "sigma")?,
                x_law,
            };
            gen.validate()?;
            Ok(gen)
        }
        "bernoulli" => {
            let p1_raw = params
                .get("p1")
                .ok_or_else(|| Error::config("bernoulli generator needs 'p1'"))?;
            let gen = DataGenerator::BernoulliLabels {
                p1: parse_scalar(p1_raw, "p1")?,
            };
            gen.validate()?;
            Ok(gen)
        }
        other => Err(Error::config(format!("unknown generator '{other}'"))),
    }
}

impl ExperimentSpec {
    pub fn extra_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.extras.get(key) {
            None => Ok(default),
            Some(raw) => parse_scalar(raw, key),
        }
    }

    pub fn extra_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.extras.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split_whitespace()
                .map(|v| parse_scalar(v, key))
                .collect(),
        }
    }

    pub fn extra_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.extras.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split_whitespace()
                .map(|v| parse_scalar(v, key))
                .collect(),
        }
    }

    pub fn extra_rule(&self, key: &str, default: &RuleSpec) -> Result<RuleSpec> {
        match self.extras.get(key) {
            None => Ok(default.clone()),
            Some(raw) => RuleSpec::parse(raw),
        }
    }

    pub fn extra_scheme(&self, key: &str, default: PlanSpec) -> Result<PlanSpec> {
        match self.extras.get(key) {
            None => Ok(default),
            Some(raw) => PlanSpec::parse(raw),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = "\
# smoke experiment
generator   = density:breaks=0,0.5,1;dens=1.5,0.5
n           = 20
rules       = hist:h=1 hist:h=0.25
contrast    = density-ls
schemes     = vfold:v=2
replicates  = 2
master_seed = 7
checks      = expectation_law
check_ne    = 10
";

    #[test]
    fn parses_a_smoke_config() {
        let spec = parse_config(SMOKE).unwrap();
        assert_eq!(spec.config.n, 20);
        assert_eq!(spec.config.rules.len(), 2);
        assert_eq!(spec.config.replicates, 2);
        assert_eq!(spec.checks, vec!["expectation_law"]);
        assert_eq!(spec.extra_usize("check_ne", 0).unwrap(), 10);
        assert_eq!(spec.extra_usize("missing", 42).unwrap(), 42);
    }

    #[test]
    fn rejects_malformed_lines_and_unknown_parts() {
        assert!(matches!(
            parse_config("generator density"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_generator("spline:k=3").is_err());
        assert!(parse_generator("linear:beta=1").is_err());
    }

    #[test]
    fn parses_all_generator_families() {
        parse_generator("density:breaks=0,1;dens=1").unwrap();
        parse_generator("linear:beta=1,0.5;sigma=2;xlaw=normal").unwrap();
        parse_generator("linear:beta=1;sigma=0;xlaw=grid").unwrap();
        parse_generator("bernoulli:p1=0.9").unwrap();
    }
}
