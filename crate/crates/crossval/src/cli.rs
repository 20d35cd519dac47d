//! Command-line front end: split generation, criterion computation,
//! selection, experiments, and constant tables.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! degeneracy (singular design, leverage at 1, degenerate smoother),
//! 4 statistical check failure. Every run prints the resolved seed on
//! stderr so any output can be reproduced.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::criteria::{corrected_cv_risk, cv_risk, RiskEstimate};
use crate::dataset::load_csv;
use crate::error::{Error, Result};
use crate::mclab::config::parse_config;
use crate::mclab::report::{
    run_requested_checks, scheme_from_flags, write_check_outcomes, write_moment_report,
};
use crate::mclab::{c1_mc, c1_vf, c2_mc, c2_vf, run_experiment, PlanSpec, RuleSpec};
use crate::rng::derive_seed;
use crate::rules::{Contrast, Rule};
use crate::select::{cv_select, vote_select, RuleMenu, SelectionResult};
use crate::splits::{SplitPlan, DEFAULT_MAX_SPLITS};

#[derive(Parser)]
#[command(
    name = "crossval",
    about = "Cross-validation engine and Monte-Carlo laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a split plan and emit it as JSON.
    Split(SplitArgs),
    /// Estimate the risk of a rule on a CSV dataset.
    Estimate(EstimateArgs),
    /// Select among a menu of rules by cross-validation.
    Select(SelectArgs),
    /// Run a replicated experiment described by a config file.
    Experiment(ExperimentArgs),
    /// Print the analytic variance constants C1 and C2.
    Constants(ConstantsArgs),
}

#[derive(Args)]
struct SchemeFlags {
    /// Scheme: holdout | vfold | mc | loo | lpo | rvf.
    #[arg(long)]
    scheme: String,
    /// Number of splits (vfold, mc, rvf).
    #[arg(long)]
    v: Option<usize>,
    /// Validation size for leave-p-out.
    #[arg(long)]
    p: Option<usize>,
    /// Training size (holdout, mc).
    #[arg(long)]
    ne: Option<usize>,
    /// Repetitions (rvf).
    #[arg(long)]
    l: Option<usize>,
}

impl SchemeFlags {
    fn plan_spec(&self) -> Result<PlanSpec> {
        scheme_from_flags(&self.scheme, self.v, self.ne, self.p, self.l)
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Sample size the plan indexes into.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    scheme: SchemeFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumeration budget for leave-p-out.
    #[arg(long, default_value_t = DEFAULT_MAX_SPLITS)]
    max_splits: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV dataset (see the dataset format in the README).
    #[arg(long)]
    data: PathBuf,
    /// Rule spec, e.g. ols, hist:h=0.25, regressogram:cells=4, knn:k=3.
    #[arg(long)]
    rule: String,
    /// Contrast: quadratic | zero-one | density-ls | density-loglik.
    #[arg(long)]
    contrast: String,
    /// Load a split plan from JSON instead of building one.
    #[arg(long, conflicts_with = "scheme")]
    plan: Option<PathBuf>,
    /// Scheme: holdout | vfold | mc | loo | lpo | rvf (default vfold).
    #[arg(long, default_value = "vfold")]
    scheme: String,
    #[arg(long)]
    v: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// Bias-corrected criterion (the default for risk reporting).
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    corrected: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_SPLITS)]
    max_splits: u64,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated rule specs forming the menu, in order.
    #[arg(long)]
    rules: String,
    #[arg(long)]
    contrast: String,
    /// Scheme (default: 5-fold, a good general-purpose choice).
    #[arg(long, default_value = "vfold")]
    scheme: String,
    #[arg(long, default_value_t = 5)]
    v: usize,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// Voting selection instead of argmin of the averaged criterion.
    #[arg(long)]
    vote: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_SPLITS)]
    max_splits: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key-value config file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "experiment-out")]
    out_dir: PathBuf,
    /// Worker threads (0 = library default); results do not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ConstantsArgs {
    /// vf | mc.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    v: usize,
    #[arg(long)]
    n: usize,
    /// Training size (mc only).
    #[arg(long)]
    ne: Option<usize>,
    /// Print a table over a V grid as CSV.
    #[arg(long)]
    table: bool,
}

/// Entry point returning the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with status 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("run 'crossval --help' for usage");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singularity(_)
        | Error::DegenerateLeverage { .. }
        | Error::DegenerateSmoother(_)
        | Error::Conditioning(_) => 3,
        Error::Rule { source, .. } => exit_code(source),
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Select(args) => cmd_select(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Constants(args) => cmd_constants(args),
    }
}

fn cmd_split(args: SplitArgs) -> Result<i32> {
    let plan = args
        .scheme
        .plan_spec()?
        .build(args.n, args.seed, args.max_splits)?;
    eprintln!("# seed = {}", args.seed);
    let json = serde_json::to_string_pretty(&plan)?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct EstimateReport {
    criterion: &'static str,
    value: f64,
    seed: Option<u64>,
    estimate: RiskEstimate,
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let ds = load_csv(&args.data)?;
    let contrast: Contrast = args.contrast.parse()?;
    let rule_spec = RuleSpec::parse(&args.rule)?;
    let rule = rule_spec.build(derive_seed(args.seed, "cli.rule", 0))?;
    let plan: SplitPlan = match &args.plan {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => scheme_from_flags(&args.scheme, args.v, args.ne, args.p, args.l)?.build(
            ds.len(),
            args.seed,
            args.max_splits,
        )?,
    };
    eprintln!("# seed = {}", plan.seed().unwrap_or(args.seed));
    let estimate = cv_risk(rule.as_ref(), &ds, &plan, contrast)?;
    let report = if args.corrected {
        let value = corrected_cv_risk(rule.as_ref(), &ds, &plan, contrast)?;
        EstimateReport {
            criterion: "corrected_cv",
            value,
            seed: plan.seed(),
            estimate,
        }
    } else {
        EstimateReport {
            criterion: "cv",
            value: estimate.value,
            seed: plan.seed(),
            estimate,
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

#[derive(Serialize)]
struct SelectReport {
    procedure: &'static str,
    seed: u64,
    result: SelectionResult,
}

fn cmd_select(args: SelectArgs) -> Result<i32> {
    let ds = load_csv(&args.data)?;
    let contrast: Contrast = args.contrast.parse()?;
    let mut entries: Vec<(String, Arc<dyn Rule>)> = Vec::new();
    for (idx, item) in args.rules.split(',').enumerate() {
        let item = item.trim();
        let spec = RuleSpec::parse(item)?;
        entries.push((
            item.to_string(),
            spec.build(derive_seed(args.seed, "cli.rule", idx as u64))?,
        ));
    }
    let menu = RuleMenu::new(entries)?;
    let plan = scheme_from_flags(&args.scheme, Some(args.v), args.ne, args.p, args.l)?.build(
        ds.len(),
        args.seed,
        args.max_splits,
    )?;
    eprintln!("# seed = {}", args.seed);
    let (procedure, result) = if args.vote {
        ("vote", vote_select(&menu, &ds, &plan, contrast)?)
    } else {
        ("argmin", cv_select(&menu, &ds, &plan, contrast)?)
    };
    let report = SelectReport {
        procedure,
        seed: args.seed,
        result,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)?;
    let spec = parse_config(&text)?;
    eprintln!("# master_seed = {}", spec.config.master_seed);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
    let (report, outcomes) = pool.install(|| -> Result<_> {
        let report = run_experiment(&spec.config)?;
        let outcomes = run_requested_checks(&spec)?;
        Ok((report, outcomes))
    })?;

    write_moment_report(&args.out_dir, &report)?;
    let lines = write_check_outcomes(&args.out_dir, &outcomes)?;
    println!(
        "experiment: {} replicates, {} failures, reports in {}",
        report.replicates,
        report.failures,
        args.out_dir.display()
    );
    for line in &lines {
        println!("{line}");
    }
    let failed = outcomes.iter().any(|o| o.pass == Some(false));
    Ok(if failed { 4 } else { 0 })
}

fn cmd_constants(args: ConstantsArgs) -> Result<i32> {
    eprintln!("# seed = none (deterministic)");
    match args.kind.as_str() {
        "vf" => {
            let c1 = c1_vf(args.v, args.n)?;
            let c2 = c2_vf(args.v, args.n)?;
            println!("C1 = {c1}");
            println!("C2 = {c2}");
            if args.table {
                println!("kind,v,n,c1,c2");
                for v in [2usize, 3, 4, 5, 8, 10, 20, 50, 100] {
                    if v <= args.n {
                        println!("vf,{v},{},{},{}", args.n, c1_vf(v, args.n)?, c2_vf(v, args.n)?);
                    }
                }
            }
        }
        "mc" => {
            let ne = args
                .ne
                .ok_or_else(|| Error::config("mc constants need --ne"))?;
            let c1 = c1_mc(args.v, args.n, ne)?;
            let c2 = c2_mc(args.v, args.n, ne)?;
            println!("C1 = {c1}");
            println!("C2 = {c2}");
            if args.table {
                println!("kind,v,n,ne,c1,c2");
                for v in [1usize, 2, 5, 10, 20, 50, 100] {
                    println!(
                        "mc,{v},{},{ne},{},{}",
                        args.n,
                        c1_mc(v, args.n, ne)?,
                        c2_mc(v, args.n, ne)?
                    );
                }
            }
        }
        other => return Err(Error::config(format!("unknown constants kind '{other}'"))),
    }
    Ok(0)
}
