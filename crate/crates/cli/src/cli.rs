//! Command-line definitions and the command implementations behind them.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use effconc_core::classical::Sided;
use effconc_core::empirical::{SampleSummary, SigmaSearch};
use effconc_core::stopping::{Rule, StoppingConfig};
use effconc_core::Problem;

use crate::bounds::{
    empirical_named, gaussian_reference, quantile_named, resolve, tail_named, EMPIRICAL_BOUNDS, QUANTILE_BOUNDS,
    TAIL_BOUNDS,
};
use crate::error::{CliError, CliResult};
use crate::grid::{parse_grid, parse_n_grid};
use crate::memo::MemoOmega;
use crate::records::{mark_min, write_rows, EmpiricalRow, Format, QuantileRow, StopRow, TailRow};
use crate::selftest::{self, Fault, SUITES};
use crate::stop::{error_frequency, mean_stop, stop_experiment};

#[derive(Debug, Parser)]
#[command(name = "effconc", version, about = "Concentration and quantile bounds for bounded i.i.d. means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail bounds on P(S_n >= sigma*u) or P(|S_n| >= sigma*u).
    Tail(TailArgs),
    /// Known-variance quantile bounds.
    Quantile(QuantileArgs),
    /// Unknown-variance quantile bounds from a sample or its summary.
    Empirical(EmpiricalArgs),
    /// Replicated (epsilon, delta)-stopping runs on uniform-average streams.
    Stop(StopArgs),
    /// Grid sweep of tail, quantile or empirical bounds written to a file.
    Sweep(SweepArgs),
    /// Invariant and reduced Monte Carlo checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidedArg {
    One,
    Two,
}

impl From<SidedArg> for Sided {
    fn from(s: SidedArg) -> Self {
        match s {
            SidedArg::One => Sided::One,
            SidedArg::Two => Sided::Two,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TailArgs {
    /// Sample sizes: a list (50,200) or a log-spaced range (1e2..1e8).
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Standard deviations, at most R/2.
    #[arg(long)]
    pub sigma: String,
    /// Standardized levels u.
    #[arg(long)]
    pub u: String,
    /// Comma list of bounds or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub bounds: Vec<String>,
    #[arg(long, value_enum, default_value = "one")]
    pub sided: SidedArg,
    /// Grid points per decade for range specifications.
    #[arg(long, default_value_t = 1)]
    pub per_decade: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QuantileArgs {
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub sigma: String,
    /// Levels delta in (0, 1).
    #[arg(long)]
    pub delta: String,
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub bounds: Vec<String>,
    #[arg(long, value_enum, default_value = "two")]
    pub sided: SidedArg,
    #[arg(long, default_value_t = 1)]
    pub per_decade: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmpiricalArgs {
    /// File with one observation in [0, R] per line.
    #[arg(long, conflicts_with_all = ["n", "mean", "empvar"])]
    pub data: Option<PathBuf>,
    /// Sample sizes of the summary (list or range).
    #[arg(long, requires_all = ["mean", "empvar"])]
    pub n: Option<String>,
    #[arg(long)]
    pub mean: Option<f64>,
    /// The 1/n-normalized sample variance.
    #[arg(long)]
    pub empvar: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub delta: String,
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub bounds: Vec<String>,
    #[arg(long, value_enum, default_value = "one")]
    pub sided: SidedArg,
    /// Ratio of the geometric sigma lattice used by the EBE supremum; 0
    /// searches the bracket continuously.
    #[arg(long, default_value_t = 0.0)]
    pub sigma_lattice: f64,
    #[arg(long, default_value_t = 1)]
    pub per_decade: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StopArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    pub ell: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    pub reps: u32,
    /// Comma list of hoeffding, eb, ebe.
    #[arg(long, value_delimiter = ',', default_value = "hoeffding,eb,ebe")]
    pub rules: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 32)]
    pub schedule_base: u64,
    #[arg(long, default_value_t = 1.5)]
    pub schedule_ratio: f64,
    /// Ratio of the geometric sigma lattice used by the EBE supremum; 0
    /// searches the bracket continuously.
    #[arg(long, default_value_t = 1.01)]
    pub sigma_lattice: f64,
    /// Print mean stop time and error frequency per (ell, rule) to stderr.
    #[arg(long)]
    pub summary: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    Tail(TailArgs),
    Quantile(QuantileArgs),
    Empirical(EmpiricalArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub kind: SweepKind,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Run only these suites.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupt one quantity to confirm the guarding check fails.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

fn sink(out: &OutputArgs) -> CliResult<Box<dyn Write>> {
    Ok(match &out.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn sigma_search(ratio: f64) -> CliResult<SigmaSearch> {
    if ratio == 0.0 {
        Ok(SigmaSearch::Continuous)
    } else if ratio > 1.0 && ratio.is_finite() {
        Ok(SigmaSearch::Lattice { ratio })
    } else {
        Err(CliError::Usage(format!("--sigma-lattice must be 0 or exceed 1, got {ratio}")))
    }
}

fn check_deltas(deltas: &[f64]) -> CliResult<()> {
    match deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        Some(d) => Err(CliError::Usage(format!("delta must lie in (0, 1), got {d}"))),
        None => Ok(()),
    }
}

fn problem(n: u64, r: f64, sigma: f64) -> CliResult<Problem> {
    Problem::new(n, r, sigma).map_err(|e| CliError::Usage(format!("(n={n}, R={r}, sigma={sigma}): {e}")))
}

pub fn tail_rows(args: &TailArgs, memo: &MemoOmega) -> CliResult<Vec<TailRow>> {
    let names = resolve(&args.bounds, &TAIL_BOUNDS).map_err(CliError::Usage)?;
    let ns = parse_n_grid(&args.n, args.per_decade)?;
    let sigmas = parse_grid(&args.sigma, args.per_decade)?;
    let us = parse_grid(&args.u, args.per_decade)?;
    let sided = args.sided.into();
    let mut rows = Vec::new();
    for &n in &ns {
        for &sigma in &sigmas {
            let prob = problem(n, args.r, sigma)?;
            for &u in &us {
                for &name in &names {
                    let b = tail_named(name, &prob, u, sided, memo)?;
                    rows.push(TailRow::new(&prob, u, sided, name, &b));
                }
            }
        }
    }
    mark_min(&mut rows, |r| (r.n, r.sigma.to_bits(), r.u.to_bits()), |r| r.value, |r| r.is_min = true);
    Ok(rows)
}

pub fn quantile_rows(args: &QuantileArgs, memo: &MemoOmega) -> CliResult<Vec<QuantileRow>> {
    let names = resolve(&args.bounds, &QUANTILE_BOUNDS).map_err(CliError::Usage)?;
    let ns = parse_n_grid(&args.n, args.per_decade)?;
    let sigmas = parse_grid(&args.sigma, args.per_decade)?;
    let deltas = parse_grid(&args.delta, args.per_decade)?;
    check_deltas(&deltas)?;
    let sided = args.sided.into();
    let mut rows = Vec::new();
    for &n in &ns {
        for &sigma in &sigmas {
            let prob = problem(n, args.r, sigma)?;
            for &delta in &deltas {
                let reference = gaussian_reference(sigma, delta, sided)?;
                for &name in &names {
                    let b = quantile_named(name, &prob, delta, sided, memo)?;
                    rows.push(QuantileRow::new(&prob, delta, sided, name, reference, &b));
                }
            }
        }
    }
    mark_min(&mut rows, |r| (r.n, r.sigma.to_bits(), r.delta.to_bits()), |r| r.value, |r| r.is_min = true);
    Ok(rows)
}

/// Reads one value per line; blank lines are skipped and any value outside
/// `[0, R]` is reported with its line number.
pub fn read_data(path: &PathBuf, r: f64) -> CliResult<Vec<f64>> {
    let file = File::open(path)?;
    let mut values = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let data_err = |msg: String| CliError::Data { path: path.clone(), line: i + 1, msg };
        let v: f64 = text.parse().map_err(|_| data_err(format!("not a number: '{text}'")))?;
        if !(0.0..=r).contains(&v) {
            return Err(data_err(format!("value {v} outside [0, {r}]")));
        }
        values.push(v);
    }
    if values.len() < 2 {
        return Err(CliError::Usage(format!("{}: need at least 2 observations", path.display())));
    }
    Ok(values)
}

pub fn empirical_rows(args: &EmpiricalArgs, memo: &MemoOmega) -> CliResult<Vec<EmpiricalRow>> {
    let names = resolve(&args.bounds, &EMPIRICAL_BOUNDS).map_err(CliError::Usage)?;
    let deltas = parse_grid(&args.delta, args.per_decade)?;
    check_deltas(&deltas)?;
    let search = sigma_search(args.sigma_lattice)?;
    let sided = args.sided.into();
    let summaries: Vec<SampleSummary> = match (&args.data, &args.n, args.mean, args.empvar) {
        (Some(path), ..) => vec![SampleSummary::from_data(&read_data(path, args.r)?, args.r).map_err(usage)?],
        (None, Some(ns), Some(mean), Some(empvar)) => parse_n_grid(ns, args.per_decade)?
            .into_iter()
            .map(|n| SampleSummary::new(n, mean, empvar, args.r).map_err(usage))
            .collect::<CliResult<_>>()?,
        _ => return Err(CliError::Usage("give either --data or all of --n, --mean, --empvar".into())),
    };
    let mut rows = Vec::new();
    for s in &summaries {
        for &delta in &deltas {
            let reference = gaussian_reference(s.emp_sd(), delta, sided)?;
            for &name in &names {
                let b = empirical_named(name, s, args.r, delta, sided, search, memo)?;
                rows.push(EmpiricalRow {
                    n: s.n,
                    r: args.r,
                    mean: s.mean,
                    emp_var: s.emp_var,
                    delta,
                    sided: sided.as_str(),
                    bound: name,
                    value: b.value,
                    reference,
                    is_min: false,
                    winner: b.winner,
                    flag: b.flag,
                });
            }
        }
    }
    mark_min(&mut rows, |r| (r.n, r.delta.to_bits()), |r| r.value, |r| r.is_min = true);
    Ok(rows)
}

fn parse_rule(name: &str) -> CliResult<Rule> {
    match name {
        "hoeffding" => Ok(Rule::Hoeffding),
        "eb" => Ok(Rule::EmpBernstein),
        "ebe" => Ok(Rule::Ebe),
        _ => Err(CliError::Usage(format!("unknown rule '{name}' (expected hoeffding, eb, ebe)"))),
    }
}

pub fn stop_rows(args: &StopArgs, memo: &MemoOmega) -> CliResult<Vec<StopRow>> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if args.ell.contains(&0) {
        return Err(CliError::Usage("--ell values must be at least 1".into()));
    }
    let rules = args.rules.iter().map(|r| parse_rule(r)).collect::<CliResult<Vec<_>>>()?;
    let config = StoppingConfig::new(args.epsilon, args.delta, args.schedule_base, args.schedule_ratio)
        .map_err(usage)?
        .with_sigma_search(sigma_search(args.sigma_lattice)?);
    let runs = stop_experiment(&args.ell, args.reps, &rules, args.seed, &config, memo)?;
    if args.summary {
        for &ell in &args.ell {
            for &rule in &rules {
                let mean = mean_stop(&runs, rule, ell).unwrap_or(f64::NAN);
                let (err, m) = error_frequency(&runs, rule, ell).unwrap_or((f64::NAN, 0));
                eprintln!("ell={ell} rule={} mean_stop={mean:.1} error_rate={err:.4} runs={m}", rule.as_str());
            }
        }
    }
    let mut rows = Vec::new();
    for run in &runs {
        for (i, c) in run.trace.checks.iter().enumerate() {
            rows.push(StopRow {
                replication: run.replication,
                rule: run.rule.as_str(),
                ell: run.ell,
                check_index: i,
                n: c.n,
                half_width: c.half_width,
                stopped: c.stopped,
                correct: run.trace.correct,
            });
        }
    }
    Ok(rows)
}

/// Runs a parsed command line; selftest failures surface as `Ok(false)`.
pub fn run(cli: Cli) -> CliResult<bool> {
    let memo = MemoOmega::new();
    match cli.command {
        Command::Tail(a) => write_rows(&tail_rows(&a, &memo)?, a.out.format, sink(&a.out)?)?,
        Command::Quantile(a) => write_rows(&quantile_rows(&a, &memo)?, a.out.format, sink(&a.out)?)?,
        Command::Empirical(a) => write_rows(&empirical_rows(&a, &memo)?, a.out.format, sink(&a.out)?)?,
        Command::Stop(a) => write_rows(&stop_rows(&a, &memo)?, a.out.format, sink(&a.out)?)?,
        Command::Sweep(s) => {
            let out = match &s.kind {
                SweepKind::Tail(a) => &a.out,
                SweepKind::Quantile(a) => &a.out,
                SweepKind::Empirical(a) => &a.out,
            };
            if out.output.is_none() {
                return Err(CliError::Usage("sweep requires --output".into()));
            }
            let (out, count) = match &s.kind {
                SweepKind::Tail(a) => {
                    let rows = tail_rows(a, &memo)?;
                    write_rows(&rows, a.out.format, sink(&a.out)?)?;
                    (&a.out, rows.len())
                }
                SweepKind::Quantile(a) => {
                    let rows = quantile_rows(a, &memo)?;
                    write_rows(&rows, a.out.format, sink(&a.out)?)?;
                    (&a.out, rows.len())
                }
                SweepKind::Empirical(a) => {
                    let rows = empirical_rows(a, &memo)?;
                    write_rows(&rows, a.out.format, sink(&a.out)?)?;
                    (&a.out, rows.len())
                }
            };
            if let Some(path) = &out.output {
                eprintln!("wrote {count} rows to {}", path.display());
            }
        }
        Command::Selftest(a) => return Ok(selftest_command(&a)),
    }
    Ok(true)
}

fn selftest_command(args: &SelftestArgs) -> bool {
    let mut suites = Vec::new();
    for name in &args.suite {
        match SUITES.iter().find(|s| **s == name.as_str()) {
            Some(s) => suites.push(*s),
            None => {
                eprintln!("unknown suite '{name}' (expected one of: {})", SUITES.join(", "));
                return false;
            }
        }
    }
    if suites.is_empty() {
        suites = SUITES.to_vec();
    }
    let opts = selftest::Options { suites, fault: args.inject_fault, seed: args.seed };
    let mut all = true;
    for report in selftest::run(&opts) {
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("{tag} {}/{}: {}", report.suite, c.name, c.detail);
        }
        let passed = report.checks.iter().filter(|c| c.passed).count();
        println!("suite {}: {passed}/{} passed in {:.2?}", report.suite, report.checks.len(), report.elapsed);
        all &= report.passed();
    }
    all
}
