//! `cloud`: infer, generate and benchmark from the command line.

mod bench;
mod generate;
mod ingest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cloud_core::{infer_columns, CausalModel, InferOptions, DEFAULT_AXIS_BINS, DEFAULT_MAX_SWEEPS};

use crate::bench::BenchConfig;
use crate::generate::{Scenario, Suite};
use crate::ingest::{ColumnRef, ColumnSpec, DeclaredType, Delimiter, HeaderMode, Table, DEFAULT_AUTO_THRESHOLD};
use crate::report::{Provenance, Report};

#[derive(Parser)]
#[command(name = "cloud", version, about = "Decide between independence, X -> Y, Y -> X and a latent common cause")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the causal model of two columns in a delimited file.
    Infer(InferArgs),
    /// Generate synthetic pairs and a manifest of their ground truth.
    Gen(GenArgs),
    /// Run inference over a manifest and report accuracy.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Bin counts per axis, e.g. "2,4,8" or "2..32".
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Candidate models, e.g. "indep,xy,yx,conf".
    #[arg(long, value_parser = parse_models)]
    models: Option<Models>,
    /// Sweep budget of the function search.
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    max_sweeps: usize,
}

impl SearchArgs {
    fn grid(&self) -> Vec<usize> {
        self.grid.clone().map_or_else(|| DEFAULT_AXIS_BINS.to_vec(), |g| g.0)
    }

    fn models(&self) -> Vec<CausalModel> {
        self.models.clone().map_or_else(|| CausalModel::ALL.to_vec(), |m| m.0)
    }

    fn options(&self) -> Result<InferOptions> {
        if self.max_sweeps == 0 {
            bail!("--max-sweeps must be at least 1");
        }
        Ok(InferOptions { max_sweeps: self.max_sweeps })
    }
}

#[derive(Args)]
struct InferArgs {
    input: PathBuf,
    /// Column for X: header name or zero-based index.
    #[arg(long, default_value = "0")]
    x_col: ColumnRef,
    /// Column for Y: header name or zero-based index.
    #[arg(long, default_value = "1")]
    y_col: ColumnRef,
    #[arg(long, value_enum, default_value_t = DeclaredType::Auto)]
    x_type: DeclaredType,
    #[arg(long, value_enum, default_value_t = DeclaredType::Auto)]
    y_type: DeclaredType,
    /// Alphabet size of X when discrete.
    #[arg(long)]
    x_arity: Option<usize>,
    /// Alphabet size of Y when discrete.
    #[arg(long)]
    y_arity: Option<usize>,
    /// Largest number of distinct integers for which `auto` picks discrete.
    #[arg(long, default_value_t = DEFAULT_AUTO_THRESHOLD)]
    auto_threshold: usize,
    /// comma, tab, whitespace or a single character; detected when omitted.
    #[arg(long)]
    delimiter: Option<Delimiter>,
    #[arg(long, value_enum, default_value_t = HeaderMode::Auto)]
    header: HeaderMode,
    #[command(flatten)]
    search: SearchArgs,
    /// Recorded in the report; inference itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// A predefined set of scenarios.
    #[arg(long, value_enum, conflicts_with = "scenario")]
    suite: Option<Suite>,
    /// KIND:TRUTH[:VARIANT], repeatable, e.g. "continuous:x_to_y:cubic".
    #[arg(long)]
    scenario: Vec<Scenario>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Samples per scenario and sample size.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    manifest: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Worker threads; all cores when unset.
    #[arg(long, env = "CLOUD_THREADS")]
    threads: Option<usize>,
    /// Directory for bench.json, confusion.csv and decision_rate.csv;
    /// the JSON goes to standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
struct Models(Vec<CausalModel>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid bin count `{part}`");
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad())?;
            let hi: usize = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err("grid needs positive bin counts".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(Grid(out))
}

fn parse_models(s: &str) -> Result<Models, String> {
    let mut out: Vec<CausalModel> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<CausalModel>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("no models given".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(Models(out))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_infer(args: InferArgs) -> Result<()> {
    let table = Table::read(&args.input, args.delimiter, args.header)?;
    let x_spec = ColumnSpec { column: args.x_col, declared_type: args.x_type, arity: args.x_arity };
    let y_spec = ColumnSpec { column: args.y_col, declared_type: args.y_type, arity: args.y_arity };
    let x = table.column(&x_spec, args.auto_threshold)?;
    let y = table.column(&y_spec, args.auto_threshold)?;
    let grid = args.search.grid();
    let models = args.search.models();
    let options = args.search.options()?;
    let result = infer_columns(&x, &y, &grid, &models, options)?;
    let provenance = Provenance {
        input: args.input.display().to_string(),
        x: x_spec,
        y: y_spec,
        x_scaling: None,
        y_scaling: None,
        grid,
        models,
        max_sweeps: options.max_sweeps,
        seed: args.seed,
        version: report::version(),
    };
    let report = Report::new(result, provenance);
    write_or_print(args.output.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let scenarios = match args.suite {
        Some(suite) => suite.scenarios(),
        None if args.scenario.is_empty() => bail!("give --suite or at least one --scenario"),
        None => args.scenario.clone(),
    };
    let manifest = generate::write_suite(&args.output, &scenarios, &args.n, args.count, args.seed)?;
    eprintln!("wrote {}", manifest.display());
    Ok(())
}

/// Returns whether every trial completed.
fn cmd_bench(args: BenchArgs) -> Result<bool> {
    let config = BenchConfig {
        grid: args.search.grid(),
        models: args.search.models(),
        options: args.search.options()?,
        threads: args.threads.filter(|&t| t > 0),
    };
    let report = bench::run(&args.manifest, &config)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            write_or_print(Some(&dir.join("bench.json")), &json)?;
            write_or_print(Some(&dir.join("confusion.csv")), &bench::confusion_csv(&report))?;
            write_or_print(Some(&dir.join("decision_rate.csv")), &bench::curve_csv(&report))?;
            eprintln!(
                "accuracy {:.4} over {} trials ({} failed)",
                report.overall.accuracy, report.overall.trials, report.failed
            );
        }
        None => write_or_print(None, &json)?,
    }
    for t in report.trials.iter().filter(|t| t.error.is_some()) {
        eprintln!("failed: {}: {}", t.file, t.error.as_deref().unwrap_or_default());
    }
    Ok(report.failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Infer(a) => cmd_infer(a).map(|()| true),
        Command::Gen(a) => cmd_gen(a).map(|()| true),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("2,4,8").unwrap().0, vec![2, 4, 8]);
        assert_eq!(parse_grid("2..5,8").unwrap().0, vec![2, 3, 4, 5, 8]);
        assert_eq!(parse_grid("4, 2, 4").unwrap().0, vec![2, 4]);
        assert!(parse_grid("0,2").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn model_syntax() {
        assert_eq!(parse_models("conf,xy").unwrap().0, vec![CausalModel::XToY, CausalModel::Confounded]);
        assert!(parse_models("maybe").is_err());
    }
}
