//! Command definitions and dispatch.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fairsel_core::dataset::load_dataset;
use fairsel_core::{
    build_model, igf_vector, leximin_solve, solve_ip_with_clock, Dataset, DiversityConstraints,
    IgfBounds, IgfMode, Rat, SolveStatus, SolverOptions,
};

use crate::io::{
    self, igf_file, parse_decimal, ranking_file, trace_file, verify_ranking, write_json, IgfFile,
};
use crate::report::{build_report, render_table, write_report_csv};
use crate::synth::{generate, GroupProfile};
use crate::{WallClock, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "fairsel",
    about = "Exact top-k selection under diversity constraints with in-group fairness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Utility-optimal ranking under the diversity constraints.
    Solve(RunArgs),
    /// Leximin-balanced ranking: maximize the worst group fairness, then the rest.
    Leximin(RunArgs),
    /// Compare unconstrained / diversity-only / leximin utilities across k.
    Report(ReportArgs),
    /// Generate a synthetic population from a profile.
    Gen(GenArgs),
    /// Check data, schema and constraints without solving.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ratio,
    Agg,
}

impl From<ModeArg> for IgfMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ratio => IgfMode::Ratio,
            ModeArg::Agg => IgfMode::Aggregated,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Item pool CSV with header `id,score,<attributes...>`.
    #[arg(long)]
    data: PathBuf,
    /// Attribute schema JSON.
    #[arg(long)]
    schema: PathBuf,
    /// Constraint JSON (explicit bounds or proportional); omit for none.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Selection size; overrides any k in the constraint file.
    #[arg(long)]
    k: Option<usize>,
}

impl InputArgs {
    fn load(&self) -> Result<(Dataset, DiversityConstraints)> {
        let schema = io::read_schema(&self.schema)?;
        let rows = io::read_rows(&self.data, &schema)?;
        let ds = load_dataset(&rows, &schema)
            .map_err(|e| anyhow::anyhow!("loading {}: {e}", self.data.display()))?;
        let cons = io::read_constraints(self.constraints.as_deref(), &ds, self.k)?;
        Ok((ds, cons))
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Worker count; accepted for interface parity, results are identical
    /// for any value.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            time_limit: self.time_limit,
            workers: self.workers.max(1),
            ..SolverOptions::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fairness measure: per-group score ratio or aggregated score mass.
    #[arg(long, value_enum, default_value_t = ModeArg::Ratio)]
    mode: ModeArg,
    /// Leximin bisection tolerance (plain decimal).
    #[arg(long, default_value = "0.001")]
    epsilon: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Selection sizes, comma-separated; defaults to the constraint k.
    #[arg(long = "ks", value_delimiter = ',')]
    ks: Vec<usize>,
    #[arg(long, default_value = "0.001")]
    epsilon: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct GenArgs {
    /// Group profile JSON.
    #[arg(long)]
    profile: PathBuf,
    /// Population size.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
}

pub fn main() -> Result<u8> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Leximin(args) => cmd_leximin(args),
        Command::Report(args) => cmd_report(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::LimitReached => EXIT_LIMIT,
    }
}

fn check_constraints(ds: &Dataset, cons: &DiversityConstraints) -> Result<Option<u8>> {
    let violations = cons.validate(ds);
    if violations.is_empty() {
        return Ok(None);
    }
    for v in &violations {
        eprintln!("infeasible: {v}");
    }
    Ok(Some(EXIT_INFEASIBLE))
}

fn cmd_solve(args: RunArgs) -> Result<u8> {
    let (ds, cons) = args.input.load()?;
    if let Some(code) = check_constraints(&ds, &cons)? {
        return Ok(code);
    }
    let mode: IgfMode = args.mode.into();
    let prog = build_model(&ds, &cons, &IgfBounds::unconstrained(mode))
        .map_err(|e| anyhow::anyhow!("model: {e}"))?;
    let solution = solve_ip_with_clock(&ds, &prog, &args.solver.options(), &WallClock::new())
        .map_err(|e| anyhow::anyhow!("solve: {e}"))?;
    fs::create_dir_all(&args.out)?;
    if let Some(outcome) = &solution.outcome {
        let ranking = ranking_file(&ds, outcome, status_name(solution.status));
        let ids: Vec<String> = ranking.ranking.iter().map(|r| r.id.clone()).collect();
        verify_ranking(&ds, &cons, mode, &BTreeMap::new(), &ids)?;
        write_json(&args.out.join("ranking.json"), &ranking)?;
        write_json(
            &args.out.join("igf.json"),
            &igf_file(&ds, &igf_vector(&ds, outcome, mode)),
        )?;
        println!(
            "{}: utility {} over {} positions ({} nodes)",
            status_name(solution.status),
            ranking.utility,
            outcome.k(),
            solution.nodes
        );
    } else {
        println!("{}", status_name(solution.status));
    }
    Ok(exit_code(solution.status))
}

/// igf.json for `leximin`: the diversity-only vector next to the balanced one.
#[derive(Serialize)]
struct BeforeAfterIgf {
    before: IgfFile,
    after: IgfFile,
}

fn cmd_leximin(args: RunArgs) -> Result<u8> {
    let (ds, cons) = args.input.load()?;
    if let Some(code) = check_constraints(&ds, &cons)? {
        return Ok(code);
    }
    let mode: IgfMode = args.mode.into();
    let eps = parse_decimal(&args.epsilon).context("bad --epsilon")?;
    let options = args.solver.options();

    let base_prog = build_model(&ds, &cons, &IgfBounds::unconstrained(mode))
        .map_err(|e| anyhow::anyhow!("model: {e}"))?;
    let base = solve_ip_with_clock(&ds, &base_prog, &options, &WallClock::new())
        .map_err(|e| anyhow::anyhow!("solve: {e}"))?;
    let Some(base_outcome) = &base.outcome else {
        println!("{}", status_name(base.status));
        return Ok(exit_code(base.status));
    };

    let trace = leximin_solve(&ds, &cons, mode, eps, &options, &WallClock::new())
        .map_err(|e| anyhow::anyhow!("leximin: {e}"))?;
    let solution = &trace.solution;
    fs::create_dir_all(&args.out)?;
    if let Some(outcome) = &solution.outcome {
        let ranking = ranking_file(&ds, outcome, status_name(solution.status));
        let ids: Vec<String> = ranking.ranking.iter().map(|r| r.id.clone()).collect();
        let floors: BTreeMap<String, Rat> = trace
            .bounds
            .entries()
            .map(|(v, qb)| (ds.schema().value_name(v).to_string(), qb.q))
            .collect();
        verify_ranking(&ds, &cons, mode, &floors, &ids)?;
        write_json(&args.out.join("ranking.json"), &ranking)?;
        write_json(
            &args.out.join("igf.json"),
            &BeforeAfterIgf {
                before: igf_file(&ds, &igf_vector(&ds, base_outcome, mode)),
                after: igf_file(&ds, &igf_vector(&ds, outcome, mode)),
            },
        )?;
        write_json(
            &args.out.join("trace.json"),
            &trace_file(&ds, mode, eps, &trace),
        )?;
        println!(
            "{}: utility {} after {} probes in {} rounds",
            status_name(solution.status),
            ranking.utility,
            trace.probes,
            trace.rounds.len()
        );
    } else {
        println!("{}", status_name(solution.status));
    }
    Ok(exit_code(solution.status))
}

fn cmd_report(args: ReportArgs) -> Result<u8> {
    // Constraints are resolved per k below; load only the pool here.
    let schema = io::read_schema(&args.input.schema)?;
    let rows = io::read_rows(&args.input.data, &schema)?;
    let ds = load_dataset(&rows, &schema)
        .map_err(|e| anyhow::anyhow!("loading {}: {e}", args.input.data.display()))?;
    let eps = parse_decimal(&args.epsilon).context("bad --epsilon")?;
    let options = args.solver.options();
    let ks = if args.ks.is_empty() {
        let cons = io::read_constraints(args.input.constraints.as_deref(), &ds, args.input.k)?;
        vec![cons.k()]
    } else {
        args.ks.clone()
    };
    let constraints_for = |k: usize| -> Result<DiversityConstraints> {
        io::read_constraints(args.input.constraints.as_deref(), &ds, Some(k))
    };
    let report = build_report(
        &ds,
        &ks,
        &constraints_for,
        eps,
        &options,
        &WallClock::new(),
    )?;
    fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("report.json"), &report)?;
    write_report_csv(&args.out.join("report.csv"), &report)?;
    print!("{}", render_table(&report));
    if let Some(reason) = &report.partial {
        eprintln!("report incomplete: {reason}");
        return Ok(crate::EXIT_ERROR);
    }
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.profile)
        .with_context(|| format!("reading profile {}", args.profile.display()))?;
    let profile: GroupProfile = serde_json::from_str(&text)
        .with_context(|| format!("parsing profile {}", args.profile.display()))?;
    let schema = profile.schema()?;
    let rows = generate(&profile, args.n, args.seed)?;
    fs::create_dir_all(&args.out)?;
    io::write_rows(&args.out.join("data.csv"), &schema, &rows)?;
    io::write_schema(&args.out.join("schema.json"), &schema)?;
    println!(
        "wrote {} items to {} (seed {})",
        rows.len(),
        args.out.display(),
        args.seed
    );
    Ok(EXIT_OK)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8> {
    let (ds, cons) = args.input.load()?;
    let violations = cons.validate(&ds);
    let diagnosis: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    write_json_stdout(&diagnosis)?;
    if diagnosis.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_INFEASIBLE)
    }
}

fn write_json_stdout<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(())
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::LimitReached => "limit-reached",
    }
}
