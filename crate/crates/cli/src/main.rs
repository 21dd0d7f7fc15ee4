//! `levin-forge`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 search exhausted.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ReportFormat, RunConfig};
use levin_forge_core::grammar::{enumerate, Grammar};
use levin_forge_core::induction::{predict_next, Problem, SolutionRecord};
use levin_forge_core::search::{SearchConfig, SearchError};
use levin_forge_core::transfer::{
    self, h_star, speedup_analysis, TrainingPlan, TransferError, TransferReport,
};

#[derive(Parser)]
#[command(
    name = "levin-forge",
    version,
    about = "Levin search with an incrementally learned program prior"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Grammar file (JSON).
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    /// Run configuration file (JSON). Flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed recorded in reports.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Update the grammar after each solved problem.
    #[arg(long, global = true)]
    incremental: bool,
    /// Mine and install idioms (with --incremental).
    #[arg(long, global = true)]
    idioms: bool,
    /// Also run a non-incremental baseline and compare.
    #[arg(long, global = true)]
    compare_baseline: bool,
    /// Search threads. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Budget of the first search phase.
    #[arg(long, global = true)]
    t0: Option<u64>,
    /// Phases before giving up.
    #[arg(long, global = true)]
    max_phases: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem from the grammar.
    Solve { problem: Option<PathBuf> },
    /// Run a training plan.
    Train { plan: Option<PathBuf> },
    /// Probability that the next bit of a prefix is 1.
    Predict {
        prefix: String,
        #[arg(long)]
        budget: u64,
    },
    /// List programs above a probability threshold.
    Enumerate {
        #[arg(long)]
        min_probability: f64,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Re-render a stored JSON report.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: ReportFormat,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Exhausted(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Exhausted(_) => 2,
        }
    }
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::Search(SearchError::BudgetExhausted { .. })
            | TransferError::ProblemUnsolved(_) => CliError::Exhausted(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEVIN_FORGE_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Exhausted(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(&cli.global)?;
    match cli.command {
        Command::Solve { problem } => cmd_solve(&config, problem),
        Command::Train { plan } => cmd_train(&config, plan),
        Command::Predict { prefix, budget } => cmd_predict(&config, &prefix, budget),
        Command::Enumerate {
            min_probability,
            limit,
        } => cmd_enumerate(&config, min_probability, limit),
        Command::Report { report, format } => cmd_report(&report, format),
    }
}

fn load_grammar(path: &Path) -> Result<Grammar, CliError> {
    Grammar::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn search_config(config: &RunConfig, base: SearchConfig) -> SearchConfig {
    SearchConfig {
        t0: config.t0.unwrap_or(base.t0),
        max_phases: config.max_phases.unwrap_or(base.max_phases),
        keep_searching_after_first: false,
        workers: config.workers,
    }
}

fn cmd_solve(config: &RunConfig, problem: Option<PathBuf>) -> Result<(), CliError> {
    let path = problem
        .or_else(|| config.problem.clone())
        .ok_or_else(|| CliError::usage("no problem file given"))?;
    let problem =
        Problem::load(&path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let grammar = load_grammar(config.require_grammar()?)?;
    if problem.arity() != grammar.params().len() {
        return Err(CliError::usage(format!(
            "problem takes {} argument(s), grammar has {} parameter(s)",
            problem.arity(),
            grammar.params().len()
        )));
    }
    let search = search_config(config, SearchConfig::default());
    search
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let result = match transfer::solve(&grammar, &problem, &search) {
        Ok(r) => r,
        Err(TransferError::Search(SearchError::BudgetExhausted {
            total_steps_spent,
            phases_run,
        })) => {
            println!("problem: {}", problem.name);
            println!("unsolved after {phases_run} phases, {total_steps_spent} steps");
            return Err(CliError::Exhausted(format!(
                "no solution for '{}'",
                problem.name
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let s = result.solution.expect("successful search has a solution");
    let record = SolutionRecord {
        problem: problem.name.clone(),
        solution: s.program.clone(),
        derivation: s.derivation.clone(),
        probability: s.probability,
        steps: s.steps,
        cjs: s.cjs(),
        search_total_steps: result.total_steps_spent,
        update_steps: 0,
    };
    println!("problem: {}", problem.name);
    println!("solution: {}", s.program);
    println!("P(s): {}", s.probability);
    println!("H*: {}", h_star(s.probability).map_err(CliError::from)?);
    println!("t(s): {}", s.steps);
    println!("CJS: {}", s.cjs());
    println!("total steps: {}", result.total_steps_spent);
    println!("phases: {}", result.phases_run);
    config.prepare_out()?;
    let json = serde_json::to_string_pretty(&record).expect("record serializes") + "\n";
    write(
        &config.out.join(format!("{}.solution.json", problem.name)),
        &json,
    )
}

fn cmd_train(config: &RunConfig, plan_path: Option<PathBuf>) -> Result<(), CliError> {
    let path = plan_path
        .or_else(|| config.plan.clone())
        .ok_or_else(|| CliError::usage("no plan file given"))?;
    let mut plan = TrainingPlan::load(&path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    if let Some(g) = &config.grammar {
        plan.grammar = load_grammar(g)?;
        plan.grammar_path = g.display().to_string();
    }
    if let Some(v) = config.incremental {
        plan.incremental = v;
    }
    if let Some(v) = config.idioms {
        plan.idioms_enabled = v;
    }
    if let Some(seed) = config.seed {
        plan.seed = seed;
    }
    plan.search = search_config(config, plan.search);
    plan.validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    config.prepare_out()?;

    let training = transfer::train(&plan)?;
    let mut report = training.report;
    let mut analysis = None;
    if config.compare_baseline {
        let baseline_plan = TrainingPlan {
            incremental: false,
            idioms_enabled: false,
            ..plan.clone()
        };
        let baseline = transfer::run_training(&baseline_plan)?;
        let a = speedup_analysis(&report, &baseline)?;
        report = report.with_speedups(&a);
        write_report(config, "baseline", &baseline)?;
        write(&config.out.join("speedup.json"), &a.to_json())?;
        write(&config.out.join("speedup.csv"), &a.to_csv()?)?;
        write(&config.out.join("speedup.md"), &a.to_markdown())?;
        analysis = Some(a);
    }
    write_report(config, "report", &report)?;
    training
        .grammar
        .save(config.out.join("grammar.json"))
        .map_err(|e| CliError::usage(e.to_string()))?;
    let records =
        serde_json::to_string_pretty(&training.records).expect("records serialize") + "\n";
    write(&config.out.join("solutions.json"), &records)?;

    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", report.to_markdown());
    if let Some(a) = &analysis {
        let _ = write!(out, "\n{}", a.to_markdown());
    }
    report.check_all_solved().map_err(CliError::from)
}

fn write_report(config: &RunConfig, stem: &str, report: &TransferReport) -> Result<(), CliError> {
    for f in &config.formats {
        match f {
            ReportFormat::Json => {
                write(&config.out.join(format!("{stem}.json")), &report.to_json())?
            }
            ReportFormat::Csv => write(&config.out.join(format!("{stem}.csv")), &report.to_csv()?)?,
            ReportFormat::Markdown => write(
                &config.out.join(format!("{stem}.md")),
                &report.to_markdown(),
            )?,
        }
    }
    Ok(())
}

fn cmd_predict(config: &RunConfig, prefix: &str, budget: u64) -> Result<(), CliError> {
    if prefix.is_empty() || !prefix.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::usage(format!(
            "prefix '{prefix}' must match [01]+"
        )));
    }
    let bits: Vec<u8> = prefix.bytes().map(|b| b - b'0').collect();
    let grammar = load_grammar(config.require_grammar()?)?;
    if !grammar.params().is_empty() {
        return Err(CliError::usage(
            "prediction needs a grammar of zero-argument programs",
        ));
    }
    println!("{:.6}", predict_next(&grammar, &bits, budget));
    Ok(())
}

fn cmd_enumerate(
    config: &RunConfig,
    min_probability: f64,
    limit: Option<usize>,
) -> Result<(), CliError> {
    if !(min_probability > 0.0 && min_probability < 1.0) {
        return Err(CliError::usage(format!(
            "min-probability {min_probability} must be in (0, 1)"
        )));
    }
    let grammar = load_grammar(config.require_grammar()?)?;
    let mut out = std::io::stdout().lock();
    let mut kraft = 0.0;
    for (program, p) in enumerate(&grammar, min_probability).take(limit.unwrap_or(usize::MAX)) {
        kraft += p;
        let _ = writeln!(out, "{}\t{program}", format_probability(p));
    }
    let _ = writeln!(out, "kraft\t{}", format_probability(kraft));
    Ok(())
}

/// Twelve significant digits.
fn format_probability(p: f64) -> String {
    format!("{p:.11e}")
}

fn cmd_report(path: &Path, format: ReportFormat) -> Result<(), CliError> {
    let report = TransferReport::load(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv()?,
        ReportFormat::Markdown => report.to_markdown(),
    };
    print!("{text}");
    Ok(())
}
