//! Incremental training over a sequence of problems, with entropy and
//! speedup accounting.
//!
//! Per problem `j`, with `G_j` the grammar in force when it is attempted:
//! - `cond_H_star` = -log2 P_{G_j}(s_j)
//! - `H_star` = -log2 P_seed(s_j), idioms expanded
//! - `mutual_bits` = `H_star - cond_H_star`, the information the earlier
//!   solutions carry about `s_j` as measured through the grammar updates
//! - `predicted_speedup` = 2^mutual_bits
//!
//! Recalling earlier solutions is not charged separately; its effect shows
//! up only through search steps.

mod entropy;
mod plan;
mod report;

pub use entropy::{entropy_identities, h_star, EntropyIdentities};
pub use plan::{LearningConfig, PlanFile, TrainingPlan, FORMAT_VERSION};
pub use report::{
    speedup_analysis, ProblemReport, SpeedupAnalysis, SpeedupRow, Totals, TransferReport,
    CSV_COLUMNS,
};

use thiserror::Error;

use crate::grammar::{
    install_idioms, mine_idioms_with_cost, update_from_solution, Grammar, GrammarError,
};
use crate::induction::{
    make_operator_test, make_sequence_test, InductionError, Problem, ProblemKind, SolutionRecord,
};
use crate::machine::{Fuel, Program};
use crate::search::{levin_search, SearchConfig, SearchError, SearchResult};

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("problem '{0}' was not solved")]
    ProblemUnsolved(String),
    #[error("reports cover different problems: {0}")]
    MismatchedPlans(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("report file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report file: {0}")]
    Csv(#[from] csv::Error),
    #[error("plan file: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct Training {
    pub report: TransferReport,
    pub records: Vec<SolutionRecord>,
    /// The grammar after the last update.
    pub grammar: Grammar,
}

/// Runs the plan and returns its report. Unsolved problems are marked in the
/// report; the remaining problems are still attempted.
pub fn run_training(plan: &TrainingPlan) -> Result<TransferReport, TransferError> {
    train(plan).map(|t| t.report)
}

/// Search a problem with the kind-appropriate test.
pub fn solve(
    grammar: &Grammar,
    problem: &Problem,
    config: &SearchConfig,
) -> Result<SearchResult, TransferError> {
    let result = match problem.kind {
        ProblemKind::Operator { .. } => {
            levin_search(grammar, &make_operator_test(problem)?, config)
        }
        ProblemKind::Sequence { .. } => {
            levin_search(grammar, &make_sequence_test(problem)?, config)
        }
    };
    Ok(result?)
}

/// [`run_training`] plus the solution records and the final grammar.
pub fn train(plan: &TrainingPlan) -> Result<Training, TransferError> {
    plan.validate()?;
    let seed_grammar = plan.grammar.with_depth_cap(u32::MAX);
    let mut grammar = plan.grammar.clone();
    let mut records: Vec<SolutionRecord> = Vec::new();
    let mut rows = Vec::with_capacity(plan.problems.len());
    let learn = plan.incremental;
    let mine = plan.incremental && plan.idioms_enabled;

    for problem in &plan.problems {
        log::info!("solving {}", problem.name);
        let outcome = solve(&grammar, problem, &plan.search);
        let (result, search_steps) = match outcome {
            Ok(r) => {
                let steps = r.total_steps_spent;
                (r, steps)
            }
            Err(TransferError::Search(SearchError::BudgetExhausted {
                total_steps_spent,
                phases_run,
            })) => {
                log::warn!("{} unsolved after {phases_run} phases", problem.name);
                rows.push(ProblemReport::unsolved(
                    &problem.name,
                    total_steps_spent,
                    phases_run,
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        let found = result.solution.expect("successful search has a solution");
        let seed_p = seed_grammar.program_probability(&found.program.expand_idioms());
        let p_s = found.probability;
        let h = h_star(seed_p)?;
        let cond = h_star(p_s)?;
        let idioms_used = idiom_texts(&found.program);

        let mut update_steps = 0u64;
        let mut idioms_installed = Vec::new();
        let mut record = SolutionRecord {
            problem: problem.name.clone(),
            solution: found.program.clone(),
            derivation: found.derivation.clone(),
            probability: p_s,
            steps: found.steps,
            cjs: found.cjs(),
            search_total_steps: search_steps,
            update_steps: 0,
        };
        if learn {
            let (next, cost) =
                update_from_solution(&grammar, &found.derivation, plan.learning.alpha)?;
            grammar = next;
            update_steps += cost;
            if mine {
                let mut all: Vec<SolutionRecord> = records.clone();
                all.push(record.clone());
                let (candidates, visited) = mine_idioms_with_cost(
                    &all,
                    plan.learning.min_support,
                    plan.learning.max_idiom_size,
                );
                update_steps += visited;
                let installed = installed_idioms(&grammar);
                let fresh: Vec<_> = candidates
                    .into_iter()
                    .filter(|c| !installed.contains(&format!("(idiom {})", c.text)))
                    .collect();
                let before = installed.len();
                let (next, touched) = install_idioms(&grammar, &fresh, plan.learning.idiom_mass)?;
                grammar = next;
                update_steps += touched;
                idioms_installed = installed_idioms(&grammar)[before..].to_vec();
            }
        }
        record.update_steps = update_steps;
        rows.push(ProblemReport {
            name: problem.name.clone(),
            solved: true,
            solution: Some(found.program.to_string()),
            p_s: Some(p_s),
            h_star: Some(h),
            t_s: Some(found.steps),
            cjs: Some(found.cjs()),
            search_steps,
            update_steps,
            cond_h_star: Some(cond),
            mutual_bits: Some(h - cond),
            actual_speedup: None,
            predicted_speedup: Some((h - cond).exp2()),
            phases_run: result.phases_run,
            idioms_used,
            idioms_installed,
        });
        records.push(record);
    }

    let report = TransferReport::new(plan, rows);
    Ok(Training {
        report,
        records,
        grammar,
    })
}

/// Texts of installed idiom productions, in grammar order.
fn installed_idioms(grammar: &Grammar) -> Vec<String> {
    grammar
        .idiom_choices()
        .into_iter()
        .map(|c| grammar.template_text(&grammar.production(c).template))
        .collect()
}

fn idiom_texts(program: &Program) -> Vec<String> {
    let mut v: Vec<String> = program
        .idioms()
        .iter()
        .map(|e| format!("(idiom {e})"))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Replays a record against its problem; every example must pass.
pub fn verify_record(record: &SolutionRecord, problem: &Problem) -> Result<bool, TransferError> {
    let mut fuel = Fuel::new(u64::MAX);
    Ok(match problem.kind {
        ProblemKind::Operator { .. } => make_operator_test(problem)?(&record.solution, &mut fuel),
        ProblemKind::Sequence { .. } => make_sequence_test(problem)?(&record.solution, &mut fuel),
    })
}
