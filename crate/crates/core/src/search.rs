//! Levin universal search.
//!
//! Phase `i` has total budget `T = t0 * 2^i`. Every program `c` the grammar
//! assigns `floor(T * P(c)) >= 1` steps is run under exactly that allotment;
//! the rest sit the phase out and re-enter once `T` is large enough. A phase
//! always runs to completion, so the step total is independent of evaluation
//! order. The accepted solution is the most probable passing candidate of
//! the first phase that has one, ties broken by canonical text.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grammar::{Choice, Derivation, Grammar};
use crate::machine::{Fuel, Program};

pub const DEFAULT_T0: u64 = 256;
pub const DEFAULT_MAX_PHASES: u32 = 40;
/// Phase budgets grow by this factor.
pub const DOUBLING_FACTOR: u64 = 2;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub t0: u64,
    pub max_phases: u32,
    pub keep_searching_after_first: bool,
    /// Evaluation threads per phase. Results do not depend on it.
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            t0: DEFAULT_T0,
            max_phases: DEFAULT_MAX_PHASES,
            keep_searching_after_first: false,
            workers: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.t0 < 1 {
            return Err(SearchError::InvalidConfig("t0 must be at least 1".into()));
        }
        if self.max_phases < 1 {
            return Err(SearchError::InvalidConfig(
                "max_phases must be at least 1".into(),
            ));
        }
        if self
            .t0
            .checked_shl(self.max_phases - 1)
            .is_none_or(|t| t >> (self.max_phases - 1) != self.t0)
        {
            return Err(SearchError::InvalidConfig(
                "t0 * 2^(max_phases - 1) overflows".into(),
            ));
        }
        Ok(())
    }

    pub fn phase_budget(&self, phase: u32) -> u64 {
        self.t0 << phase
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("no solution within {phases_run} phases ({total_steps_spent} steps spent)")]
    BudgetExhausted {
        total_steps_spent: u64,
        phases_run: u32,
    },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub program: Program,
    pub derivation: Derivation,
    /// P(s) under the searched grammar.
    pub probability: f64,
    /// t(s): steps the test consumed on the solution.
    pub steps: u64,
    /// Phase (0-based) in which it was accepted.
    pub phase: u32,
}

impl Solution {
    /// Conceptual jump size t(s) / P(s).
    pub fn cjs(&self) -> f64 {
        self.steps as f64 / self.probability
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub solution: Option<Solution>,
    pub total_steps_spent: u64,
    pub phases_run: u32,
    /// Candidates run, summed over phases.
    pub candidates_run: u64,
    /// Passing candidates collected when searching on past the first
    /// solution; most probable first, no duplicates.
    pub alternatives: Vec<(Program, f64)>,
}

/// Runs Levin search until the first successful phase (or `max_phases`).
///
/// `test` receives each candidate and its fuel account; every step it
/// charges counts towards the search total.
pub fn levin_search<T>(
    grammar: &Grammar,
    test: &T,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError>
where
    T: Fn(&Program, &mut Fuel) -> bool + Sync,
{
    run(grammar, test, config, 0)
}

/// Like [`levin_search`], but keeps going for `extra_phases` phases after the
/// first success and returns every passing candidate found on the way. The
/// accepted solution is still the one from the first successful phase.
pub fn rerun_for_alternatives<T>(
    grammar: &Grammar,
    test: &T,
    config: &SearchConfig,
    extra_phases: u32,
) -> Result<SearchResult, SearchError>
where
    T: Fn(&Program, &mut Fuel) -> bool + Sync,
{
    let config = SearchConfig {
        keep_searching_after_first: true,
        ..*config
    };
    run(grammar, test, &config, extra_phases)
}

struct Passing {
    program: Program,
    derivation: Derivation,
    probability: f64,
    text: String,
    steps: u64,
}

struct PhaseOutcome {
    steps: u64,
    candidates: u64,
    passing: Vec<Passing>,
}

fn run<T>(
    grammar: &Grammar,
    test: &T,
    config: &SearchConfig,
    extra_phases: u32,
) -> Result<SearchResult, SearchError>
where
    T: Fn(&Program, &mut Fuel) -> bool + Sync,
{
    config.validate()?;
    let pool = if config.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| SearchError::InvalidConfig(format!("worker pool: {e}")))?,
        )
    } else {
        None
    };
    let mut total = 0u64;
    let mut candidates = 0u64;
    let mut phases_run = 0u32;
    let mut solution: Option<Solution> = None;
    let mut alternatives: Vec<Passing> = Vec::new();
    let mut last_phase = config.max_phases;

    let mut phase = 0u32;
    while phase < last_phase {
        let Some(budget) = config
            .t0
            .checked_shl(phase)
            .filter(|b| b >> phase == config.t0)
        else {
            break;
        };
        let outcome = run_phase(grammar, test, budget, pool.as_ref());
        total += outcome.steps;
        candidates += outcome.candidates;
        phases_run += 1;
        log::debug!(
            "phase {phase}: budget {budget}, {} candidates, {} steps, {} passing",
            outcome.candidates,
            outcome.steps,
            outcome.passing.len()
        );
        if solution.is_none() {
            if let Some(best) = best_of(&outcome.passing) {
                solution = Some(Solution {
                    program: best.program.clone(),
                    derivation: best.derivation.clone(),
                    probability: best.probability,
                    steps: best.steps,
                    phase,
                });
                last_phase = phase.saturating_add(1).saturating_add(extra_phases);
            }
        }
        if config.keep_searching_after_first {
            for p in outcome.passing {
                if !alternatives.iter().any(|a| a.text == p.text) {
                    alternatives.push(p);
                }
            }
        }
        phase += 1;
    }

    if solution.is_none() {
        return Err(SearchError::BudgetExhausted {
            total_steps_spent: total,
            phases_run,
        });
    }
    alternatives.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.text.cmp(&b.text))
    });
    Ok(SearchResult {
        solution,
        total_steps_spent: total,
        phases_run,
        candidates_run: candidates,
        alternatives: alternatives
            .into_iter()
            .map(|p| (p.program, p.probability))
            .collect(),
    })
}

fn best_of(passing: &[Passing]) -> Option<&Passing> {
    passing.iter().min_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.text.cmp(&b.text))
    })
}

/// floor(budget * p), the steps a candidate of probability `p` receives.
pub fn allotment(budget: u64, p: f64) -> u64 {
    (budget as f64 * p).floor() as u64
}

fn run_phase<T>(
    grammar: &Grammar,
    test: &T,
    budget: u64,
    pool: Option<&rayon::ThreadPool>,
) -> PhaseOutcome
where
    T: Fn(&Program, &mut Fuel) -> bool + Sync,
{
    let mut outcome = PhaseOutcome {
        steps: 0,
        candidates: 0,
        passing: Vec::new(),
    };
    let mut chunk: Vec<(Vec<Choice>, f64)> = Vec::with_capacity(CHUNK);
    grammar.for_each_derivation(
        |p| allotment(budget, p) >= 1,
        |choices, p| {
            chunk.push((choices.to_vec(), p));
            if chunk.len() == CHUNK {
                evaluate_chunk(grammar, test, budget, pool, &mut chunk, &mut outcome);
            }
        },
    );
    evaluate_chunk(grammar, test, budget, pool, &mut chunk, &mut outcome);
    outcome
}

fn evaluate_chunk<T>(
    grammar: &Grammar,
    test: &T,
    budget: u64,
    pool: Option<&rayon::ThreadPool>,
    chunk: &mut Vec<(Vec<Choice>, f64)>,
    outcome: &mut PhaseOutcome,
) where
    T: Fn(&Program, &mut Fuel) -> bool + Sync,
{
    let run_one = |(choices, p): &(Vec<Choice>, f64)| -> (u64, Option<Passing>) {
        let program = match grammar.program_from_steps(choices) {
            Ok(program) => program,
            Err(e) => {
                log::debug!("skipping candidate: {e}");
                return (0, None);
            }
        };
        let mut fuel = Fuel::new(allotment(budget, *p));
        let ok = test(&program, &mut fuel);
        let steps = fuel.consumed();
        let passing = ok.then(|| Passing {
            text: program.to_string(),
            program,
            derivation: Derivation {
                steps: choices.clone(),
            },
            probability: *p,
            steps,
        });
        (steps, passing)
    };
    let results: Vec<(u64, Option<Passing>)> = match pool {
        Some(pool) => pool.install(|| chunk.par_iter().map(run_one).collect()),
        None => chunk.iter().map(run_one).collect(),
    };
    outcome.candidates += chunk.len() as u64;
    for (steps, passing) in results {
        outcome.steps += steps;
        outcome.passing.extend(passing);
    }
    chunk.clear();
}
