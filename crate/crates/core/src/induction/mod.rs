//! Induction problems, solution records and sequence prediction.

mod predict;
mod problem;

pub use predict::{alp_lower_bound, predict_next, SEQUENCE_FUEL_PER_BIT};
pub use problem::{Example, Problem, ProblemKind, FORMAT_VERSION};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::grammar::Derivation;
use crate::machine::{evaluate_int, force_bits, Fuel, Program};

#[derive(Debug, Error)]
pub enum InductionError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("problem '{name}' is a {actual} problem, expected {expected}")]
    WrongKind {
        name: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("problem file: {0}")]
    Io(#[from] std::io::Error),
}

/// A solved problem, as kept by the training driver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub problem: String,
    pub solution: Program,
    pub derivation: Derivation,
    /// P(s) under the grammar the problem was solved with.
    pub probability: f64,
    /// t(s).
    pub steps: u64,
    pub cjs: f64,
    pub search_total_steps: u64,
    /// Steps spent updating the grammar after this solution.
    pub update_steps: u64,
}

#[derive(Serialize, Deserialize)]
struct SolutionRecordFile {
    #[serde(default = "format_version")]
    format_version: u32,
    problem: String,
    solution: String,
    params: Vec<String>,
    derivation: Derivation,
    probability: f64,
    steps: u64,
    cjs: f64,
    search_total_steps: u64,
    update_steps: u64,
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

impl Serialize for SolutionRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SolutionRecordFile {
            format_version: FORMAT_VERSION,
            problem: self.problem.clone(),
            solution: self.solution.to_string(),
            params: self.solution.params().to_vec(),
            derivation: self.derivation.clone(),
            probability: self.probability,
            steps: self.steps,
            cjs: self.cjs,
            search_total_steps: self.search_total_steps,
            update_steps: self.update_steps,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolutionRecord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = SolutionRecordFile::deserialize(d)?;
        if f.format_version != FORMAT_VERSION {
            return Err(serde::de::Error::custom(format!(
                "unsupported format_version {}",
                f.format_version
            )));
        }
        let params: Vec<&str> = f.params.iter().map(String::as_str).collect();
        let solution = Program::parse(&f.solution, &params).map_err(serde::de::Error::custom)?;
        Ok(SolutionRecord {
            problem: f.problem,
            solution,
            derivation: f.derivation,
            probability: f.probability,
            steps: f.steps,
            cjs: f.cjs,
            search_total_steps: f.search_total_steps,
            update_steps: f.update_steps,
        })
    }
}

/// A search test: the candidate must reproduce every example exactly. All
/// examples share the candidate's fuel account.
pub fn make_operator_test(
    problem: &Problem,
) -> Result<impl Fn(&Program, &mut Fuel) -> bool + Sync + Send + '_, InductionError> {
    let ProblemKind::Operator { examples } = &problem.kind else {
        return Err(problem.wrong_kind("operator"));
    };
    Ok(move |program: &Program, fuel: &mut Fuel| {
        examples.iter().all(|ex| {
            program.arity() == ex.inputs.len()
                && matches!(evaluate_int(program, &ex.inputs, fuel), Ok(v) if v == ex.output)
        })
    })
}

/// A search test: the candidate's output stream must start with the prefix,
/// forced under the candidate's fuel account.
pub fn make_sequence_test(
    problem: &Problem,
) -> Result<impl Fn(&Program, &mut Fuel) -> bool + Sync + Send + '_, InductionError> {
    let ProblemKind::Sequence { prefix } = &problem.kind else {
        return Err(problem.wrong_kind("sequence"));
    };
    Ok(move |program: &Program, fuel: &mut Fuel| {
        let (bits, _) = force_bits(program, prefix.len(), fuel);
        bits == *prefix
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;

    fn square() -> Problem {
        Problem::from_json(
            r#"{"format_version":1,"name":"square","kind":"operator",
                "examples":[{"in":[2],"out":4},{"in":[3],"out":9},{"in":[5],"out":25}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn operator_test_accepts_exact_matches_only() {
        let p = square();
        let test = make_operator_test(&p).unwrap();
        let ok = Program::parse("(* x x)", &["x"]).unwrap();
        let bad = Program::parse("(+ x x)", &["x"]).unwrap();
        let mut fuel = Fuel::new(100);
        assert!(test(&ok, &mut fuel));
        assert_eq!(fuel.consumed(), 9);
        assert!(!test(&bad, &mut Fuel::new(100)));
        // not enough fuel for all three examples
        assert!(!test(&ok, &mut Fuel::new(8)));
        assert!(make_sequence_test(&p).is_err());
    }

    #[test]
    fn sequence_test_uses_one_account() {
        let p = Problem::from_json(
            r#"{"format_version":1,"name":"alt","kind":"sequence","prefix":"0101"}"#,
        )
        .unwrap();
        let test = make_sequence_test(&p).unwrap();
        let alt = Program::parse("(define (f) (cons-bit 0 (cons-bit 1 (f))))", &[]).unwrap();
        let mut fuel = Fuel::new(1000);
        assert!(test(&alt, &mut fuel));
        let used = fuel.consumed();
        assert!(!test(&alt, &mut Fuel::new(used - 1)));
        let zeros = Program::parse("(define (f) (cons-bit 0 (f)))", &[]).unwrap();
        assert!(!test(&zeros, &mut Fuel::new(1000)));
    }

    #[test]
    fn record_round_trips_through_json() {
        let g = Grammar::uniform("E", &["x"], 6, None, &[("E", &["x", "(* <E> <E>)"])]).unwrap();
        let program = Program::parse("(* x x)", &["x"]).unwrap();
        let derivation = g.derive(&program).unwrap();
        let r = SolutionRecord {
            problem: "square".into(),
            probability: g.derivation_probability(&derivation),
            solution: program,
            derivation,
            steps: 9,
            cjs: 72.0,
            search_total_steps: 100,
            update_steps: 5,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains(r#""solution":"(* x x)""#));
        let back: SolutionRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
