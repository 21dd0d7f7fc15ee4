//! Frequent-subprogram mining over solved programs.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::induction::SolutionRecord;
use crate::machine::{Expr, Program};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdiomCandidate {
    #[serde(skip)]
    pub fragment: Expr,
    pub text: String,
    /// Number of distinct solutions containing the fragment.
    pub support: usize,
    pub size: usize,
    /// Problems whose solutions contain the fragment, sorted.
    pub sources: Vec<String>,
}

impl IdiomCandidate {
    pub fn new(fragment: Expr, support: usize, sources: Vec<String>) -> Self {
        IdiomCandidate {
            text: fragment.to_string(),
            size: fragment.size(),
            fragment,
            support,
            sources,
        }
    }
}

/// All closed subexpressions of `2..=max_size` nodes occurring in at least
/// `min_support` distinct solutions, ordered by support then size
/// (descending), then text. "Closed" means every free variable is one of the
/// solution's parameters. Idiom nodes already in a solution count as single
/// leaves and are not searched inside.
pub fn mine_idioms(
    solutions: &[SolutionRecord],
    min_support: usize,
    max_size: usize,
) -> Vec<IdiomCandidate> {
    mine_idioms_with_cost(solutions, min_support, max_size).0
}

/// [`mine_idioms`] plus the number of subexpressions visited.
pub fn mine_idioms_with_cost(
    solutions: &[SolutionRecord],
    min_support: usize,
    max_size: usize,
) -> (Vec<IdiomCandidate>, u64) {
    let programs: Vec<(&str, &Program)> = solutions
        .iter()
        .map(|s| (s.problem.as_str(), &s.solution))
        .collect();
    mine_programs(&programs, min_support, max_size)
}

pub(crate) fn mine_programs(
    programs: &[(&str, &Program)],
    min_support: usize,
    max_size: usize,
) -> (Vec<IdiomCandidate>, u64) {
    let min_support = min_support.max(1);
    let mut visited = 0u64;
    let mut table: BTreeMap<String, (Expr, BTreeSet<String>)> = BTreeMap::new();
    for (name, program) in programs {
        let params: BTreeSet<&str> = program.params().iter().map(String::as_str).collect();
        for e in program.subexpressions() {
            visited += 1;
            let size = e.size();
            if size < 2 || size > max_size {
                continue;
            }
            if !e.free_vars().iter().all(|v| params.contains(v.as_str())) {
                continue;
            }
            table
                .entry(e.to_string())
                .or_insert_with(|| (e.clone(), BTreeSet::new()))
                .1
                .insert(name.to_string());
        }
    }
    let mut out: Vec<IdiomCandidate> = table
        .into_values()
        .filter(|(_, sources)| sources.len() >= min_support)
        .map(|(e, sources)| IdiomCandidate::new(e, sources.len(), sources.into_iter().collect()))
        .collect();
    out.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.size.cmp(&a.size))
            .then_with(|| a.text.cmp(&b.text))
    });
    (out, visited)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mine(srcs: &[(&str, &str)], min_support: usize, max_size: usize) -> Vec<IdiomCandidate> {
        let programs: Vec<(&str, Program)> = srcs
            .iter()
            .map(|(n, s)| (*n, Program::parse(s, &["x"]).unwrap()))
            .collect();
        let refs: Vec<(&str, &Program)> = programs.iter().map(|(n, p)| (*n, p)).collect();
        mine_programs(&refs, min_support, max_size).0
    }

    #[test]
    fn square_shared_by_square_and_pow4() {
        let got = mine(
            &[
                ("square", "(* x x)"),
                (
                    "pow4",
                    "(define (pow4 x) (define (sqr x) (* x x)) (sqr (sqr x)))",
                ),
            ],
            2,
            7,
        );
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].text, "(* x x)");
        assert_eq!(got[0].support, 2);
        assert_eq!(got[0].sources, ["pow4", "square"]);
    }

    #[test]
    fn single_solution_has_no_support() {
        assert!(mine(&[("square", "(* x x)")], 2, 7).is_empty());
    }

    #[test]
    fn disjoint_solutions_share_nothing() {
        assert!(mine(&[("a", "(+ x 1)"), ("b", "(* x 2)")], 2, 7).is_empty());
    }

    #[test]
    fn ordering_and_size_bounds() {
        let got = mine(
            &[
                ("a", "(* (+ x 1) (+ x 1))"),
                ("b", "(- (* (+ x 1) (+ x 1)) 2)"),
                ("c", "(+ x 1)"),
            ],
            2,
            7,
        );
        let texts: Vec<&str> = got.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["(+ x 1)", "(* (+ x 1) (+ x 1))"]);
        assert_eq!((got[0].support, got[0].size), (3, 3));
        assert_eq!((got[1].support, got[1].size), (2, 7));
        let small = mine(
            &[("a", "(* (+ x 1) (+ x 1))"), ("b", "(* (+ x 1) (+ x 1))")],
            2,
            6,
        );
        assert!(small.iter().all(|c| c.size <= 6));
    }

    #[test]
    fn open_fragments_are_excluded() {
        // (sqr x) mentions the local function name
        let got = mine(
            &[
                ("a", "(define (f x) (define (sqr x) (* x x)) (sqr (sqr x)))"),
                ("b", "(define (f x) (define (sqr x) (* x x)) (sqr x))"),
            ],
            2,
            7,
        );
        let texts: Vec<&str> = got.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["(* x x)"]);
    }
}
