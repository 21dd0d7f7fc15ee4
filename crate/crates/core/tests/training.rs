use std::path::PathBuf;

use levin_forge_core::grammar::Grammar;
use levin_forge_core::induction::{make_operator_test, Problem, ProblemKind};
use levin_forge_core::machine::{step_count, Expr, Fuel, Program, Value};
use levin_forge_core::search::{levin_search, rerun_for_alternatives, SearchConfig};
use levin_forge_core::transfer::{
    h_star, run_training, speedup_analysis, train, verify_record, TrainingPlan, TransferError,
};

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn seed() -> Grammar {
    Grammar::load(repo_file("grammars/operator-seed.json")).unwrap()
}

fn problem(name: &str) -> Problem {
    Problem::load(repo_file(&format!("problems/{name}.json"))).unwrap()
}

fn plan(names: &[&str], incremental: bool) -> TrainingPlan {
    let mut p = TrainingPlan::new(seed(), names.iter().map(|n| problem(n)).collect());
    p.incremental = incremental;
    p.idioms_enabled = incremental;
    p
}

#[test]
fn pow4_listing_passes_its_problem() {
    let p = problem("pow4");
    let test = make_operator_test(&p).unwrap();
    let listing = Program::parse(
        "(define (pow4 x) (define (sqr x) (* x x)) (sqr (sqr x)))",
        &["x"],
    )
    .unwrap();
    assert!(test(&listing, &mut Fuel::new(1_000)));
    assert!(!test(
        &Program::parse("(* x x)", &["x"]).unwrap(),
        &mut Fuel::new(1_000)
    ));
    assert!(!test(&listing, &mut Fuel::new(5)));
}

#[test]
fn square_is_found_with_its_probability_and_cost() {
    let g = seed();
    let p = problem("square");
    let r = levin_search(
        &g,
        &make_operator_test(&p).unwrap(),
        &SearchConfig::default(),
    )
    .unwrap();
    let s = r.solution.unwrap();
    assert_eq!(s.program.to_string(), "(* x x)");
    // P = 1/2 (P -> E) * (1/8)^3
    assert_eq!(s.probability, 1.0 / 1024.0);
    let t: u64 = [2, 3, 5]
        .iter()
        .map(|&x| step_count(&s.program, &[Value::int(x)], 100).unwrap())
        .sum();
    assert_eq!(s.steps, t);
    assert!(
        (h_star(s.probability).unwrap() + g.program_probability(&s.program).log2()).abs() < 1e-9
    );
}

#[test]
fn alternatives_extend_the_first_solution() {
    let g = seed();
    let p = problem("double");
    let test = make_operator_test(&p).unwrap();
    let cfg = SearchConfig::default();
    let first = levin_search(&g, &test, &cfg).unwrap();
    let same = rerun_for_alternatives(&g, &test, &cfg, 0).unwrap();
    assert_eq!(same.solution, first.solution);
    assert_eq!(same.total_steps_spent, first.total_steps_spent);
    let more = rerun_for_alternatives(&g, &test, &cfg, 7).unwrap();
    assert_eq!(more.solution, first.solution);
    assert!(more.alternatives.len() > same.alternatives.len());
    let texts: Vec<String> = more
        .alternatives
        .iter()
        .map(|(p, _)| p.to_string())
        .collect();
    for t in ["(* 2 x)", "(* x 2)", "(+ x x)"] {
        assert!(texts.contains(&t.to_string()), "{t} missing");
    }
    assert!(more.alternatives.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn baseline_training_equals_direct_search() {
    for name in ["add1", "square"] {
        let report = run_training(&plan(&[name], false)).unwrap();
        let direct = levin_search(
            &seed(),
            &make_operator_test(&problem(name)).unwrap(),
            &SearchConfig::default(),
        )
        .unwrap();
        let row = &report.problems[0];
        assert_eq!(row.search_steps, direct.total_steps_spent);
        let s = direct.solution.unwrap();
        assert_eq!(
            row.solution.as_deref(),
            Some(s.program.to_string().as_str())
        );
        assert_eq!(row.t_s, Some(s.steps));
        assert_eq!(row.update_steps, 0);
    }
}

#[test]
fn single_problem_plan_has_unit_speedup() {
    let inc = run_training(&plan(&["cube"], true)).unwrap();
    let base = run_training(&plan(&["cube"], false)).unwrap();
    let a = speedup_analysis(&inc, &base).unwrap();
    assert_eq!(a.rows[0].actual_speedup, Some(1.0));
    assert_eq!(a.total_speedup, 1.0);
    assert_eq!(a.rows[0].predicted_speedup, Some(1.0));
}

#[test]
fn mismatched_reports_are_rejected() {
    let a = run_training(&plan(&["add1"], false)).unwrap();
    let b = run_training(&plan(&["square"], false)).unwrap();
    assert!(matches!(
        speedup_analysis(&a, &b),
        Err(TransferError::MismatchedPlans(_))
    ));
}

#[test]
fn square_then_pow4_reuses_the_square_idiom() {
    // with a single earlier solution, an idiom needs support 1
    let mut p = plan(&["square", "pow4"], true);
    p.learning.min_support = 1;
    let t = train(&p).unwrap();
    let pow4 = &t.records[1];
    let idioms: Vec<String> = pow4
        .solution
        .idioms()
        .iter()
        .map(|e| e.to_string())
        .collect();
    assert!(idioms.contains(&"(* x x)".to_string()), "{}", pow4.solution);
    let row = t.report.problem("pow4").unwrap();
    assert!(row.cond_h_star.unwrap() < row.h_star.unwrap());
    assert!(row.mutual_bits.unwrap() > 0.0);
}

#[test]
fn benchmark_training_invariants() {
    let plan = TrainingPlan::load(repo_file("plans/benchmark.json")).unwrap();
    assert!(plan.incremental && plan.idioms_enabled);
    let t = train(&plan).unwrap();
    let r = &t.report;
    t.report.check_all_solved().unwrap();
    // accounting conservation
    let search: u64 = r.problems.iter().map(|p| p.search_steps).sum();
    let update: u64 = r.problems.iter().map(|p| p.update_steps).sum();
    assert_eq!(r.totals.engine_steps, search + update);
    for (row, record) in r.problems.iter().zip(&t.records) {
        assert!(row.h_star.unwrap() >= 0.0 && row.cond_h_star.unwrap() >= 0.0);
        assert_eq!(row.update_steps, record.update_steps);
        assert!(verify_record(record, &problem(&row.name)).unwrap());
        // the solution is at least as likely as under the seed grammar
        assert!(
            row.cond_h_star.unwrap() <= row.h_star.unwrap(),
            "{}",
            row.name
        );
    }
    let installed = r
        .problems
        .iter()
        .find(|p| !p.idioms_installed.is_empty())
        .unwrap();
    assert_eq!(installed.name, "cube");
    assert_eq!(installed.idioms_installed, ["(idiom (* x x))"]);
    // every learned grammar stays a proper prior
    for nt in t.grammar.nonterminals() {
        assert!((nt.probability_sum() - 1.0).abs() <= 1e-12);
    }
    // the idiom appears only as a closed leaf
    let pow4 = &t.records[4];
    assert!(pow4
        .solution
        .subexpressions()
        .iter()
        .any(|e| matches!(e, Expr::Idiom(_))));
}

#[test]
fn reports_are_reproducible_and_worker_independent() {
    let mut p = plan(&["add1", "square", "cube", "pow4"], true);
    let a = run_training(&p).unwrap();
    p.search.workers = 4;
    let b = run_training(&p).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    let back = levin_forge_core::transfer::TransferReport::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn unsolved_problems_are_marked_and_skipped() {
    let mut p = plan(&["square", "pow8", "add1"], true);
    p.search.max_phases = 8;
    let r = run_training(&p).unwrap();
    assert_eq!(r.totals.unsolved, ["pow8"]);
    let row = r.problem("pow8").unwrap();
    assert!(!row.solved && row.search_steps > 0 && row.update_steps == 0);
    assert!(r.problem("add1").unwrap().solved);
    assert!(matches!(r.check_all_solved(), Err(TransferError::ProblemUnsolved(n)) if n == "pow8"));
}

#[test]
fn plan_validation() {
    let mut p = plan(&["add1", "add1"], false);
    assert!(matches!(p.validate(), Err(TransferError::InvalidPlan(_))));
    p.problems.clear();
    assert!(p.validate().is_err());
    let seq = Problem::sequence("alt", "0101").unwrap();
    assert!(matches!(seq.kind, ProblemKind::Sequence { .. }));
    let mut q = plan(&["add1"], false);
    q.problems.push(seq);
    assert!(q.validate().is_err());
}
