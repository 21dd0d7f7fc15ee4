use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levin-forge"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_square_matches_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &[
            "--grammar",
            path(&repo("grammars/operator-seed.json")),
            "--out",
            path(&out),
            "solve",
            path(&repo("problems/square.json")),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(repo("crates/cli/tests/golden/solve_square.txt")).unwrap();
    assert_eq!(stdout(&o), golden);
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("square.solution.json")).unwrap())
            .unwrap();
    assert_eq!(record["solution"], "(* x x)");
    assert_eq!(record["format_version"], 1);
}

#[test]
fn solve_rejects_malformed_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"format_version": 1, "name": "x", "kind": "operator"}"#,
    )
    .unwrap();
    let g = repo("grammars/operator-seed.json");
    let o = run(&["--grammar", path(&g), "solve", path(&bad)], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("examples"), "{}", stderr(&o));
    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["--grammar", path(&g), "solve", path(&bad)], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["solve", path(&repo("problems/square.json"))], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grammar"));
}

#[test]
fn solve_exhaustion_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "--grammar",
            path(&repo("grammars/operator-seed.json")),
            "--max-phases",
            "4",
            "solve",
            path(&repo("problems/pow8.json")),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--no-such-flag"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&[], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    let g = repo("grammars/operator-seed.json");
    assert_eq!(
        run(
            &[
                "--grammar",
                path(&g),
                "--t0",
                "0",
                "solve",
                path(&repo("problems/square.json"))
            ],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn predict_prints_six_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let g = repo("grammars/sequence-seed.json");
    let o = run(
        &[
            "--grammar",
            path(&g),
            "predict",
            "0101",
            "--budget",
            "200000",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!(v < 0.5);
    assert_eq!(stdout(&o).trim().split('.').nth(1).unwrap().len(), 6);
    let o = run(
        &["--grammar", path(&g), "predict", "0101", "--budget", "0"],
        dir.path(),
    );
    assert_eq!(stdout(&o), "0.500000\n");
    let o = run(
        &["--grammar", path(&g), "predict", "2x", "--budget", "100"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_lists_and_sums() {
    let dir = tempfile::tempdir().unwrap();
    let g = repo("grammars/toy-arith.json");
    let o = run(
        &[
            "--grammar",
            path(&g),
            "enumerate",
            "--min-probability",
            "0.01",
            "--limit",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "kraft\t0.00000000000e0\n");
    let o = run(
        &[
            "--grammar",
            path(&g),
            "enumerate",
            "--min-probability",
            "0.0001",
        ],
        dir.path(),
    );
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let kraft: f64 = lines
        .last()
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(kraft <= 1.0);
    let probs: Vec<f64> = lines[..lines.len() - 1]
        .iter()
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]));
    for bad in ["0", "1", "-0.5", "1.5"] {
        let o = run(
            &["--grammar", path(&g), "enumerate", "--min-probability", bad],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(1), "{bad}");
    }
}

#[test]
fn train_writes_reports_and_validates_plans() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let problems: Vec<String> = ["add1", "square", "cube", "pow4"]
        .iter()
        .map(|n| repo(&format!("problems/{n}.json")).display().to_string())
        .collect();
    let write_plan = |names: &[String]| {
        let v = serde_json::json!({
            "format_version": 1,
            "grammar": repo("grammars/operator-seed.json"),
            "problems": names,
            "seed": 7
        });
        std::fs::write(&plan, v.to_string()).unwrap();
    };
    write_plan(&problems);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = run(
            &[
                "--incremental",
                "--idioms",
                "--compare-baseline",
                "--out",
                path(out),
                "train",
                path(&plan),
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv = std::fs::read(out_a.join("report.csv")).unwrap();
    assert_eq!(csv, std::fs::read(out_b.join("report.csv")).unwrap());
    for f in [
        "report.json",
        "baseline.json",
        "speedup.json",
        "speedup.csv",
        "grammar.json",
        "solutions.json",
    ] {
        assert!(out_a.join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["format_version"], 1);
    let header = String::from_utf8(csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "name,solved,P_s,H_star,t_s,cjs,search_steps,update_steps,cond_H_star,mutual_bits,actual_speedup,predicted_speedup"
    );

    // the report command re-renders the stored JSON
    let o = run(
        &[
            "report",
            path(&out_a.join("report.json")),
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).as_bytes(),
        std::fs::read(out_a.join("report.csv")).unwrap()
    );
    let o = run(&["report", path(&out_a.join("report.json"))], dir.path());
    assert!(stdout(&o).starts_with("# Training report"));

    write_plan(&[problems[0].clone(), problems[0].clone()]);
    let o = run(
        &["--out", path(&dir.path().join("c")), "train", path(&plan)],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("duplicate"));
}

#[test]
fn train_with_unsolved_problem_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let v = serde_json::json!({
        "format_version": 1,
        "grammar": repo("grammars/operator-seed.json"),
        "problems": [repo("problems/square.json"), repo("problems/pow8.json")],
        "max_phases": 6
    });
    std::fs::write(&plan, v.to_string()).unwrap();
    let o = run(
        &["--out", path(&dir.path().join("o")), "train", path(&plan)],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("o/report.csv")).unwrap();
    assert!(csv.contains("pow8,false"));
}

#[test]
fn config_file_is_merged_and_copied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let text = serde_json::json!({
        "format_version": 1,
        "grammar": repo("grammars/operator-seed.json"),
        "problem": repo("problems/add1.json"),
        "out": "from-config",
        "t0": 1
    })
    .to_string();
    std::fs::write(&cfg, &text).unwrap();
    let o = run(&["--config", path(&cfg), "solve"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("solution: (+ 1 x)"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("from-config/config.json")).unwrap(),
        text
    );
    // flags win over the file
    let o = run(
        &["--config", path(&cfg), "--out", "flag-out", "solve"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("flag-out/add1.solution.json").exists());
    std::fs::write(&cfg, r#"{"format_version": 1, "bogus": 1}"#).unwrap();
    assert_eq!(
        run(&["--config", path(&cfg), "solve"], dir.path())
            .status
            .code(),
        Some(1)
    );
}
