//! Report types and their JSON, CSV and markdown renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TrainingPlan, TransferError, FORMAT_VERSION};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "name",
    "solved",
    "P_s",
    "H_star",
    "t_s",
    "cjs",
    "search_steps",
    "update_steps",
    "cond_H_star",
    "mutual_bits",
    "actual_speedup",
    "predicted_speedup",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub name: String,
    pub solved: bool,
    pub solution: Option<String>,
    /// P(s) under the grammar the problem was searched with.
    #[serde(rename = "P_s")]
    pub p_s: Option<f64>,
    /// -log2 P(s) under the seed grammar.
    #[serde(rename = "H_star")]
    pub h_star: Option<f64>,
    pub t_s: Option<u64>,
    pub cjs: Option<f64>,
    pub search_steps: u64,
    pub update_steps: u64,
    /// -log2 P(s) under the grammar the problem was searched with.
    #[serde(rename = "cond_H_star")]
    pub cond_h_star: Option<f64>,
    /// `H_star - cond_H_star`.
    pub mutual_bits: Option<f64>,
    /// Baseline search steps over these search steps; set by a comparison.
    pub actual_speedup: Option<f64>,
    pub predicted_speedup: Option<f64>,
    pub phases_run: u32,
    pub idioms_used: Vec<String>,
    /// Idiom productions added after this problem.
    pub idioms_installed: Vec<String>,
}

impl ProblemReport {
    pub(crate) fn unsolved(name: &str, search_steps: u64, phases_run: u32) -> Self {
        ProblemReport {
            name: name.to_string(),
            solved: false,
            solution: None,
            p_s: None,
            h_star: None,
            t_s: None,
            cjs: None,
            search_steps,
            update_steps: 0,
            cond_h_star: None,
            mutual_bits: None,
            actual_speedup: None,
            predicted_speedup: None,
            phases_run,
            idioms_used: Vec::new(),
            idioms_installed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub solved: usize,
    pub unsolved: Vec<String>,
    pub search_steps: u64,
    pub update_steps: u64,
    /// `search_steps + update_steps`.
    pub engine_steps: u64,
    pub actual_speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub format_version: u32,
    pub seed: u64,
    pub grammar: String,
    pub incremental: bool,
    pub idioms_enabled: bool,
    pub t0: u64,
    pub max_phases: u32,
    pub problems: Vec<ProblemReport>,
    pub totals: Totals,
}

impl TransferReport {
    pub(crate) fn new(plan: &TrainingPlan, problems: Vec<ProblemReport>) -> Self {
        let search_steps = problems.iter().map(|p| p.search_steps).sum();
        let update_steps = problems.iter().map(|p| p.update_steps).sum();
        TransferReport {
            format_version: FORMAT_VERSION,
            seed: plan.seed,
            grammar: plan.grammar_path.clone(),
            incremental: plan.incremental,
            idioms_enabled: plan.incremental && plan.idioms_enabled,
            t0: plan.search.t0,
            max_phases: plan.search.max_phases,
            totals: Totals {
                solved: problems.iter().filter(|p| p.solved).count(),
                unsolved: problems
                    .iter()
                    .filter(|p| !p.solved)
                    .map(|p| p.name.clone())
                    .collect(),
                search_steps,
                update_steps,
                engine_steps: search_steps + update_steps,
                actual_speedup: None,
            },
            problems,
        }
    }

    pub fn problem(&self, name: &str) -> Option<&ProblemReport> {
        self.problems.iter().find(|p| p.name == name)
    }

    /// `Err(ProblemUnsolved)` naming the first unsolved problem.
    pub fn check_all_solved(&self) -> Result<(), TransferError> {
        match self.totals.unsolved.first() {
            Some(name) => Err(TransferError::ProblemUnsolved(name.clone())),
            None => Ok(()),
        }
    }

    /// Copies the measured ratios of a comparison into this report.
    pub fn with_speedups(mut self, analysis: &SpeedupAnalysis) -> Self {
        for (p, row) in self.problems.iter_mut().zip(&analysis.rows) {
            p.actual_speedup = row.actual_speedup;
        }
        self.totals.actual_speedup = Some(analysis.total_speedup);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<TransferReport, TransferError> {
        let r: TransferReport = serde_json::from_str(text)?;
        if r.format_version != FORMAT_VERSION {
            return Err(TransferError::InvalidPlan(format!(
                "unsupported report format_version {}",
                r.format_version
            )));
        }
        Ok(r)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TransferReport, TransferError> {
        TransferReport::from_json(&std::fs::read_to_string(path)?)
    }

    /// One row per problem, columns as in [`CSV_COLUMNS`]. Missing values
    /// are empty cells.
    pub fn to_csv(&self) -> Result<String, TransferError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for p in &self.problems {
            w.write_record([
                p.name.clone(),
                p.solved.to_string(),
                opt(p.p_s),
                opt(p.h_star),
                opt(p.t_s),
                opt(p.cjs),
                p.search_steps.to_string(),
                p.update_steps.to_string(),
                opt(p.cond_h_star),
                opt(p.mutual_bits),
                opt(p.actual_speedup),
                opt(p.predicted_speedup),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let mode = match (self.incremental, self.idioms_enabled) {
            (false, _) => "baseline",
            (true, false) => "incremental",
            (true, true) => "incremental + idioms",
        };
        let _ = writeln!(s, "# Training report ({mode}, seed {})\n", self.seed);
        let _ = writeln!(s, "| {} | solution |", CSV_COLUMNS.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(CSV_COLUMNS.len() + 1));
        for p in &self.problems {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | `{}` |",
                p.name,
                p.solved,
                fmt_f(p.p_s),
                fmt_f(p.h_star),
                opt(p.t_s),
                fmt_f(p.cjs),
                p.search_steps,
                p.update_steps,
                fmt_f(p.cond_h_star),
                fmt_f(p.mutual_bits),
                fmt_f(p.actual_speedup),
                fmt_f(p.predicted_speedup),
                p.solution.as_deref().unwrap_or("-"),
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            s,
            "\nSolved {}/{}. Search steps {}, update steps {}, engine steps {}.",
            t.solved,
            self.problems.len(),
            t.search_steps,
            t.update_steps,
            t.engine_steps
        );
        if let Some(r) = t.actual_speedup {
            let _ = writeln!(s, "Total speedup over baseline: {r:.3}.");
        }
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn fmt_f(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub name: String,
    pub baseline_steps: u64,
    pub incremental_steps: u64,
    /// `None` if either run left the problem unsolved.
    pub actual_speedup: Option<f64>,
    pub mutual_bits: Option<f64>,
    pub predicted_speedup: Option<f64>,
    /// t(s) 2^(H*(s)+1) (1 - 2^-mutual) - t_u, with t_u the update cost
    /// charged after the preceding problem.
    pub net_savings: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupAnalysis {
    pub format_version: u32,
    pub rows: Vec<SpeedupRow>,
    pub baseline_total: u64,
    pub incremental_total: u64,
    pub total_speedup: f64,
}

/// Compares an incremental run against a baseline run of the same problems.
pub fn speedup_analysis(
    incremental: &TransferReport,
    baseline: &TransferReport,
) -> Result<SpeedupAnalysis, TransferError> {
    let names = |r: &TransferReport| {
        r.problems
            .iter()
            .map(|p| p.name.clone())
            .collect::<Vec<_>>()
    };
    if names(incremental) != names(baseline) {
        return Err(TransferError::MismatchedPlans(format!(
            "[{}] vs [{}]",
            names(incremental).join(", "),
            names(baseline).join(", ")
        )));
    }
    let mut rows = Vec::new();
    let mut prev_update = 0u64;
    for (inc, base) in incremental.problems.iter().zip(&baseline.problems) {
        let actual = (inc.solved && base.solved)
            .then(|| base.search_steps as f64 / inc.search_steps.max(1) as f64);
        let net = match (inc.t_s, inc.h_star, inc.mutual_bits) {
            (Some(t), Some(h), Some(m)) => {
                Some(t as f64 * (h + 1.0).exp2() * (1.0 - (-m).exp2()) - prev_update as f64)
            }
            _ => None,
        };
        rows.push(SpeedupRow {
            name: inc.name.clone(),
            baseline_steps: base.search_steps,
            incremental_steps: inc.search_steps,
            actual_speedup: actual,
            mutual_bits: inc.mutual_bits,
            predicted_speedup: inc.predicted_speedup,
            net_savings: net,
        });
        prev_update = inc.update_steps;
    }
    let baseline_total = baseline.totals.search_steps;
    let incremental_total = incremental.totals.search_steps;
    Ok(SpeedupAnalysis {
        format_version: FORMAT_VERSION,
        rows,
        baseline_total,
        incremental_total,
        total_speedup: baseline_total as f64 / incremental_total.max(1) as f64,
    })
}

impl SpeedupAnalysis {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("analysis serializes") + "\n"
    }

    pub fn to_csv(&self) -> Result<String, TransferError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "name",
            "baseline_steps",
            "incremental_steps",
            "actual_speedup",
            "mutual_bits",
            "predicted_speedup",
            "net_savings",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                r.baseline_steps.to_string(),
                r.incremental_steps.to_string(),
                opt(r.actual_speedup),
                opt(r.mutual_bits),
                opt(r.predicted_speedup),
                opt(r.net_savings),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| name | baseline steps | incremental steps | actual | mutual bits | predicted | net savings |\n|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} |",
                r.name,
                r.baseline_steps,
                r.incremental_steps,
                fmt_f(r.actual_speedup),
                fmt_f(r.mutual_bits),
                fmt_f(r.predicted_speedup),
                fmt_f(r.net_savings)
            );
        }
        let _ = writeln!(
            s,
            "| total | {} | {} | {:.4} | | | |",
            self.baseline_total, self.incremental_total, self.total_speedup
        );
        s
    }
}
