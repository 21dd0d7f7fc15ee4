use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TransferError;
use crate::grammar::{
    Grammar, DEFAULT_ALPHA, DEFAULT_IDIOM_MASS, DEFAULT_MAX_IDIOM_SIZE, DEFAULT_MIN_SUPPORT,
};
use crate::induction::Problem;
use crate::search::{SearchConfig, DEFAULT_MAX_PHASES, DEFAULT_T0};

pub const FORMAT_VERSION: u32 = 1;

/// Parameters of the grammar-learning step between problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    pub alpha: f64,
    pub idiom_mass: f64,
    pub min_support: usize,
    pub max_idiom_size: usize,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            alpha: DEFAULT_ALPHA,
            idiom_mass: DEFAULT_IDIOM_MASS,
            min_support: DEFAULT_MIN_SUPPORT,
            max_idiom_size: DEFAULT_MAX_IDIOM_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPlan {
    pub problems: Vec<Problem>,
    /// Update the grammar after each solved problem.
    pub incremental: bool,
    /// Mine and install idioms after each update. Needs `incremental`.
    pub idioms_enabled: bool,
    pub search: SearchConfig,
    pub learning: LearningConfig,
    pub grammar: Grammar,
    /// Grammar location as written in the plan, for reports.
    pub grammar_path: String,
    pub seed: u64,
}

/// On-disk plan. Paths are relative to the plan file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub format_version: u32,
    pub grammar: String,
    pub problems: Vec<String>,
    #[serde(default)]
    pub incremental: bool,
    #[serde(default)]
    pub idioms: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t0")]
    pub t0: u64,
    #[serde(default = "default_max_phases")]
    pub max_phases: u32,
    #[serde(default)]
    pub learning: LearningConfig,
}

fn default_t0() -> u64 {
    DEFAULT_T0
}

fn default_max_phases() -> u32 {
    DEFAULT_MAX_PHASES
}

impl TrainingPlan {
    /// A non-incremental plan with default search settings.
    pub fn new(grammar: Grammar, problems: Vec<Problem>) -> TrainingPlan {
        TrainingPlan {
            problems,
            incremental: false,
            idioms_enabled: false,
            search: SearchConfig::default(),
            learning: LearningConfig::default(),
            grammar,
            grammar_path: String::new(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TransferError> {
        if self.problems.is_empty() {
            return Err(TransferError::InvalidPlan("plan has no problems".into()));
        }
        let mut names = HashSet::new();
        for p in &self.problems {
            if !names.insert(p.name.as_str()) {
                return Err(TransferError::InvalidPlan(format!(
                    "duplicate problem name '{}'",
                    p.name
                )));
            }
            if p.arity() != self.grammar.params().len() {
                return Err(TransferError::InvalidPlan(format!(
                    "problem '{}' takes {} argument(s) but the grammar has {} parameter(s)",
                    p.name,
                    p.arity(),
                    self.grammar.params().len()
                )));
            }
        }
        self.search.validate()?;
        let l = &self.learning;
        if l.alpha.is_nan() || l.alpha <= 0.0 {
            return Err(TransferError::InvalidPlan(
                "learning.alpha must be positive".into(),
            ));
        }
        if !(l.idiom_mass > 0.0 && l.idiom_mass < 1.0) {
            return Err(TransferError::InvalidPlan(
                "learning.idiom_mass must be in (0, 1)".into(),
            ));
        }
        if l.min_support < 1 || l.max_idiom_size < 2 {
            return Err(TransferError::InvalidPlan(
                "learning.min_support must be >= 1 and learning.max_idiom_size >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainingPlan, TransferError> {
        let path = path.as_ref();
        let file: PlanFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        TrainingPlan::from_file(file, &base)
    }

    pub fn from_file(file: PlanFile, base: &Path) -> Result<TrainingPlan, TransferError> {
        if file.format_version != FORMAT_VERSION {
            return Err(TransferError::InvalidPlan(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        let resolve = |p: &str| -> PathBuf { base.join(p) };
        let grammar = Grammar::load(resolve(&file.grammar))?;
        let problems = file
            .problems
            .iter()
            .map(|p| {
                Problem::load(resolve(p))
                    .map_err(|e| TransferError::InvalidPlan(format!("{p}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let plan = TrainingPlan {
            problems,
            incremental: file.incremental,
            idioms_enabled: file.idioms,
            search: SearchConfig {
                t0: file.t0,
                max_phases: file.max_phases,
                ..SearchConfig::default()
            },
            learning: file.learning,
            grammar,
            grammar_path: file.grammar,
            seed: file.seed,
        };
        plan.validate()?;
        Ok(plan)
    }
}
