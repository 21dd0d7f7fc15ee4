//! Run configuration: an optional JSON file plus flag overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{CliError, GlobalArgs};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    format_version: u32,
    grammar: Option<String>,
    plan: Option<String>,
    problem: Option<String>,
    incremental: Option<bool>,
    idioms: Option<bool>,
    compare_baseline: Option<bool>,
    t0: Option<u64>,
    max_phases: Option<u32>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<String>,
    formats: Option<Vec<ReportFormat>>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grammar: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub problem: Option<PathBuf>,
    /// `None` leaves the plan's setting in place.
    pub incremental: Option<bool>,
    pub idioms: Option<bool>,
    pub compare_baseline: bool,
    pub t0: Option<u64>,
    pub max_phases: Option<u32>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub out: PathBuf,
    pub formats: Vec<ReportFormat>,
    /// Path and verbatim text of the config file, if one was given.
    pub source: Option<(PathBuf, String)>,
}

impl RunConfig {
    /// Merges the config file (if any) with flags; flags win. Paths in the
    /// config file are relative to the file.
    pub fn resolve(args: &GlobalArgs) -> Result<RunConfig, CliError> {
        let (file, source, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
                let file: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
                if file.format_version != FORMAT_VERSION {
                    return Err(CliError::usage(format!(
                        "config {}: unsupported format_version {}",
                        path.display(),
                        file.format_version
                    )));
                }
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, Some((path.clone(), text)), base)
            }
            None => (ConfigFile::default(), None, PathBuf::new()),
        };
        let rel = |p: Option<String>| p.map(|p| base.join(p));
        let flag = |set: bool, cfg: Option<bool>| if set { Some(true) } else { cfg };
        let workers = args.workers.or(file.workers).unwrap_or(1);
        if workers == 0 {
            return Err(CliError::usage("workers must be at least 1"));
        }
        Ok(RunConfig {
            grammar: args.grammar.clone().or(rel(file.grammar)),
            plan: rel(file.plan),
            problem: rel(file.problem),
            incremental: flag(args.incremental, file.incremental),
            idioms: flag(args.idioms, file.idioms),
            compare_baseline: args.compare_baseline || file.compare_baseline.unwrap_or(false),
            t0: args.t0.or(file.t0),
            max_phases: args.max_phases.or(file.max_phases),
            seed: args.seed.or(file.seed),
            workers,
            out: args
                .out
                .clone()
                .or(rel(file.out))
                .unwrap_or_else(|| PathBuf::from("out")),
            formats: file
                .formats
                .unwrap_or_else(|| vec![ReportFormat::Json, ReportFormat::Csv]),
            source,
        })
    }

    pub fn require_grammar(&self) -> Result<&Path, CliError> {
        self.grammar.as_deref().ok_or_else(|| {
            CliError::usage("no grammar given: pass --grammar or set \"grammar\" in the config")
        })
    }

    /// Creates the output directory and copies the config file into it.
    pub fn prepare_out(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out).map_err(|e| {
            CliError::usage(format!("output directory {}: {e}", self.out.display()))
        })?;
        if let Some((_, text)) = &self.source {
            crate::write(&self.out.join("config.json"), text)?;
        }
        Ok(())
    }
}
