//! Plan parsing and execution behind the `percolab` binary.

pub mod plan;
mod run;

use std::path::{Path, PathBuf};

pub use plan::ExperimentPlan;
pub use run::{run_plan, RunReport, Status};

/// Failures, each with its own exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("invalid plan: {0}")]
    Validation(String),
    #[error("refused: {0}")]
    Cap(String),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Runtime(_) => 1,
            RunError::Validation(_) => 3,
            RunError::Cap(_) => 4,
        }
    }

    fn context(self, what: &str) -> Self {
        match self {
            RunError::Validation(m) => RunError::Validation(format!("{what}: {m}")),
            RunError::Cap(m) => RunError::Cap(format!("{what}: {m}")),
            RunError::Runtime(m) => RunError::Runtime(format!("{what}: {m}")),
        }
    }
}

impl From<percolab::Error> for RunError {
    fn from(err: percolab::Error) -> Self {
        match err {
            percolab::Error::EnumerationCap { .. } => RunError::Cap(err.to_string()),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(err: std::io::Error) -> Self {
        RunError::Runtime(err.to_string())
    }
}

/// Command-line overrides applied on top of every plan.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Plan files under `path`: the file itself, or the `*.plan` files of a
/// directory in file-name order.
pub fn collect_plans(path: &Path) -> Result<Vec<PathBuf>, RunError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "plan"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(RunError::Validation(format!("no .plan files in {}", path.display())));
    }
    Ok(files)
}

/// Loads and validates every plan before any of them runs.
pub fn load_plans(path: &Path, overrides: Overrides) -> Result<Vec<ExperimentPlan>, RunError> {
    let mut plans = Vec::new();
    for file in collect_plans(path)? {
        let mut plan = ExperimentPlan::from_file(&file)?;
        if let Some(seed) = overrides.seed {
            plan.seed = seed;
        }
        if let Some(workers) = overrides.workers {
            if workers == 0 {
                return Err(RunError::Validation("workers must be at least 1".into()));
            }
            plan.workers = workers;
        }
        if plans.iter().any(|p: &ExperimentPlan| p.name == plan.name) {
            return Err(RunError::Validation(format!(
                "{}: output name {:?} is used twice",
                file.display(),
                plan.name
            )));
        }
        plans.push(plan);
    }
    Ok(plans)
}

/// Runs a plan file or directory. Returns the per-plan outcomes and the
/// process exit code: errors outrank violations, violations outrank noise.
pub fn run_path(path: &Path, out: &Path, overrides: Overrides) -> (Vec<Result<RunReport, RunError>>, i32) {
    let plans = match load_plans(path, overrides) {
        Ok(plans) => plans,
        Err(e) => {
            let code = e.exit_code();
            return (vec![Err(e)], code);
        }
    };
    let outcomes: Vec<_> = plans.iter().map(|plan| run_plan(plan, out)).collect();
    let code = exit_code(&outcomes);
    (outcomes, code)
}

pub fn exit_code(outcomes: &[Result<RunReport, RunError>]) -> i32 {
    let rank = |code: i32| match code {
        1 => 5,
        4 => 4,
        3 => 3,
        2 => 2,
        5 => 1,
        _ => 0,
    };
    outcomes
        .iter()
        .map(|o| match o {
            Ok(r) => r.status.exit_code(),
            Err(e) => e.exit_code(),
        })
        .max_by_key(|&c| rank(c))
        .unwrap_or(0)
}
