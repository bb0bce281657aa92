//! Monte Carlo trial runner, empirical statistics and report emission.

pub mod config;
pub mod report;
pub mod stats;
pub mod trials;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ModelSelector, OutputPaths, ReportFormat, RunConfig, Schedule};
pub use report::{emit_report, render_csv, render_json, CSV_COLUMNS};
pub use stats::{
    empirical_statistics, ChshEstimate, PairStatistics, ReportBundle, SignallingDelta,
};
pub use trials::{run_trials, TrialLog, TrialRecord};

use crate::locality::LocalityError;
use crate::spacetime::Scenario;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[source] csv::Error),
    #[error(transparent)]
    Locality(#[from] LocalityError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn json(path: &Path, source: serde_json::Error) -> Self {
        HarnessError::Json {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

/// Runs a configuration end to end and writes whichever outputs it names.
pub fn simulate(config: &RunConfig) -> Result<(TrialLog, ReportBundle), HarnessError> {
    let scenario = config.scenario.as_deref().map(load_scenario).transpose()?;
    let log = run_trials(config, scenario.as_ref())?;
    let bundle = empirical_statistics(&log)?;
    if let Some(path) = &config.output.trial_log {
        log.write_jsonl(path)?;
    }
    if let Some(path) = &config.output.report {
        emit_report(&bundle, config.output.format, path)?;
    }
    Ok((log, bundle))
}
