//! Run configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::lhv::builtin_vector_model;
use crate::locality::{ChshAngles, ProbabilityModel, QuantumModel, SignallingFixture};
use crate::qcore::AnalyzerAngle;

/// Which model generates the trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSelector {
    /// Born rule on Φ⁺.
    Qm,
    /// [`builtin_vector_model`].
    Lhv,
    /// [`SignallingFixture`] with the given bias.
    Fixture { bias: f64 },
}

impl ModelSelector {
    pub fn build(&self) -> Result<Box<dyn ProbabilityModel + Send>, HarnessError> {
        Ok(match *self {
            ModelSelector::Qm => Box::new(QuantumModel::phi_plus()),
            ModelSelector::Lhv => Box::new(builtin_vector_model()),
            ModelSelector::Fixture { bias } => Box::new(
                SignallingFixture::new(bias)
                    .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?,
            ),
        })
    }

    /// `qm`, `lhv`, `fixture` or `fixture:BIAS` (bias defaults to 0.1).
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        let bad = || {
            HarnessError::InvalidConfig(format!(
                "unknown model `{s}`; expected qm, lhv or fixture[:BIAS]"
            ))
        };
        match s.split_once(':') {
            None if s == "qm" => Ok(ModelSelector::Qm),
            None if s == "lhv" => Ok(ModelSelector::Lhv),
            None if s == "fixture" => Ok(ModelSelector::Fixture {
                bias: DEFAULT_FIXTURE_BIAS,
            }),
            Some(("fixture", bias)) => {
                let bias = bias.trim().parse().map_err(|_| bad())?;
                Ok(ModelSelector::Fixture { bias })
            }
            _ => Err(bad()),
        }
    }
}

pub const DEFAULT_FIXTURE_BIAS: f64 = 0.1;

/// Setting pairs to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Explicit `(a, b)` pairs in degrees.
    Pairs(Vec<(AnalyzerAngle, AnalyzerAngle)>),
    /// The four pairs of a CHSH experiment, in the order `(a,b), (a,b′), (a′,b), (a′,b′)`.
    Chsh(ChshAngles),
}

impl Schedule {
    pub fn pairs(&self) -> Vec<(AnalyzerAngle, AnalyzerAngle)> {
        match self {
            Schedule::Pairs(p) => p.clone(),
            Schedule::Chsh(angles) => angles.terms().iter().map(|&(a, b, _)| (a, b)).collect(),
        }
    }

    pub fn chsh_angles(&self) -> Option<ChshAngles> {
        match self {
            Schedule::Chsh(angles) => Some(*angles),
            Schedule::Pairs(_) => None,
        }
    }

    /// Distinct angles appearing on either wing, in order of first use.
    pub fn grid(&self) -> Vec<AnalyzerAngle> {
        let mut out: Vec<AnalyzerAngle> = Vec::new();
        for (a, b) in self.pairs() {
            for x in [a, b] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputPaths {
    /// Trial log as JSON lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_log: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSelector,
    pub schedule: Schedule,
    pub trials_per_pair: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Scenario whose outcome coordinates are stamped on each trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub output: OutputPaths,
}

pub const DEFAULT_SEED: u64 = 0x5EED;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl RunConfig {
    pub fn new(model: ModelSelector, schedule: Schedule, trials_per_pair: u64, seed: u64) -> Self {
        RunConfig {
            model,
            schedule,
            trials_per_pair,
            seed,
            scenario: None,
            output: OutputPaths::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials_per_pair == 0 {
            return Err(HarnessError::InvalidConfig(
                "trials_per_pair must be at least 1".into(),
            ));
        }
        if self.schedule.pairs().is_empty() {
            return Err(HarnessError::InvalidConfig(
                "schedule has no setting pairs".into(),
            ));
        }
        self.model.build().map(drop)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| HarnessError::io(path, source))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|source| HarnessError::json(path, source))?;
        config.validate()?;
        Ok(config)
    }
}
