//! Seeded trial generation.
//!
//! Trial `t` of pair `k` reads ChaCha8 stream `k` at words `4t..4t+4`: one
//! `u64` picks λ and the next picks the outcomes. Any chunking of the trials
//! therefore reproduces the same log.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::HarnessError;
use crate::qcore::{AnalyzerAngle, OutcomeLabel, Wing};
use crate::spacetime::{Scenario, SpacetimePoint};

const CHUNK: u64 = 1 << 14;
const WORDS_PER_TRIAL: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub pair_index: usize,
    pub trial: u64,
    pub a: AnalyzerAngle,
    pub b: AnalyzerAngle,
    pub outcome_a: OutcomeLabel,
    pub outcome_b: OutcomeLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_a: Option<SpacetimePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_b: Option<SpacetimePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub config: RunConfig,
    pub model: String,
    /// All trials, grouped by pair and ordered by trial index.
    pub records: Vec<TrialRecord>,
}

impl TrialLog {
    pub fn pair_records(&self, pair_index: usize) -> &[TrialRecord] {
        let n = self.config.trials_per_pair as usize;
        &self.records[pair_index * n..(pair_index + 1) * n]
    }

    /// Writes one JSON object per trial.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), HarnessError> {
        let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        for record in &self.records {
            serde_json::to_writer(&mut out, record).map_err(|e| HarnessError::json(path, e))?;
            out.write_all(b"\n")
                .map_err(|e| HarnessError::io(path, e))?;
        }
        out.flush().map_err(|e| HarnessError::io(path, e))
    }
}

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `trials_per_pair` samples for every scheduled pair. When a scenario
/// is given, each record carries its outcome coordinates.
pub fn run_trials(
    config: &RunConfig,
    scenario: Option<&Scenario>,
) -> Result<TrialLog, HarnessError> {
    config.validate()?;
    let model = config.model.build()?;
    let pairs = config.schedule.pairs();
    let n = config.trials_per_pair;
    let point = |wing| scenario.and_then(|s| s.outcome(wing)).map(|e| e.point);
    let (point_a, point_b) = (point(Wing::A), point(Wing::B));

    let samplers: Vec<_> = pairs.iter().map(|&(a, b)| model.sampler(a, b)).collect();
    let chunks: Vec<(usize, u64)> = (0..pairs.len())
        .flat_map(|k| (0..n.div_ceil(CHUNK)).map(move |c| (k, c * CHUNK)))
        .collect();
    let records = chunks
        .par_iter()
        .map(|&(k, start)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            rng.set_word_pos(u128::from(start) * WORDS_PER_TRIAL);
            let (a, b) = pairs[k];
            (start..(start + CHUNK).min(n))
                .map(|trial| {
                    let u_lambda = unit(rng.next_u64());
                    let u_outcome = unit(rng.next_u64());
                    let (outcome_a, outcome_b) = samplers[k].sample(u_lambda, u_outcome);
                    TrialRecord {
                        pair_index: k,
                        trial,
                        a,
                        b,
                        outcome_a,
                        outcome_b,
                        point_a,
                        point_b,
                    }
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(TrialLog {
        config: config.clone(),
        model: model.name().to_string(),
        records,
    })
}
