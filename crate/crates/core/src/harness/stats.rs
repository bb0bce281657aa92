//! Plug-in estimates from a trial log.

use serde::{Deserialize, Serialize};

use super::trials::TrialLog;
use super::HarnessError;
use crate::locality::{
    check_factorizability, check_no_signalling, check_outcome_independence,
    check_parameter_independence, chsh, ConditionReport,
};
use crate::qcore::{AnalyzerAngle, OutcomeLabel, Wing, IDENTITY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub pair_index: usize,
    pub a: AnalyzerAngle,
    pub b: AnalyzerAngle,
    pub n: u64,
    /// Counts indexed `[A][B]` in `[V, H]` order.
    pub counts: [[u64; 2]; 2],
    /// `f_VV, f_VH, f_HV, f_HH`.
    pub frequencies: [f64; 4],
    pub e: f64,
    /// `√((1 − E²)/n)`.
    pub e_stderr: f64,
}

impl PairStatistics {
    fn from_counts(
        pair_index: usize,
        a: AnalyzerAngle,
        b: AnalyzerAngle,
        counts: [[u64; 2]; 2],
    ) -> Self {
        let n: u64 = counts.iter().flatten().sum();
        let nf = n as f64;
        let frequencies =
            [counts[0][0], counts[0][1], counts[1][0], counts[1][1]].map(|c| c as f64 / nf);
        let e = ((counts[0][0] + counts[1][1]) as f64 - (counts[0][1] + counts[1][0]) as f64) / nf;
        PairStatistics {
            pair_index,
            a,
            b,
            n,
            counts,
            frequencies,
            e,
            e_stderr: ((1.0 - e * e).max(0.0) / nf).sqrt(),
        }
    }

    pub fn frequency(&self, x: OutcomeLabel, y: OutcomeLabel) -> f64 {
        self.frequencies[2 * x.index() + y.index()]
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn frequency_stderr(&self, x: OutcomeLabel, y: OutcomeLabel) -> f64 {
        let f = self.frequency(x, y);
        (f * (1.0 - f) / self.n as f64).sqrt()
    }

    /// Empirical `Pr(V)` on one wing.
    pub fn marginal_v(&self, wing: Wing) -> f64 {
        let c = &self.counts;
        let v = match wing {
            Wing::A => c[0][0] + c[0][1],
            Wing::B => c[0][0] + c[1][0],
        };
        v as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub value: f64,
    /// Quadrature sum of the four `E` standard errors.
    pub stderr: f64,
    /// The model's exact value at the same angles.
    pub analytic: f64,
}

/// Change in one wing's empirical `Pr(V)` between two remote settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignallingDelta {
    pub wing: Wing,
    pub local: AnalyzerAngle,
    pub remote: AnalyzerAngle,
    pub remote_alternative: AnalyzerAngle,
    pub delta: f64,
    pub stderr: f64,
    /// `delta / stderr`; `None` when both frequencies are degenerate but differ.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub model: String,
    pub seed: u64,
    pub trials_per_pair: u64,
    pub pairs: Vec<PairStatistics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chsh: Option<ChshEstimate>,
    pub no_signalling: Vec<SignallingDelta>,
    /// Exact condition checks over the schedule's angles.
    pub conditions: Vec<ConditionReport>,
}

impl ReportBundle {
    /// Largest `|z|` among the no-signalling deltas.
    pub fn max_signalling_z(&self) -> Option<f64> {
        self.no_signalling
            .iter()
            .map(|d| d.z.map_or(f64::INFINITY, f64::abs))
            .reduce(f64::max)
    }
}

/// Tallies the log into per-pair frequencies and derived estimates.
pub fn empirical_statistics(log: &TrialLog) -> Result<ReportBundle, HarnessError> {
    if log.records.is_empty() {
        return Err(HarnessError::InvalidConfig("trial log is empty".into()));
    }
    let pairs_sched = log.config.schedule.pairs();
    let mut counts = vec![[[0u64; 2]; 2]; pairs_sched.len()];
    for r in &log.records {
        counts[r.pair_index][r.outcome_a.index()][r.outcome_b.index()] += 1;
    }
    let pairs: Vec<PairStatistics> = pairs_sched
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (&(a, b), c))| PairStatistics::from_counts(k, a, b, c))
        .collect();

    let model = log.config.model.build()?;
    let chsh_estimate = log.config.schedule.chsh_angles().map(|angles| {
        let signs = angles.terms().map(|t| t.2);
        ChshEstimate {
            value: pairs.iter().zip(signs).map(|(p, s)| s * p.e).sum(),
            stderr: pairs
                .iter()
                .map(|p| p.e_stderr * p.e_stderr)
                .sum::<f64>()
                .sqrt(),
            analytic: chsh(model.as_ref(), &angles),
        }
    });

    let grid = log.config.schedule.grid();
    let conditions = vec![
        check_parameter_independence(model.as_ref(), &grid, IDENTITY_TOL)?,
        check_outcome_independence(model.as_ref(), &grid, IDENTITY_TOL)?,
        check_factorizability(model.as_ref(), &grid, IDENTITY_TOL)?,
        check_no_signalling(model.as_ref(), &grid, IDENTITY_TOL)?,
    ];

    Ok(ReportBundle {
        model: log.model.clone(),
        seed: log.config.seed,
        trials_per_pair: log.config.trials_per_pair,
        no_signalling: signalling_deltas(&pairs),
        pairs,
        chsh: chsh_estimate,
        conditions,
    })
}

/// Every pair of scheduled pairs that share one wing's setting and differ on
/// the other.
fn signalling_deltas(pairs: &[PairStatistics]) -> Vec<SignallingDelta> {
    let mut out = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for q in &pairs[i + 1..] {
            for wing in Wing::ALL {
                let (local_p, remote_p, local_q, remote_q) = match wing {
                    Wing::A => (p.a, p.b, q.a, q.b),
                    Wing::B => (p.b, p.a, q.b, q.a),
                };
                if local_p != local_q || remote_p == remote_q {
                    continue;
                }
                let (fp, fq) = (p.marginal_v(wing), q.marginal_v(wing));
                let delta = fp - fq;
                let stderr = (fp * (1.0 - fp) / p.n as f64 + fq * (1.0 - fq) / q.n as f64).sqrt();
                let z = if stderr > 0.0 {
                    Some(delta / stderr)
                } else if delta == 0.0 {
                    Some(0.0)
                } else {
                    None
                };
                out.push(SignallingDelta {
                    wing,
                    local: local_p,
                    remote: remote_p,
                    remote_alternative: remote_q,
                    delta,
                    stderr,
                    z,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ModelSelector, RunConfig, Schedule};
    use crate::harness::trials::{run_trials, TrialRecord};
    use crate::locality::ChshAngles;

    fn deg(d: f64) -> AnalyzerAngle {
        AnalyzerAngle::from_degrees(d)
    }

    #[test]
    fn degenerate_log() {
        let config = RunConfig::new(
            ModelSelector::Qm,
            Schedule::Pairs(vec![(deg(0.0), deg(0.0))]),
            4,
            1,
        );
        let record = TrialRecord {
            pair_index: 0,
            trial: 0,
            a: deg(0.0),
            b: deg(0.0),
            outcome_a: OutcomeLabel::V,
            outcome_b: OutcomeLabel::V,
            point_a: None,
            point_b: None,
        };
        let log = TrialLog {
            config,
            model: "test".into(),
            records: (0..4).map(|t| TrialRecord { trial: t, ..record }).collect(),
        };
        let bundle = empirical_statistics(&log).unwrap();
        assert_eq!(bundle.pairs[0].e, 1.0);
        assert_eq!(bundle.pairs[0].e_stderr, 0.0);
        assert_eq!(bundle.pairs[0].frequencies, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn chsh_bundle_is_deterministic() {
        let config = RunConfig::new(
            ModelSelector::Qm,
            Schedule::Chsh(ChshAngles::maximal_violation()),
            20_000,
            9,
        );
        let one = empirical_statistics(&run_trials(&config, None).unwrap()).unwrap();
        let two = empirical_statistics(&run_trials(&config, None).unwrap()).unwrap();
        assert_eq!(one, two);
        let c = one.chsh.clone().unwrap();
        assert!((c.value - c.analytic).abs() < 4.0 * c.stderr, "{c:?}");
        for p in &one.pairs {
            assert!((p.frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // a is shared by pairs 0 and 1, and so on around the square
        assert_eq!(one.no_signalling.len(), 4);
        assert!(one.max_signalling_z().unwrap() < 4.0);
        assert!(one.conditions[0].holds && !one.conditions[1].holds);
    }
}
