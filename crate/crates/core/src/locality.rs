//! Locality conditions over bipartite probability models.
//!
//! A [`ProbabilityModel`] maps analyzer settings and a hidden state λ to a
//! joint outcome distribution. The quantum model is the degenerate case with a
//! single λ. Each checker sweeps every `(λ, a, b)` cell of an angle grid and
//! reports the worst deviation together with the cell that produced it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{
    bell_phi_plus, born_joint, AnalyzerAngle, JointDistribution, OutcomeLabel, PhotonPairState,
    Wing, IDENTITY_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalityError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("empty angle grid")]
    EmptyGrid,
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
}

/// Draws outcome pairs from two uniforms in `[0, 1)`: one for λ, one for the
/// outcomes given λ.
pub trait OutcomeSampler: Send + Sync {
    fn sample(&self, u_lambda: f64, u_outcome: f64) -> (OutcomeLabel, OutcomeLabel);
}

/// Samples a joint distribution by inverting its CDF in `VV, VH, HV, HH` order.
pub fn sample_joint(joint: &JointDistribution, u: f64) -> (OutcomeLabel, OutcomeLabel) {
    use OutcomeLabel::{H, V};
    let mut acc = 0.0;
    for (x, y) in [(V, V), (V, H), (H, V)] {
        acc += joint.get(x, y);
        if u < acc {
            return (x, y);
        }
    }
    (H, H)
}

struct DiscreteSampler {
    cumulative: Vec<f64>,
    kernels: Vec<JointDistribution>,
}

impl OutcomeSampler for DiscreteSampler {
    fn sample(&self, u_lambda: f64, u_outcome: f64) -> (OutcomeLabel, OutcomeLabel) {
        let i = self
            .cumulative
            .partition_point(|c| *c <= u_lambda)
            .min(self.kernels.len() - 1);
        sample_joint(&self.kernels[i], u_outcome)
    }
}

/// Bipartite model: hidden states `0..hidden_count()` with prior weights and a
/// kernel giving the joint outcome distribution for each `(a, b, λ)`.
pub trait ProbabilityModel: Sync {
    fn name(&self) -> &str;

    fn hidden_count(&self) -> usize;

    fn weight(&self, lambda: usize) -> f64;

    fn kernel(&self, a: AnalyzerAngle, b: AnalyzerAngle, lambda: usize) -> JointDistribution;

    /// Human-readable value of hidden state `lambda`.
    fn describe_hidden(&self, lambda: usize) -> String {
        format!("λ#{lambda}")
    }

    /// Prior-weighted joint distribution.
    fn averaged(&self, a: AnalyzerAngle, b: AnalyzerAngle) -> JointDistribution {
        let mut probs = [[0.0; 2]; 2];
        for l in 0..self.hidden_count() {
            let w = self.weight(l);
            let k = self.kernel(a, b, l).probs();
            for i in 0..2 {
                for j in 0..2 {
                    probs[i][j] += w * k[i][j];
                }
            }
        }
        // summation error over thousands of nodes can drift past the identity tolerance
        let total: f64 = probs.iter().flatten().sum();
        let scaled = probs.map(|row| row.map(|p| (p / total).clamp(0.0, 1.0)));
        JointDistribution::new(scaled).expect("prior-averaged kernels form a distribution")
    }

    /// `Σ_λ w_λ E_λ(a, b)`.
    fn correlation(&self, a: AnalyzerAngle, b: AnalyzerAngle) -> f64 {
        (0..self.hidden_count())
            .map(|l| self.weight(l) * self.kernel(a, b, l).correlation())
            .sum()
    }

    fn sampler(&self, a: AnalyzerAngle, b: AnalyzerAngle) -> Box<dyn OutcomeSampler + '_> {
        let mut acc = 0.0;
        let cumulative = (0..self.hidden_count())
            .map(|l| {
                acc += self.weight(l);
                acc
            })
            .collect();
        let kernels = (0..self.hidden_count())
            .map(|l| self.kernel(a, b, l))
            .collect();
        Box::new(DiscreteSampler {
            cumulative,
            kernels,
        })
    }
}

/// Checks the prior and every kernel output on `grid`.
pub fn validate_model(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
) -> Result<(), LocalityError> {
    let n = model.hidden_count();
    if n == 0 {
        return Err(LocalityError::InvalidModel("no hidden states".into()));
    }
    let weights: Vec<f64> = (0..n).map(|l| model.weight(l)).collect();
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(LocalityError::InvalidModel(format!(
            "negative or NaN prior weight {w}"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > IDENTITY_TOL {
        return Err(LocalityError::InvalidModel(format!(
            "prior weights sum to {total}"
        )));
    }
    for &a in grid {
        for &b in grid {
            for l in 0..n {
                let k = model.kernel(a, b, l);
                JointDistribution::new(k.probs()).map_err(|e| {
                    LocalityError::InvalidModel(format!("kernel at a={a}, b={b}, λ#{l}: {e}"))
                })?;
            }
        }
    }
    Ok(())
}

/// The Born-rule model: one hidden state, kernel `born_joint`.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    state: PhotonPairState,
    name: String,
}

impl QuantumModel {
    pub fn new(state: PhotonPairState) -> Self {
        QuantumModel {
            state,
            name: "quantum".into(),
        }
    }

    pub fn phi_plus() -> Self {
        QuantumModel {
            state: bell_phi_plus(),
            name: "quantum Φ⁺".into(),
        }
    }

    pub fn state(&self) -> &PhotonPairState {
        &self.state
    }
}

impl ProbabilityModel for QuantumModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn hidden_count(&self) -> usize {
        1
    }

    fn weight(&self, _: usize) -> f64 {
        1.0
    }

    fn kernel(&self, a: AnalyzerAngle, b: AnalyzerAngle, _: usize) -> JointDistribution {
        born_joint(&self.state, a, b)
    }

    fn describe_hidden(&self, _: usize) -> String {
        "state only".into()
    }
}

/// Deliberately signalling model: wings independent, B uniform, and
/// `Pr(V_A) = ½ + (bias/2)·cos 2b`. On any grid containing two orthogonal
/// angles its no-signalling deviation is exactly `bias`.
#[derive(Debug, Clone, Copy)]
pub struct SignallingFixture {
    bias: f64,
}

impl SignallingFixture {
    pub fn new(bias: f64) -> Result<Self, LocalityError> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(LocalityError::InvalidModel(format!(
                "fixture bias {bias} outside [0, 1]"
            )));
        }
        Ok(SignallingFixture { bias })
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

impl ProbabilityModel for SignallingFixture {
    fn name(&self) -> &str {
        "signalling fixture"
    }

    fn hidden_count(&self) -> usize {
        1
    }

    fn weight(&self, _: usize) -> f64 {
        1.0
    }

    fn kernel(&self, _: AnalyzerAngle, b: AnalyzerAngle, _: usize) -> JointDistribution {
        let p_a = (0.5 + 0.5 * self.bias * (2.0 * b.radians()).cos()).clamp(0.0, 1.0);
        JointDistribution::independent(p_a, 0.5)
    }
}

/// The four settings of a CHSH experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: AnalyzerAngle,
    pub a_prime: AnalyzerAngle,
    pub b: AnalyzerAngle,
    pub b_prime: AnalyzerAngle,
}

impl ChshAngles {
    pub fn from_degrees(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        ChshAngles {
            a: AnalyzerAngle::from_degrees(a),
            a_prime: AnalyzerAngle::from_degrees(a_prime),
            b: AnalyzerAngle::from_degrees(b),
            b_prime: AnalyzerAngle::from_degrees(b_prime),
        }
    }

    /// `(0°, 45°, 22.5°, −22.5°)`, where Φ⁺ reaches `2√2`.
    pub fn maximal_violation() -> Self {
        ChshAngles::from_degrees(0.0, 45.0, 22.5, -22.5)
    }

    /// `(a,b), (a,b′), (a′,b), (a′,b′)` with their signs in the CHSH sum.
    pub fn terms(&self) -> [(AnalyzerAngle, AnalyzerAngle, f64); 4] {
        [
            (self.a, self.b, 1.0),
            (self.a, self.b_prime, 1.0),
            (self.a_prime, self.b, 1.0),
            (self.a_prime, self.b_prime, -1.0),
        ]
    }

    /// Distinct angles per wing, in order of first appearance.
    pub fn grid(&self) -> Vec<AnalyzerAngle> {
        let mut out: Vec<AnalyzerAngle> = Vec::new();
        for a in [self.a, self.a_prime, self.b, self.b_prime] {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

impl FromStr for ChshAngles {
    type Err = LocalityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = parse_degrees(s, "CHSH angles")?;
        match values.as_slice() {
            [a, ap, b, bp] => Ok(ChshAngles::from_degrees(*a, *ap, *b, *bp)),
            _ => Err(LocalityError::Parse {
                what: "CHSH angles",
                detail: format!("expected 4 comma-separated angles, got {}", values.len()),
            }),
        }
    }
}

impl fmt::Display for ChshAngles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.a.degrees(),
            self.a_prime.degrees(),
            self.b.degrees(),
            self.b_prime.degrees()
        )
    }
}

fn parse_degrees(s: &str, what: &'static str) -> Result<Vec<f64>, LocalityError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(LocalityError::Parse {
                    what,
                    detail: format!("`{t}` is not a finite angle"),
                }),
            }
        })
        .collect()
}

/// `N` → N uniform angles over `[0°, 180°)`; `x,y,z` → those angles.
pub fn parse_grid(spec: &str) -> Result<Vec<AnalyzerAngle>, LocalityError> {
    let spec = spec.trim();
    let grid = if !spec.contains(',') && !spec.contains('.') {
        if let Ok(n) = spec.parse::<usize>() {
            AnalyzerAngle::uniform_grid(n)
        } else {
            parse_degrees(spec, "angle grid")?
                .into_iter()
                .map(AnalyzerAngle::from_degrees)
                .collect()
        }
    } else {
        parse_degrees(spec, "angle grid")?
            .into_iter()
            .map(AnalyzerAngle::from_degrees)
            .collect()
    };
    if grid.is_empty() {
        return Err(LocalityError::EmptyGrid);
    }
    Ok(grid)
}

/// `E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)` with prior-averaged correlations.
pub fn chsh(model: &dyn ProbabilityModel, angles: &ChshAngles) -> f64 {
    angles
        .terms()
        .iter()
        .map(|&(a, b, sign)| sign * model.correlation(a, b))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    ParameterIndependence,
    OutcomeIndependence,
    Factorizability,
    NoSignalling,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::ParameterIndependence => "parameter independence",
            Condition::OutcomeIndependence => "outcome independence",
            Condition::Factorizability => "factorizability",
            Condition::NoSignalling => "no-signalling",
        })
    }
}

/// The grid cell with the largest deviation, and the two values compared there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `None` for λ-averaged conditions.
    pub lambda: Option<usize>,
    pub hidden: String,
    /// Wing whose probability is examined.
    pub wing: Wing,
    pub outcome: OutcomeLabel,
    pub a: AnalyzerAngle,
    pub b: AnalyzerAngle,
    /// Alternative remote setting (parameter independence, no-signalling).
    pub remote_alternative: Option<AnalyzerAngle>,
    /// Remote outcome conditioned on (outcome independence) or paired with
    /// (factorizability).
    pub remote_outcome: Option<OutcomeLabel>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub model: String,
    pub holds: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
}

#[derive(Clone)]
struct Cell {
    deviation: f64,
    lambda: usize,
    witness: Witness,
}

/// Larger deviation wins; ties go to the smaller λ so the result does not
/// depend on how the sweep was split across threads.
fn worse(x: Option<Cell>, y: Option<Cell>) -> Option<Cell> {
    match (x, y) {
        (None, c) | (c, None) => c,
        (Some(x), Some(y)) => match x.deviation.partial_cmp(&y.deviation) {
            Some(Ordering::Greater) => Some(x),
            Some(Ordering::Less) => Some(y),
            _ => Some(if x.lambda <= y.lambda { x } else { y }),
        },
    }
}

fn sweep<F>(model: &dyn ProbabilityModel, per_lambda: F) -> Option<Cell>
where
    F: Fn(usize, &mut dyn FnMut(f64, Witness)) + Sync,
{
    (0..model.hidden_count())
        .into_par_iter()
        .map(|l| {
            let mut best: Option<Cell> = None;
            per_lambda(l, &mut |deviation, witness| {
                if best.as_ref().is_none_or(|b| deviation > b.deviation) {
                    best = Some(Cell {
                        deviation,
                        lambda: l,
                        witness,
                    });
                }
            });
            best
        })
        .reduce(|| None, worse)
}

fn report(
    condition: Condition,
    model: &dyn ProbabilityModel,
    tol: f64,
    cell: Option<Cell>,
) -> ConditionReport {
    let max_deviation = cell.as_ref().map_or(0.0, |c| c.deviation);
    ConditionReport {
        condition,
        model: model.name().to_string(),
        holds: max_deviation <= tol,
        max_deviation,
        tolerance: tol,
        witness: cell.map(|c| c.witness),
    }
}

fn marginal_of(joint: &JointDistribution, wing: Wing, outcome: OutcomeLabel) -> f64 {
    joint.marginal(wing).get(outcome)
}

/// Orders `(local, remote)` settings as `(a, b)`.
fn orient(
    wing: Wing,
    local: AnalyzerAngle,
    remote: AnalyzerAngle,
) -> (AnalyzerAngle, AnalyzerAngle) {
    match wing {
        Wing::A => (local, remote),
        Wing::B => (remote, local),
    }
}

/// `Pr_{a,b}(A|λ) = Pr_{a,b′}(A|λ)` and the wing-swapped counterpart.
pub fn check_parameter_independence(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
    tol: f64,
) -> Result<ConditionReport, LocalityError> {
    if grid.is_empty() {
        return Err(LocalityError::EmptyGrid);
    }
    let cell = sweep(model, |l, emit| {
        for wing in Wing::ALL {
            for &local in grid {
                for outcome in OutcomeLabel::ALL {
                    let values: Vec<(f64, AnalyzerAngle)> = grid
                        .iter()
                        .map(|&remote| {
                            let (a, b) = orient(wing, local, remote);
                            (marginal_of(&model.kernel(a, b, l), wing, outcome), remote)
                        })
                        .collect();
                    let hi = values
                        .iter()
                        .cloned()
                        .fold(values[0], |m, v| if v.0 > m.0 { v } else { m });
                    let lo = values
                        .iter()
                        .cloned()
                        .fold(values[0], |m, v| if v.0 < m.0 { v } else { m });
                    let (a, b) = orient(wing, local, hi.1);
                    emit(
                        hi.0 - lo.0,
                        Witness {
                            lambda: Some(l),
                            hidden: model.describe_hidden(l),
                            wing,
                            outcome,
                            a,
                            b,
                            remote_alternative: Some(lo.1),
                            remote_outcome: None,
                            lhs: hi.0,
                            rhs: lo.0,
                        },
                    );
                }
            }
        }
    });
    Ok(report(Condition::ParameterIndependence, model, tol, cell))
}

/// `Pr_{a,b}(A|B,λ) = Pr_{a,b}(A|λ)` and the wing-swapped counterpart.
/// Zero-probability conditioning outcomes are skipped.
pub fn check_outcome_independence(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
    tol: f64,
) -> Result<ConditionReport, LocalityError> {
    if grid.is_empty() {
        return Err(LocalityError::EmptyGrid);
    }
    let cell = sweep(model, |l, emit| {
        for &a in grid {
            for &b in grid {
                let joint = model.kernel(a, b, l);
                for wing in Wing::ALL {
                    for given in OutcomeLabel::ALL {
                        let Ok(conditional) = joint.conditional(wing.other(), given) else {
                            continue;
                        };
                        for outcome in OutcomeLabel::ALL {
                            let cond = conditional.get(outcome);
                            let uncond = marginal_of(&joint, wing, outcome);
                            emit(
                                (cond - uncond).abs(),
                                Witness {
                                    lambda: Some(l),
                                    hidden: model.describe_hidden(l),
                                    wing,
                                    outcome,
                                    a,
                                    b,
                                    remote_alternative: None,
                                    remote_outcome: Some(given),
                                    lhs: cond,
                                    rhs: uncond,
                                },
                            );
                        }
                    }
                }
            }
        }
    });
    Ok(report(Condition::OutcomeIndependence, model, tol, cell))
}

/// `Pr_{a,b}(A,B|λ) = Pr_a(A|λ)·Pr_b(B|λ)` with settings as free variables.
pub fn check_factorizability(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
    tol: f64,
) -> Result<ConditionReport, LocalityError> {
    if grid.is_empty() {
        return Err(LocalityError::EmptyGrid);
    }
    let cell = sweep(model, |l, emit| {
        for &a in grid {
            for &b in grid {
                let joint = model.kernel(a, b, l);
                let (ma, mb) = (joint.marginal(Wing::A), joint.marginal(Wing::B));
                for x in OutcomeLabel::ALL {
                    for y in OutcomeLabel::ALL {
                        let product = ma.get(x) * mb.get(y);
                        emit(
                            (joint.get(x, y) - product).abs(),
                            Witness {
                                lambda: Some(l),
                                hidden: model.describe_hidden(l),
                                wing: Wing::A,
                                outcome: x,
                                a,
                                b,
                                remote_alternative: None,
                                remote_outcome: Some(y),
                                lhs: joint.get(x, y),
                                rhs: product,
                            },
                        );
                    }
                }
            }
        }
    });
    Ok(report(Condition::Factorizability, model, tol, cell))
}

/// Like [`no_signalling_deviation`] but with the worst cell attached.
pub fn check_no_signalling(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
    tol: f64,
) -> Result<ConditionReport, LocalityError> {
    if grid.is_empty() {
        return Err(LocalityError::EmptyGrid);
    }
    let averaged: Vec<Vec<JointDistribution>> = grid
        .par_iter()
        .map(|&a| grid.iter().map(|&b| model.averaged(a, b)).collect())
        .collect();
    let mut best: Option<Cell> = None;
    for wing in Wing::ALL {
        for (li, &local) in grid.iter().enumerate() {
            let pick = |ri: usize| match wing {
                Wing::A => averaged[li][ri],
                Wing::B => averaged[ri][li],
            };
            for outcome in OutcomeLabel::ALL {
                let values: Vec<f64> = (0..grid.len())
                    .map(|ri| marginal_of(&pick(ri), wing, outcome))
                    .collect();
                let (hi, lo) = values.iter().enumerate().fold((0, 0), |(h, l), (i, v)| {
                    (
                        if *v > values[h] { i } else { h },
                        if *v < values[l] { i } else { l },
                    )
                });
                let (a, b) = orient(wing, local, grid[hi]);
                let cell = Cell {
                    deviation: values[hi] - values[lo],
                    lambda: 0,
                    witness: Witness {
                        lambda: None,
                        hidden: "prior average".into(),
                        wing,
                        outcome,
                        a,
                        b,
                        remote_alternative: Some(grid[lo]),
                        remote_outcome: None,
                        lhs: values[hi],
                        rhs: values[lo],
                    },
                };
                if best.as_ref().is_none_or(|b| cell.deviation > b.deviation) {
                    best = Some(cell);
                }
            }
        }
    }
    Ok(report(Condition::NoSignalling, model, tol, best))
}

/// Largest change in a λ-averaged marginal when only the remote setting moves.
pub fn no_signalling_deviation(
    model: &dyn ProbabilityModel,
    grid: &[AnalyzerAngle],
) -> Result<f64, LocalityError> {
    Ok(check_no_signalling(model, grid, 0.0)?.max_deviation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> AnalyzerAngle {
        AnalyzerAngle::from_degrees(d)
    }

    #[test]
    fn quantum_signature() {
        let qm = QuantumModel::phi_plus();
        let grid = AnalyzerAngle::uniform_grid(8);
        let pi = check_parameter_independence(&qm, &grid, IDENTITY_TOL).unwrap();
        assert!(pi.holds, "{pi:?}");
        let oi = check_outcome_independence(&qm, &grid, IDENTITY_TOL).unwrap();
        assert!(!oi.holds);
        assert!((oi.max_deviation - 0.5).abs() < IDENTITY_TOL);
        let w = oi.witness.unwrap();
        assert_eq!(w.a, w.b);
        let fac = check_factorizability(&qm, &grid, IDENTITY_TOL).unwrap();
        assert!((fac.max_deviation - 0.25).abs() < IDENTITY_TOL);
        assert!(no_signalling_deviation(&qm, &grid).unwrap() <= IDENTITY_TOL);
    }

    #[test]
    fn quantum_at_45_degrees_is_uncorrelated() {
        let qm = QuantumModel::phi_plus();
        let grid = [deg(0.0), deg(45.0)];
        // only the off-diagonal cells are uncorrelated, so inspect one directly
        let joint = qm.kernel(grid[0], grid[1], 0);
        for x in OutcomeLabel::ALL {
            for y in OutcomeLabel::ALL {
                assert!((joint.get(x, y) - 0.25).abs() < IDENTITY_TOL);
            }
        }
        let c = joint.conditional(Wing::B, OutcomeLabel::V).unwrap();
        assert!((c.v - 0.5).abs() < IDENTITY_TOL);
    }

    #[test]
    fn signalling_fixture_is_caught() {
        let fixture = SignallingFixture::new(0.2).unwrap();
        let grid = vec![deg(0.0), deg(45.0), deg(90.0)];
        let pi = check_parameter_independence(&fixture, &grid, IDENTITY_TOL).unwrap();
        assert!(!pi.holds);
        let w = pi.witness.unwrap();
        assert_eq!(w.wing, Wing::A);
        assert!((no_signalling_deviation(&fixture, &grid).unwrap() - 0.2).abs() < IDENTITY_TOL);
        assert!(SignallingFixture::new(1.5).is_err());
    }

    #[test]
    fn chsh_values() {
        let qm = QuantumModel::phi_plus();
        let v = chsh(&qm, &ChshAngles::maximal_violation());
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((chsh(&qm, &ChshAngles::from_degrees(0.0, 0.0, 0.0, 0.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parsing() {
        let a: ChshAngles = "0,45,22.5,-22.5".parse().unwrap();
        assert_eq!(a, ChshAngles::maximal_violation());
        assert!("0,45".parse::<ChshAngles>().is_err());
        assert!("0,x,1,2".parse::<ChshAngles>().is_err());
        assert_eq!(parse_grid("4").unwrap().len(), 4);
        assert_eq!(parse_grid("0,22.5").unwrap()[1], deg(22.5));
        assert_eq!(parse_grid("30").unwrap().len(), 30);
        assert!(parse_grid("0").is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let qm = QuantumModel::phi_plus();
        assert_eq!(
            check_factorizability(&qm, &[], 1e-12).unwrap_err(),
            LocalityError::EmptyGrid
        );
        assert!(no_signalling_deviation(&qm, &[]).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(validate_model(&QuantumModel::phi_plus(), &AnalyzerAngle::uniform_grid(4)).is_ok());
    }

    #[test]
    fn joint_sampling_inverts_cdf() {
        let j = JointDistribution::new([[0.1, 0.2], [0.3, 0.4]]).unwrap();
        use OutcomeLabel::{H, V};
        assert_eq!(sample_joint(&j, 0.05), (V, V));
        assert_eq!(sample_joint(&j, 0.15), (V, H));
        assert_eq!(sample_joint(&j, 0.45), (H, V));
        assert_eq!(sample_joint(&j, 0.99), (H, H));
    }
}
