//! Local hidden-variable models.
//!
//! Every model here factorizes by construction: given λ, each wing answers
//! from its own setting alone. Two families are provided. Deterministic
//! strategies assign a fixed outcome to each of two settings per wing, and
//! enumerating all sixteen gives the classical CHSH bound directly. Response
//! models draw λ from a prior and give each wing a probability of `V` as a
//! function of its setting and λ.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::locality::{sample_joint, ChshAngles, OutcomeSampler, ProbabilityModel};
use crate::qcore::{AnalyzerAngle, JointDistribution, OutcomeLabel};

/// Outcome tables for the two settings of each wing, indexed by setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a: [OutcomeLabel; 2],
    pub b: [OutcomeLabel; 2],
}

impl DeterministicStrategy {
    /// All sixteen strategies, in a fixed order.
    pub fn all() -> Vec<DeterministicStrategy> {
        let labels = |bits: u8| {
            [
                if bits & 1 == 0 {
                    OutcomeLabel::V
                } else {
                    OutcomeLabel::H
                },
                if bits & 2 == 0 {
                    OutcomeLabel::V
                } else {
                    OutcomeLabel::H
                },
            ]
        };
        (0..16u8)
            .map(|i| DeterministicStrategy {
                a: labels(i & 3),
                b: labels(i >> 2),
            })
            .collect()
    }

    /// `A₀B₀ + A₀B₁ + A₁B₀ − A₁B₁`.
    pub fn chsh_value(&self) -> f64 {
        let a = self.a.map(|o| f64::from(o.value()));
        let b = self.b.map(|o| f64::from(o.value()));
        a[0] * b[0] + a[0] * b[1] + a[1] * b[0] - a[1] * b[1]
    }
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A(a)={} A(a')={} B(b)={} B(b')={}",
            self.a[0], self.a[1], self.b[0], self.b[1]
        )
    }
}

/// Best deterministic CHSH value and a strategy attaining it. The angles only
/// label which setting is index 0 and which is index 1, so the result is the
/// same for every input.
pub fn deterministic_chsh_maximum(_angles: &ChshAngles) -> (f64, DeterministicStrategy) {
    extremum(|x, y| x > y)
}

pub fn deterministic_chsh_minimum(_angles: &ChshAngles) -> (f64, DeterministicStrategy) {
    extremum(|x, y| x < y)
}

fn extremum(better: impl Fn(f64, f64) -> bool) -> (f64, DeterministicStrategy) {
    let mut strategies = DeterministicStrategy::all().into_iter();
    let first = strategies.next().expect("sixteen strategies");
    strategies.fold((first.chsh_value(), first), |best, s| {
        let v = s.chsh_value();
        if better(v, best.0) {
            (v, s)
        } else {
            best
        }
    })
}

/// A prior-weighted mixture of deterministic strategies, usable as a
/// [`ProbabilityModel`] at arbitrary angles. An angle maps to setting index 1
/// when it is strictly closer to the primed setting than to the unprimed one.
#[derive(Debug, Clone)]
pub struct StrategyMixture {
    angles: ChshAngles,
    components: Vec<(DeterministicStrategy, f64)>,
}

impl StrategyMixture {
    /// Weights are taken as given; see [`crate::locality::validate_model`].
    pub fn new(angles: ChshAngles, components: Vec<(DeterministicStrategy, f64)>) -> Self {
        StrategyMixture { angles, components }
    }

    pub fn uniform(angles: ChshAngles) -> Self {
        let all = DeterministicStrategy::all();
        let w = 1.0 / all.len() as f64;
        StrategyMixture::new(angles, all.into_iter().map(|s| (s, w)).collect())
    }

    pub fn pure(angles: ChshAngles, strategy: DeterministicStrategy) -> Self {
        StrategyMixture::new(angles, vec![(strategy, 1.0)])
    }

    fn index(angle: AnalyzerAngle, unprimed: AnalyzerAngle, primed: AnalyzerAngle) -> usize {
        usize::from(angle.separation(primed) < angle.separation(unprimed))
    }
}

impl ProbabilityModel for StrategyMixture {
    fn name(&self) -> &str {
        "deterministic strategy mixture"
    }

    fn hidden_count(&self) -> usize {
        self.components.len()
    }

    fn weight(&self, lambda: usize) -> f64 {
        self.components[lambda].1
    }

    fn kernel(&self, a: AnalyzerAngle, b: AnalyzerAngle, lambda: usize) -> JointDistribution {
        let s = &self.components[lambda].0;
        let ia = Self::index(a, self.angles.a, self.angles.a_prime);
        let ib = Self::index(b, self.angles.b, self.angles.b_prime);
        JointDistribution::deterministic(s.a[ia], s.b[ib])
    }

    fn describe_hidden(&self, lambda: usize) -> String {
        self.components[lambda].0.to_string()
    }
}

/// Probability of `V` on one wing given its setting and λ (in degrees).
pub type Response = Arc<dyn Fn(AnalyzerAngle, f64) -> f64 + Send + Sync>;

/// Distribution of a scalar hidden variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "prior", rename_all = "snake_case")]
pub enum HiddenPrior {
    /// `(value, weight)` atoms.
    Discrete(Vec<(f64, f64)>),
    /// Uniform on `[lo, hi)`. Condition checks and averages use `nodes`
    /// equal-weight midpoint nodes; sampling draws λ continuously.
    Uniform { lo: f64, hi: f64, nodes: usize },
}

/// Default number of quadrature nodes for continuous priors.
pub const DEFAULT_QUADRATURE_NODES: usize = 2048;

/// Local model with per-wing response functions. Its kernel is the product
/// of the two wing responses.
#[derive(Clone)]
pub struct LhvModel {
    name: String,
    prior: HiddenPrior,
    nodes: Vec<(f64, f64)>,
    response_a: Response,
    response_b: Response,
}

impl fmt::Debug for LhvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LhvModel")
            .field("name", &self.name)
            .field("prior", &self.prior)
            .finish_non_exhaustive()
    }
}

impl LhvModel {
    pub fn new(
        name: impl Into<String>,
        prior: HiddenPrior,
        response_a: Response,
        response_b: Response,
    ) -> Self {
        let nodes = match &prior {
            HiddenPrior::Discrete(atoms) => atoms.clone(),
            HiddenPrior::Uniform { lo, hi, nodes } => {
                let step = (hi - lo) / *nodes as f64;
                let w = 1.0 / *nodes as f64;
                (0..*nodes)
                    .map(|k| (lo + (k as f64 + 0.5) * step, w))
                    .collect()
            }
        };
        LhvModel {
            name: name.into(),
            prior,
            nodes,
            response_a,
            response_b,
        }
    }

    pub fn prior(&self) -> &HiddenPrior {
        &self.prior
    }

    /// `(λ, weight)` pairs used by condition checks and averages.
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    fn joint_at(&self, a: AnalyzerAngle, b: AnalyzerAngle, lambda: f64) -> JointDistribution {
        JointDistribution::independent((self.response_a)(a, lambda), (self.response_b)(b, lambda))
    }
}

impl ProbabilityModel for LhvModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn hidden_count(&self) -> usize {
        self.nodes.len()
    }

    fn weight(&self, lambda: usize) -> f64 {
        self.nodes[lambda].1
    }

    fn kernel(&self, a: AnalyzerAngle, b: AnalyzerAngle, lambda: usize) -> JointDistribution {
        self.joint_at(a, b, self.nodes[lambda].0)
    }

    fn describe_hidden(&self, lambda: usize) -> String {
        format!("λ={}", self.nodes[lambda].0)
    }

    fn sampler(&self, a: AnalyzerAngle, b: AnalyzerAngle) -> Box<dyn OutcomeSampler + '_> {
        match self.prior {
            HiddenPrior::Uniform { lo, hi, .. } => Box::new(ContinuousSampler {
                model: self,
                a,
                b,
                lo,
                hi,
            }),
            HiddenPrior::Discrete(_) => {
                let mut acc = 0.0;
                let cumulative = self
                    .nodes
                    .iter()
                    .map(|(_, w)| {
                        acc += w;
                        acc
                    })
                    .collect();
                Box::new(AtomSampler {
                    model: self,
                    a,
                    b,
                    cumulative,
                })
            }
        }
    }
}

struct ContinuousSampler<'m> {
    model: &'m LhvModel,
    a: AnalyzerAngle,
    b: AnalyzerAngle,
    lo: f64,
    hi: f64,
}

impl OutcomeSampler for ContinuousSampler<'_> {
    fn sample(&self, u_lambda: f64, u_outcome: f64) -> (OutcomeLabel, OutcomeLabel) {
        let lambda = self.lo + u_lambda * (self.hi - self.lo);
        sample_joint(&self.model.joint_at(self.a, self.b, lambda), u_outcome)
    }
}

struct AtomSampler<'m> {
    model: &'m LhvModel,
    a: AnalyzerAngle,
    b: AnalyzerAngle,
    cumulative: Vec<f64>,
}

impl OutcomeSampler for AtomSampler<'_> {
    fn sample(&self, u_lambda: f64, u_outcome: f64) -> (OutcomeLabel, OutcomeLabel) {
        let i = self
            .cumulative
            .partition_point(|c| *c <= u_lambda)
            .min(self.model.nodes.len() - 1);
        let lambda = self.model.nodes[i].0;
        sample_joint(&self.model.joint_at(self.a, self.b, lambda), u_outcome)
    }
}

/// `V` when the hidden polarization axis lies within 45° of the analyzer
/// axis, `H` otherwise.
pub fn vector_response(angle: AnalyzerAngle, lambda_deg: f64) -> f64 {
    if angle.separation(AnalyzerAngle::from_degrees(lambda_deg)) < 45.0 {
        1.0
    } else {
        0.0
    }
}

/// Both photons carry the same hidden polarization axis, uniform over
/// `[0°, 180°)`, and each analyzer applies [`vector_response`].
///
/// The correlation is linear in the axis separation, `E = 1 − ∠ab/45°`: it
/// is `1` when aligned, `0` at 45° and `−1` at 90°.
pub fn builtin_vector_model() -> LhvModel {
    let response: Response = Arc::new(vector_response);
    LhvModel::new(
        "builtin vector LHV",
        HiddenPrior::Uniform {
            lo: 0.0,
            hi: 180.0,
            nodes: DEFAULT_QUADRATURE_NODES,
        },
        response.clone(),
        response,
    )
}
