//! Exact Born-rule engine for a pair of polarization-entangled photons.
//!
//! Conventions used everywhere in this crate:
//!
//! * Tensor ordering is wing A ⊗ wing B. The single-photon basis is ordered
//!   `{|H⟩, |V⟩}`, so the pair basis is `{|HH⟩, |HV⟩, |VH⟩, |VV⟩}` and the
//!   pair index of `(i_A, i_B)` is `2·i_A + i_B`.
//! * Analyzer angles are given in degrees from the reference direction and are
//!   normalized to `[0°, 180°)`. The reference direction is the V axis: the V
//!   outcome at angle θ projects onto `cos θ |V⟩ + sin θ |H⟩` and the H outcome
//!   onto the orthogonal direction.
//! * Outcome values are `V ↦ +1`, `H ↦ −1`.
//!
//! States are density operators, so mixed states such as `½·1` are handled
//! the same way as pure ones.

use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for analytic identities (hermiticity, trace, idempotence).
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for expressions composed from several floating-point steps.
pub const COMPOSED_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = 1e-10;
/// Marginals at or below this are treated as zero when conditioning.
pub const ZERO_PROBABILITY: f64 = 1e-12;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("invalid density operator: {0}")]
    InvalidState(String),
    #[error("conditional undefined: outcome {outcome} on wing {wing} has zero probability")]
    UndefinedConditional { wing: Wing, outcome: OutcomeLabel },
}

/// Measurement side. Wing A records in region 1, wing B in region 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wing {
    A,
    B,
}

impl Wing {
    pub const ALL: [Wing; 2] = [Wing::A, Wing::B];

    pub fn other(self) -> Wing {
        match self {
            Wing::A => Wing::B,
            Wing::B => Wing::A,
        }
    }
}

impl fmt::Display for Wing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wing::A => f.write_str("A"),
            Wing::B => f.write_str("B"),
        }
    }
}

/// Polarization outcome relative to the analyzer axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeLabel {
    V,
    H,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 2] = [OutcomeLabel::V, OutcomeLabel::H];

    /// `V ↦ +1`, `H ↦ −1`.
    pub fn value(self) -> i8 {
        match self {
            OutcomeLabel::V => 1,
            OutcomeLabel::H => -1,
        }
    }

    pub fn from_value(value: i8) -> Option<Self> {
        match value {
            1 => Some(OutcomeLabel::V),
            -1 => Some(OutcomeLabel::H),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            OutcomeLabel::V => OutcomeLabel::H,
            OutcomeLabel::H => OutcomeLabel::V,
        }
    }

    /// Position in `[V, H]`-ordered tables.
    pub(crate) fn index(self) -> usize {
        match self {
            OutcomeLabel::V => 0,
            OutcomeLabel::H => 1,
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::V => f.write_str("V"),
            OutcomeLabel::H => f.write_str("H"),
        }
    }
}

/// Analyzer axis in degrees, normalized to `[0°, 180°)`.
///
/// A polarization axis is a line, so angles differing by 180° are the same
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AnalyzerAngle(f64);

impl AnalyzerAngle {
    /// Panics if `degrees` is not finite.
    pub fn from_degrees(degrees: f64) -> Self {
        assert!(
            degrees.is_finite(),
            "analyzer angle must be finite, got {degrees}"
        );
        let mut d = degrees.rem_euclid(180.0);
        // rem_euclid can round up to the modulus for tiny negative inputs
        if d >= 180.0 {
            d = 0.0;
        }
        AnalyzerAngle(d)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    pub fn rotated(self, delta_degrees: f64) -> Self {
        AnalyzerAngle::from_degrees(self.0 + delta_degrees)
    }

    /// Angle between the two axes as lines, in `[0°, 90°]`.
    pub fn separation(self, other: AnalyzerAngle) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(180.0 - d)
    }

    /// `count` equally spaced angles covering `[0°, 180°)`.
    pub fn uniform_grid(count: usize) -> Vec<AnalyzerAngle> {
        (0..count)
            .map(|i| AnalyzerAngle::from_degrees(180.0 * i as f64 / count as f64))
            .collect()
    }
}

impl TryFrom<f64> for AnalyzerAngle {
    type Error = String;

    fn try_from(degrees: f64) -> Result<Self, Self::Error> {
        if degrees.is_finite() {
            Ok(AnalyzerAngle::from_degrees(degrees))
        } else {
            Err(format!("analyzer angle must be finite, got {degrees}"))
        }
    }
}

impl From<AnalyzerAngle> for f64 {
    fn from(angle: AnalyzerAngle) -> f64 {
        angle.0
    }
}

impl fmt::Display for AnalyzerAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Unit vector in the `{|H⟩, |V⟩}` basis along the given outcome direction.
fn analyzer_vector(angle: AnalyzerAngle, outcome: OutcomeLabel) -> [f64; 2] {
    let (s, c) = angle.radians().sin_cos();
    match outcome {
        OutcomeLabel::V => [s, c],
        OutcomeLabel::H => [c, -s],
    }
}

/// Rank-one polarization projector on a single wing.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: Matrix2<C>,
}

impl Projector {
    pub fn matrix(&self) -> &Matrix2<C> {
        &self.matrix
    }

    /// Lift onto the pair space respecting A ⊗ B ordering.
    pub fn lift(&self, wing: Wing) -> Matrix4<C> {
        let id = Matrix2::<C>::identity();
        match wing {
            Wing::A => self.matrix.kronecker(&id),
            Wing::B => id.kronecker(&self.matrix),
        }
    }
}

/// Projector for `outcome` of a polarization analyzer at `angle`.
pub fn analyzer_projector(angle: AnalyzerAngle, outcome: OutcomeLabel) -> Projector {
    let v = analyzer_vector(angle, outcome);
    let matrix = Matrix2::from_fn(|i, j| C::new(v[i] * v[j], 0.0));
    Projector { matrix }
}

fn density_violation(m: &DMatrix<C>) -> Option<String> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Some("non-finite entry".into());
    }
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > IDENTITY_TOL {
                return Some(format!("not Hermitian at ({i}, {j}): deviation {d:e}"));
            }
        }
    }
    let tr = m.trace();
    if (tr - ONE).norm() > IDENTITY_TOL {
        return Some(format!("trace is {tr}, expected 1"));
    }
    let hermitian = (m + m.adjoint()).scale(0.5);
    let min_eig = hermitian
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL {
        return Some(format!("not positive semidefinite: eigenvalue {min_eig:e}"));
    }
    None
}

/// Density operator of the two-photon polarization system.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonPairState {
    matrix: Matrix4<C>,
}

impl PhotonPairState {
    pub fn new(matrix: Matrix4<C>) -> Result<Self, QError> {
        let dynamic = DMatrix::from_iterator(4, 4, matrix.iter().cloned());
        match density_violation(&dynamic) {
            Some(reason) => Err(QError::InvalidState(reason)),
            None => Ok(PhotonPairState { matrix }),
        }
    }

    /// Pure state from amplitudes over `{HH, HV, VH, VV}`; must be normalized.
    pub fn from_amplitudes(amplitudes: [C; 4]) -> Result<Self, QError> {
        let matrix = Matrix4::from_fn(|i, j| amplitudes[i] * amplitudes[j].conj());
        PhotonPairState::new(matrix)
    }

    pub fn product(a: &SingleWingState, b: &SingleWingState) -> Self {
        PhotonPairState {
            matrix: a.matrix.kronecker(&b.matrix),
        }
    }

    /// `|x_a⟩ ⊗ |y_b⟩` for analyzer eigenvectors on each wing.
    pub fn product_eigenstate(
        a_angle: AnalyzerAngle,
        a_outcome: OutcomeLabel,
        b_angle: AnalyzerAngle,
        b_outcome: OutcomeLabel,
    ) -> Self {
        PhotonPairState::product(
            &SingleWingState::analyzer_eigenstate(a_angle, a_outcome),
            &SingleWingState::analyzer_eigenstate(b_angle, b_outcome),
        )
    }

    pub fn matrix(&self) -> &Matrix4<C> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    fn expectation(&self, observable: &Matrix4<C>) -> f64 {
        (self.matrix * observable).trace().re
    }
}

/// Density operator of one photon.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleWingState {
    matrix: Matrix2<C>,
}

impl SingleWingState {
    pub fn new(matrix: Matrix2<C>) -> Result<Self, QError> {
        let dynamic = DMatrix::from_iterator(2, 2, matrix.iter().cloned());
        match density_violation(&dynamic) {
            Some(reason) => Err(QError::InvalidState(reason)),
            None => Ok(SingleWingState { matrix }),
        }
    }

    /// `½·1`.
    pub fn maximally_mixed() -> Self {
        SingleWingState {
            matrix: Matrix2::identity().scale(0.5),
        }
    }

    pub fn analyzer_eigenstate(angle: AnalyzerAngle, outcome: OutcomeLabel) -> Self {
        SingleWingState {
            matrix: analyzer_projector(angle, outcome).matrix,
        }
    }

    pub fn matrix(&self) -> &Matrix2<C> {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    pub fn probability(&self, projector: &Projector) -> f64 {
        (self.matrix * projector.matrix).trace().re.clamp(0.0, 1.0)
    }

    /// Outcome distribution for an analyzer at `angle`.
    pub fn distribution(&self, angle: AnalyzerAngle) -> OutcomeDistribution {
        OutcomeDistribution {
            v: self.probability(&analyzer_projector(angle, OutcomeLabel::V)),
            h: self.probability(&analyzer_projector(angle, OutcomeLabel::H)),
        }
    }

    /// Largest entrywise distance to another state.
    pub fn distance(&self, other: &SingleWingState) -> f64 {
        (self.matrix - other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Probabilities of `V` and `H` on one wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub v: f64,
    pub h: f64,
}

impl OutcomeDistribution {
    pub fn get(&self, outcome: OutcomeLabel) -> f64 {
        match outcome {
            OutcomeLabel::V => self.v,
            OutcomeLabel::H => self.h,
        }
    }

    pub fn certain(outcome: OutcomeLabel) -> Self {
        match outcome {
            OutcomeLabel::V => OutcomeDistribution { v: 1.0, h: 0.0 },
            OutcomeLabel::H => OutcomeDistribution { v: 0.0, h: 1.0 },
        }
    }
}

/// Joint outcome probabilities, indexed `[A outcome][B outcome]` in `[V, H]` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    probs: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn new(probs: [[f64; 2]; 2]) -> Result<Self, QError> {
        let flat = probs.iter().flatten();
        if flat.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(QError::InvalidState(format!(
                "joint probabilities outside [0, 1]: {probs:?}"
            )));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > IDENTITY_TOL {
            return Err(QError::InvalidState(format!(
                "joint probabilities sum to {total}"
            )));
        }
        Ok(JointDistribution { probs })
    }

    /// Independent wings with `Pr(V_A) = p_a`, `Pr(V_B) = p_b`.
    pub fn independent(p_a: f64, p_b: f64) -> Self {
        let pa = [p_a, 1.0 - p_a];
        let pb = [p_b, 1.0 - p_b];
        JointDistribution {
            probs: [
                [pa[0] * pb[0], pa[0] * pb[1]],
                [pa[1] * pb[0], pa[1] * pb[1]],
            ],
        }
    }

    pub fn deterministic(a: OutcomeLabel, b: OutcomeLabel) -> Self {
        let mut probs = [[0.0; 2]; 2];
        probs[a.index()][b.index()] = 1.0;
        JointDistribution { probs }
    }

    pub fn get(&self, a: OutcomeLabel, b: OutcomeLabel) -> f64 {
        self.probs[a.index()][b.index()]
    }

    pub fn probs(&self) -> [[f64; 2]; 2] {
        self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn marginal(&self, wing: Wing) -> OutcomeDistribution {
        let p = &self.probs;
        match wing {
            Wing::A => OutcomeDistribution {
                v: p[0][0] + p[0][1],
                h: p[1][0] + p[1][1],
            },
            Wing::B => OutcomeDistribution {
                v: p[0][0] + p[1][0],
                h: p[0][1] + p[1][1],
            },
        }
    }

    /// Distribution of the other wing given `outcome` on `wing`.
    pub fn conditional(
        &self,
        wing: Wing,
        outcome: OutcomeLabel,
    ) -> Result<OutcomeDistribution, QError> {
        let marginal = self.marginal(wing).get(outcome);
        if marginal <= ZERO_PROBABILITY {
            return Err(QError::UndefinedConditional { wing, outcome });
        }
        let joint = |other: OutcomeLabel| match wing {
            Wing::A => self.get(outcome, other),
            Wing::B => self.get(other, outcome),
        };
        Ok(OutcomeDistribution {
            v: joint(OutcomeLabel::V) / marginal,
            h: joint(OutcomeLabel::H) / marginal,
        })
    }

    /// `E = Σ value(A)·value(B)·Pr(A, B)`.
    pub fn correlation(&self) -> f64 {
        let p = &self.probs;
        p[0][0] + p[1][1] - p[0][1] - p[1][0]
    }
}

/// `|Φ⁺⟩⟨Φ⁺|` with `Φ⁺ = (|HH⟩ + |VV⟩)/√2`.
pub fn bell_phi_plus() -> PhotonPairState {
    let mut matrix = Matrix4::<C>::zeros();
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            matrix[(i, j)] = C::new(0.5, 0.0);
        }
    }
    PhotonPairState { matrix }
}

/// Partial trace over the other wing.
pub fn reduced_state(state: &PhotonPairState, wing: Wing) -> SingleWingState {
    SingleWingState {
        matrix: partial_trace(&state.matrix, wing),
    }
}

fn partial_trace(m: &Matrix4<C>, keep: Wing) -> Matrix2<C> {
    let mut out = Matrix2::<C>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                acc += match keep {
                    Wing::A => m[(2 * r + k, 2 * c + k)],
                    Wing::B => m[(2 * k + r, 2 * k + c)],
                };
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// `Pr(A, B) = Tr(ρ · P_A(a) ⊗ P_B(b))` for all four outcome pairs.
pub fn born_joint(
    state: &PhotonPairState,
    a: AnalyzerAngle,
    b: AnalyzerAngle,
) -> JointDistribution {
    let mut probs = [[0.0; 2]; 2];
    for x in OutcomeLabel::ALL {
        let pa = analyzer_projector(a, x).lift(Wing::A);
        for y in OutcomeLabel::ALL {
            let pb = analyzer_projector(b, y).lift(Wing::B);
            probs[x.index()][y.index()] = state.expectation(&(pa * pb)).clamp(0.0, 1.0);
        }
    }
    JointDistribution { probs }
}

/// Single-wing outcome distribution. Computed from the reduced state, so it
/// never sees the remote analyzer.
pub fn born_marginal(
    state: &PhotonPairState,
    wing: Wing,
    angle: AnalyzerAngle,
) -> OutcomeDistribution {
    reduced_state(state, wing).distribution(angle)
}

/// Distribution of the wing opposite `given.0`, conditioned on `given.1` there.
pub fn born_conditional(
    state: &PhotonPairState,
    a: AnalyzerAngle,
    b: AnalyzerAngle,
    given: (Wing, OutcomeLabel),
) -> Result<OutcomeDistribution, QError> {
    let (wing, outcome) = given;
    let angle = match wing {
        Wing::A => a,
        Wing::B => b,
    };
    let marginal = born_marginal(state, wing, angle).get(outcome);
    if marginal <= ZERO_PROBABILITY {
        return Err(QError::UndefinedConditional { wing, outcome });
    }
    let joint = born_joint(state, a, b);
    let entry = |other: OutcomeLabel| match wing {
        Wing::A => joint.get(outcome, other),
        Wing::B => joint.get(other, outcome),
    };
    Ok(OutcomeDistribution {
        v: entry(OutcomeLabel::V) / marginal,
        h: entry(OutcomeLabel::H) / marginal,
    })
}

pub fn correlation_e(state: &PhotonPairState, a: AnalyzerAngle, b: AnalyzerAngle) -> f64 {
    born_joint(state, a, b).correlation()
}

/// State of the unobserved wing after `observed = (wing, angle, outcome)`:
/// project, trace out the observed wing, renormalize.
pub fn conditional_remote_state(
    state: &PhotonPairState,
    observed: (Wing, AnalyzerAngle, OutcomeLabel),
) -> Result<SingleWingState, QError> {
    let (wing, angle, outcome) = observed;
    let p = analyzer_projector(angle, outcome).lift(wing);
    let projected = p * state.matrix * p;
    let remote = partial_trace(&projected, wing.other());
    let norm = remote.trace().re;
    if norm <= ZERO_PROBABILITY {
        return Err(QError::UndefinedConditional { wing, outcome });
    }
    SingleWingState::new(remote.unscale(norm))
}
