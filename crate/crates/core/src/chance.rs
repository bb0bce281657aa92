//! Chances relativized to spacetime points.
//!
//! The chance of an outcome at a point is its Born probability conditioned on
//! everything in the point's closed backward light cone: the preparation that
//! backs the state, the analyzer settings, and any outcomes already recorded.
//! Without an accessible preparation no chance is defined.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{
    bell_phi_plus, born_conditional, born_joint, born_marginal, AnalyzerAngle, OutcomeLabel,
    PhotonPairState, QError, SingleWingState, Wing, COMPOSED_TOL,
};
use crate::spacetime::{
    backward_cone_contents, causal_relation, CausalRelation, EventId, EventKind, Scenario,
    SpacetimeError, SpacetimePoint,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChanceError {
    #[error("no chance defined: {0}")]
    NoChanceDefined(String),
    #[error("intervention is senseless: {0}")]
    SenselessIntervention(String),
    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),
    #[error("cause `{0}` is not an event of the scenario")]
    UnknownEvent(EventId),
    #[error("cause `{cause}` is the effect's own outcome event")]
    NotDistinct { cause: EventId },
    #[error(transparent)]
    Quantum(#[from] QError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
}

/// An outcome event, or the joint occurrence of one outcome on each wing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Outcome(Wing, OutcomeLabel),
    Joint(OutcomeLabel, OutcomeLabel),
}

impl Target {
    /// Wing A registers V.
    pub const E_A: Target = Target::Outcome(Wing::A, OutcomeLabel::V);
    /// Wing B registers V.
    pub const E_B: Target = Target::Outcome(Wing::B, OutcomeLabel::V);
    /// Both register V.
    pub const JOINT: Target = Target::Joint(OutcomeLabel::V, OutcomeLabel::V);

    pub fn involves(&self, wing: Wing) -> bool {
        match self {
            Target::Outcome(w, _) => *w == wing,
            Target::Joint(..) => true,
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eA" | "e_A" => Ok(Target::E_A),
            "eB" | "e_B" => Ok(Target::E_B),
            "joint" => Ok(Target::JOINT),
            other => Err(format!(
                "unknown target `{other}` (expected eA, eB or joint)"
            )),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Outcome(w, o) => write!(f, "{o}_{w}"),
            Target::Joint(x, y) => write!(f, "{x}_A⊎{y}_B"),
        }
    }
}

/// What is known about one wing's analyzer at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingAccess {
    Inaccessible,
    NoMeasurement,
    Angle(AnalyzerAngle),
}

impl SettingAccess {
    pub fn angle(self) -> Option<AnalyzerAngle> {
        match self {
            SettingAccess::Angle(a) => Some(a),
            _ => None,
        }
    }
}

/// Information available at a point for fixing chances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceClass {
    preparation: bool,
    settings: [SettingAccess; 2],
    outcomes: [Option<OutcomeLabel>; 2],
}

fn slot(wing: Wing) -> usize {
    match wing {
        Wing::A => 0,
        Wing::B => 1,
    }
}

impl ReferenceClass {
    /// Fails if an outcome is accessible without its wing's analyzer angle.
    pub fn new(
        preparation: bool,
        settings: [SettingAccess; 2],
        outcomes: [Option<OutcomeLabel>; 2],
    ) -> Result<Self, ChanceError> {
        for wing in Wing::ALL {
            if outcomes[slot(wing)].is_some() && settings[slot(wing)].angle().is_none() {
                return Err(ChanceError::NoChanceDefined(format!(
                    "outcome on wing {wing} is accessible but its setting is not"
                )));
            }
        }
        Ok(ReferenceClass {
            preparation,
            settings,
            outcomes,
        })
    }

    pub fn empty() -> Self {
        ReferenceClass {
            preparation: false,
            settings: [SettingAccess::Inaccessible; 2],
            outcomes: [None; 2],
        }
    }

    pub fn has_preparation(&self) -> bool {
        self.preparation
    }

    pub fn setting(&self, wing: Wing) -> SettingAccess {
        self.settings[slot(wing)]
    }

    pub fn outcome(&self, wing: Wing) -> Option<OutcomeLabel> {
        self.outcomes[slot(wing)]
    }

    pub fn is_empty(&self) -> bool {
        *self == ReferenceClass::empty()
    }

    fn with_outcome(&self, wing: Wing, outcome: OutcomeLabel) -> Self {
        let mut c = self.clone();
        c.outcomes[slot(wing)] = Some(outcome);
        c
    }

    fn with_setting(&self, wing: Wing, setting: SettingAccess) -> Self {
        let mut c = self.clone();
        c.settings[slot(wing)] = setting;
        c
    }
}

/// Chance of `target` at `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChanceValue {
    pub value: f64,
    pub at: SpacetimePoint,
    pub target: Target,
}

pub fn reference_class_at(p: &SpacetimePoint, scenario: &Scenario) -> ReferenceClass {
    let mut class = ReferenceClass::empty();
    for event in backward_cone_contents(p, scenario) {
        match event.kind {
            EventKind::Preparation => class.preparation = true,
            EventKind::Setting { wing, angle } => {
                class.settings[slot(wing)] = match angle {
                    Some(a) => SettingAccess::Angle(a),
                    None => SettingAccess::NoMeasurement,
                }
            }
            EventKind::Outcome { wing, outcome } => class.outcomes[slot(wing)] = Some(outcome),
        }
    }
    class
}

/// `Some(0 or 1)` when the class already settles whether the target occurred.
fn settled(class: &ReferenceClass, target: Target) -> Option<f64> {
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    match target {
        Target::Outcome(w, x) => class.outcome(w).map(|o| indicator(o == x)),
        Target::Joint(x, y) => match (class.outcome(Wing::A), class.outcome(Wing::B)) {
            (Some(oa), Some(ob)) => Some(indicator(oa == x && ob == y)),
            (Some(oa), None) if oa != x => Some(0.0),
            (None, Some(ob)) if ob != y => Some(0.0),
            _ => None,
        },
    }
}

fn required_angle(class: &ReferenceClass, wing: Wing) -> Result<AnalyzerAngle, ChanceError> {
    match class.setting(wing) {
        SettingAccess::Angle(a) => Ok(a),
        SettingAccess::NoMeasurement => Err(ChanceError::NoChanceDefined(format!(
            "no polarization measurement on wing {wing}"
        ))),
        SettingAccess::Inaccessible => Err(ChanceError::NoChanceDefined(format!(
            "setting on wing {wing} is not accessible"
        ))),
    }
}

fn angles(class: &ReferenceClass) -> Result<(AnalyzerAngle, AnalyzerAngle), ChanceError> {
    Ok((
        required_angle(class, Wing::A)?,
        required_angle(class, Wing::B)?,
    ))
}

/// Born probability of `target` given everything in `class`.
pub fn chance_from_class(
    state: &PhotonPairState,
    class: &ReferenceClass,
    target: Target,
) -> Result<f64, ChanceError> {
    if let Some(v) = settled(class, target) {
        return Ok(v);
    }
    if !class.has_preparation() {
        return Err(ChanceError::NoChanceDefined(
            "no event backing the state assignment is accessible".into(),
        ));
    }
    match target {
        Target::Outcome(w, x) => {
            let own = required_angle(class, w)?;
            match class.outcome(w.other()) {
                Some(y) => {
                    let (a, b) = angles(class)?;
                    Ok(born_conditional(state, a, b, (w.other(), y))?.get(x))
                }
                None => Ok(born_marginal(state, w, own).get(x)),
            }
        }
        Target::Joint(x, y) => {
            let (a, b) = angles(class)?;
            // settled() already returned if a visible outcome contradicts the target
            match (class.outcome(Wing::A), class.outcome(Wing::B)) {
                (Some(oa), None) => Ok(born_conditional(state, a, b, (Wing::A, oa))?.get(y)),
                (None, Some(ob)) => Ok(born_conditional(state, a, b, (Wing::B, ob))?.get(x)),
                _ => Ok(born_joint(state, a, b).get(x, y)),
            }
        }
    }
}

pub fn chance_at(
    p: &SpacetimePoint,
    target: Target,
    scenario: &Scenario,
) -> Result<ChanceValue, ChanceError> {
    let class = reference_class_at(p, scenario);
    let value = chance_from_class(scenario.state(), &class, target)?;
    Ok(ChanceValue {
        value,
        at: *p,
        target,
    })
}

#[derive(Debug, Clone, PartialEq)]
// states are 256 bytes, but interventions are few and short-lived
#[allow(clippy::large_enum_variant)]
pub enum InterventionMode {
    /// Swap the backing event for one backing `Some(state)`, or for none at all.
    ReplacePreparation(Option<PhotonPairState>),
    /// Re-set the analyzer; `None` means no measurement on that wing.
    SetAngle(Wing, Option<AnalyzerAngle>),
    /// Representable, never applicable.
    ForceOutcome(Wing, OutcomeLabel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    pub target: EventId,
    pub mode: InterventionMode,
}

impl Intervention {
    pub fn new(target: EventId, mode: InterventionMode) -> Self {
        Intervention { target, mode }
    }

    pub fn is_admissible(&self) -> bool {
        !matches!(self.mode, InterventionMode::ForceOutcome(..))
    }

    pub fn describe(&self) -> String {
        match &self.mode {
            InterventionMode::ReplacePreparation(Some(_)) => {
                format!("replace preparation `{}`", self.target)
            }
            InterventionMode::ReplacePreparation(None) => {
                format!("remove preparation `{}`", self.target)
            }
            InterventionMode::SetAngle(w, Some(a)) => {
                format!("set wing {w} analyzer to {}°", a.degrees())
            }
            InterventionMode::SetAngle(w, None) => format!("no measurement on wing {w}"),
            InterventionMode::ForceOutcome(w, o) => format!("force outcome {o} on wing {w}"),
        }
    }
}

/// The scenario that would obtain under `intervention`. Forcing an outcome
/// is refused with [`ChanceError::SenselessIntervention`].
pub fn apply_intervention(
    scenario: &Scenario,
    intervention: &Intervention,
) -> Result<Scenario, ChanceError> {
    if let InterventionMode::ForceOutcome(w, o) = intervention.mode {
        return Err(ChanceError::SenselessIntervention(format!(
            "the Born probability of outcome {o} on wing {w} cannot be altered by any intervention"
        )));
    }
    let event = scenario
        .event(&intervention.target)
        .ok_or_else(|| ChanceError::UnknownEvent(intervention.target.clone()))?;
    match (&intervention.mode, event.kind) {
        (InterventionMode::ReplacePreparation(Some(state)), EventKind::Preparation) => {
            Ok(scenario.with_state(state.clone()))
        }
        (InterventionMode::ReplacePreparation(None), EventKind::Preparation) => {
            let events = scenario
                .events()
                .iter()
                .filter(|e| e.id != event.id)
                .cloned()
                .collect();
            Ok(scenario.with_events(events)?)
        }
        (&InterventionMode::SetAngle(wing, angle), EventKind::Setting { wing: w, .. })
            if w == wing =>
        {
            let events = scenario
                .events()
                .iter()
                .filter(|e| {
                    angle.is_some()
                        || !matches!(e.kind, EventKind::Outcome { wing: ow, .. } if ow == wing)
                })
                .map(|e| {
                    let mut e = e.clone();
                    if e.id == event.id {
                        e.kind = EventKind::Setting { wing, angle };
                    }
                    e
                })
                .collect();
            Ok(scenario.with_events(events)?)
        }
        (mode, kind) => Err(ChanceError::InvalidIntervention(format!(
            "{mode:?} does not apply to event `{}` of kind {kind:?}",
            event.id
        ))),
    }
}

/// Estimate at `p` of the chance `target` will have once the other wing's
/// outcome is known, mixing over that outcome with Born weights.
///
/// Settings are taken from the (possibly intervened) scenario whether or not
/// they are accessible at `p`; the preparation must be accessible at `p`.
pub fn estimated_chance(
    p: &SpacetimePoint,
    target: Target,
    contemplated: Option<&Intervention>,
    scenario: &Scenario,
) -> Result<ChanceValue, ChanceError> {
    let scenario = match contemplated {
        Some(i) => apply_intervention(scenario, i)?,
        None => scenario.clone(),
    };
    let mut class = reference_class_at(p, &scenario);
    if let Some(value) = settled(&class, target) {
        return Ok(ChanceValue {
            value,
            at: *p,
            target,
        });
    }
    for wing in Wing::ALL {
        if let Some(e) = scenario.setting(wing) {
            if let EventKind::Setting { angle, .. } = e.kind {
                let access = angle.map_or(SettingAccess::NoMeasurement, SettingAccess::Angle);
                class = class.with_setting(wing, access);
            }
        }
    }
    let pending: Vec<Wing> = match target {
        Target::Outcome(w, _) => vec![w.other()],
        Target::Joint(..) => vec![],
    }
    .into_iter()
    .filter(|w| scenario.outcome(*w).is_some() && class.outcome(*w).is_none())
    .collect();

    let state = scenario.state();
    let value = match pending.as_slice() {
        [] => chance_from_class(state, &class, target)?,
        [other] => {
            let mut acc = 0.0;
            for y in OutcomeLabel::ALL {
                let weight = chance_from_class(state, &class, Target::Outcome(*other, y))?;
                if weight > 0.0 {
                    acc +=
                        weight * chance_from_class(state, &class.with_outcome(*other, y), target)?;
                }
            }
            acc
        }
        _ => unreachable!("at most one pending wing"),
    };
    Ok(ChanceValue {
        value,
        at: *p,
        target,
    })
}

/// Alternative interventions tried by [`causally_depends_with`].
#[derive(Debug, Clone)]
pub struct InterventionCatalog {
    pub preparations: Vec<Option<PhotonPairState>>,
    pub angles: Vec<Option<AnalyzerAngle>>,
}

impl Default for InterventionCatalog {
    /// Product eigenstates, `Φ⁻`, the maximally mixed state and no backing at
    /// all for preparations; a 1° grid plus "no measurement" for settings.
    fn default() -> Self {
        use OutcomeLabel::{H, V};
        let zero = AnalyzerAngle::from_degrees(0.0);
        let mut preparations: Vec<Option<PhotonPairState>> = [(H, H), (H, V), (V, H), (V, V)]
            .into_iter()
            .map(|(x, y)| Some(PhotonPairState::product_eigenstate(zero, x, zero, y)))
            .collect();
        let mut phi_minus = *bell_phi_plus().matrix();
        phi_minus[(0, 3)] = -phi_minus[(0, 3)];
        phi_minus[(3, 0)] = -phi_minus[(3, 0)];
        preparations.push(PhotonPairState::new(phi_minus).ok());
        let mixed = SingleWingState::maximally_mixed();
        preparations.push(Some(PhotonPairState::product(&mixed, &mixed)));
        preparations.push(None);

        let mut angles: Vec<Option<AnalyzerAngle>> = AnalyzerAngle::uniform_grid(180)
            .into_iter()
            .map(Some)
            .collect();
        angles.push(None);
        InterventionCatalog {
            preparations,
            angles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CausalVerdict {
    Dependent {
        intervention: String,
        actual: ChanceValue,
        counterfactual: ChanceValue,
    },
    Independent,
    SenselessIntervention,
}

pub fn causally_depends(
    effect: Target,
    cause: &EventId,
    scenario: &Scenario,
) -> Result<CausalVerdict, ChanceError> {
    causally_depends_with(effect, cause, scenario, &InterventionCatalog::default())
}

/// Interventionist test at probe point `r`: the effect depends on the cause
/// iff some admissible intervention on the cause changes the effect's chance
/// there.
pub fn causally_depends_with(
    effect: Target,
    cause: &EventId,
    scenario: &Scenario,
    catalog: &InterventionCatalog,
) -> Result<CausalVerdict, ChanceError> {
    let event = scenario
        .event(cause)
        .ok_or_else(|| ChanceError::UnknownEvent(cause.clone()))?;
    let interventions: Vec<Intervention> = match event.kind {
        EventKind::Outcome { wing, .. } => {
            if matches!(effect, Target::Outcome(w, _) if w == wing) {
                return Err(ChanceError::NotDistinct {
                    cause: cause.clone(),
                });
            }
            // the only conceivable intervention on an outcome forces it
            return Ok(CausalVerdict::SenselessIntervention);
        }
        EventKind::Preparation => catalog
            .preparations
            .iter()
            .map(|s| {
                Intervention::new(
                    cause.clone(),
                    InterventionMode::ReplacePreparation(s.clone()),
                )
            })
            .collect(),
        EventKind::Setting { wing, .. } => catalog
            .angles
            .iter()
            .map(|a| Intervention::new(cause.clone(), InterventionMode::SetAngle(wing, *a)))
            .collect(),
    };

    let probe = scenario.probes().r;
    let actual = chance_at(&probe, effect, scenario)?;
    for intervention in interventions.iter().filter(|i| i.is_admissible()) {
        let altered = apply_intervention(scenario, intervention)?;
        match chance_at(&probe, effect, &altered) {
            Ok(counterfactual) if (counterfactual.value - actual.value).abs() > COMPOSED_TOL => {
                return Ok(CausalVerdict::Dependent {
                    intervention: intervention.describe(),
                    actual,
                    counterfactual,
                });
            }
            Ok(_) | Err(ChanceError::NoChanceDefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(CausalVerdict::Independent)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadingOutcome {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Two readings of "the probability of an outcome is unaltered by the remote
/// outcome", reported side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCausalityReadings {
    /// `Pr_{a,b}(A) = Pr_{a,b}(A | B)` for the unconditional Born probabilities.
    pub conditional_equality: ReadingOutcome,
    /// At each probe point that cannot see the remote outcome, the chance is
    /// the same whichever remote outcome is recorded.
    pub chance_at_point: ReadingOutcome,
}

pub fn local_causality_readings(
    scenario: &Scenario,
) -> Result<LocalCausalityReadings, ChanceError> {
    let angle_of = |wing: Wing| match scenario.setting(wing).map(|e| e.kind) {
        Some(EventKind::Setting { angle: Some(a), .. }) => Ok(a),
        _ => Err(ChanceError::NoChanceDefined(format!(
            "wing {wing} has no analyzer angle"
        ))),
    };
    let (a, b) = (angle_of(Wing::A)?, angle_of(Wing::B)?);
    let state = scenario.state();

    let mut conditional = 0.0f64;
    for wing in Wing::ALL {
        let angle = if wing == Wing::A { a } else { b };
        let marginal = born_marginal(state, wing, angle);
        for y in OutcomeLabel::ALL {
            let cond = match born_conditional(state, a, b, (wing.other(), y)) {
                Ok(c) => c,
                Err(QError::UndefinedConditional { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            for x in OutcomeLabel::ALL {
                conditional = conditional.max((marginal.get(x) - cond.get(x)).abs());
            }
        }
    }

    let mut at_point = 0.0f64;
    let probes = scenario.probes();
    for point in [probes.p, probes.p_prime, probes.q, probes.r] {
        for wing in Wing::ALL {
            let Some(remote) = scenario.outcome(wing.other()) else {
                continue;
            };
            if causal_relation(&point, &remote.point) != CausalRelation::Spacelike {
                continue;
            }
            let mut flipped = scenario.events().to_vec();
            for e in flipped.iter_mut().filter(|e| e.id == remote.id) {
                if let EventKind::Outcome { wing: w, outcome } = e.kind {
                    e.kind = EventKind::Outcome {
                        wing: w,
                        outcome: outcome.flipped(),
                    };
                }
            }
            let flipped = scenario.with_events(flipped)?;
            for x in OutcomeLabel::ALL {
                let target = Target::Outcome(wing, x);
                match (
                    chance_at(&point, target, scenario),
                    chance_at(&point, target, &flipped),
                ) {
                    (Ok(c1), Ok(c2)) => at_point = at_point.max((c1.value - c2.value).abs()),
                    (
                        Err(ChanceError::NoChanceDefined(_)),
                        Err(ChanceError::NoChanceDefined(_)),
                    ) => {}
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
        }
    }

    let verdict = |d: f64| ReadingOutcome {
        holds: d <= COMPOSED_TOL,
        max_deviation: d,
    };
    Ok(LocalCausalityReadings {
        conditional_equality: verdict(conditional),
        chance_at_point: verdict(at_point),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::IDENTITY_TOL;
    use crate::spacetime::{
        outcome_id, setting_id, standard_scenario, ScenarioLayout, PREPARATION_ID,
    };

    fn overlap(a: f64, b: f64) -> Scenario {
        standard_scenario(&ScenarioLayout::overlap(a, b)).unwrap()
    }

    fn set_b(angle: Option<f64>) -> Intervention {
        Intervention::new(
            EventId::new(setting_id(Wing::B)),
            InterventionMode::SetAngle(Wing::B, angle.map(AnalyzerAngle::from_degrees)),
        )
    }

    #[test]
    fn reference_classes_at_probes() {
        let s = overlap(0.0, 30.0);
        let q = reference_class_at(&s.probes().q, &s);
        assert_eq!(q.outcome(Wing::B), Some(OutcomeLabel::V));
        assert_eq!(q.outcome(Wing::A), None);
        let p = reference_class_at(&s.probes().p, &s);
        assert!(p.has_preparation());
        assert!(p.setting(Wing::A).angle().is_some() && p.setting(Wing::B).angle().is_some());
        assert_eq!(p.outcome(Wing::A), None);
        assert_eq!(p.outcome(Wing::B), None);
        assert!(reference_class_at(&SpacetimePoint::new(-5.0, 0.0), &s).is_empty());
    }

    #[test]
    fn reference_class_rejects_outcome_without_setting() {
        let r = ReferenceClass::new(
            true,
            [SettingAccess::Inaccessible, SettingAccess::Inaccessible],
            [Some(OutcomeLabel::V), None],
        );
        assert!(r.is_err());
    }

    #[test]
    fn chances_at_probe_points() {
        let s = overlap(0.0, 30.0);
        let pr = *s.probes();
        for point in [pr.p, pr.p_prime, pr.r] {
            assert_eq!(chance_at(&point, Target::E_A, &s).unwrap().value, 0.5);
        }
        let q = chance_at(&pr.q, Target::E_A, &s).unwrap().value;
        assert!((q - 30f64.to_radians().cos().powi(2)).abs() < IDENTITY_TOL);
        let aligned = overlap(17.0, 17.0);
        assert!(
            (chance_at(&pr.q, Target::E_A, &aligned).unwrap().value - 1.0).abs() < IDENTITY_TOL
        );
        let joint = chance_at(&pr.r, Target::JOINT, &s).unwrap().value;
        assert!((joint - 0.5 * 30f64.to_radians().cos().powi(2)).abs() < IDENTITY_TOL);
    }

    #[test]
    fn settled_chances_are_zero_or_one() {
        let s = overlap(0.0, 30.0);
        let far = SpacetimePoint::new(100.0, 0.0);
        assert_eq!(chance_at(&far, Target::E_A, &s).unwrap().value, 1.0);
        assert_eq!(
            chance_at(&far, Target::Outcome(Wing::A, OutcomeLabel::H), &s)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(chance_at(&far, Target::JOINT, &s).unwrap().value, 1.0);
        // q sees B = V only; a joint with H_B is already excluded there
        let q = s.probes().q;
        assert_eq!(
            chance_at(&q, Target::Joint(OutcomeLabel::V, OutcomeLabel::H), &s)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn no_chance_without_preparation_or_setting() {
        let s = overlap(0.0, 30.0);
        let early = SpacetimePoint::new(-1.0, 0.0);
        assert!(matches!(
            chance_at(&early, Target::E_A, &s),
            Err(ChanceError::NoChanceDefined(_))
        ));
        // local settings: a is not visible from q
        let local = standard_scenario(&ScenarioLayout::default()).unwrap();
        assert!(matches!(
            chance_at(&local.probes().q, Target::E_A, &local),
            Err(ChanceError::NoChanceDefined(_))
        ));
    }

    #[test]
    fn estimated_chance_mixtures() {
        let s = overlap(0.0, 30.0);
        let pp = s.probes().p_prime;
        for b in [Some(0.0), Some(60.0), None] {
            let e = estimated_chance(&pp, Target::E_A, Some(&set_b(b)), &s).unwrap();
            assert!(
                (e.value - 0.5).abs() < IDENTITY_TOL,
                "b = {b:?}: {}",
                e.value
            );
        }
    }

    #[test]
    fn estimated_chance_refuses_forced_outcomes() {
        let s = overlap(0.0, 30.0);
        let force = Intervention::new(
            EventId::new(outcome_id(Wing::B)),
            InterventionMode::ForceOutcome(Wing::B, OutcomeLabel::H),
        );
        assert!(matches!(
            estimated_chance(&s.probes().p_prime, Target::E_A, Some(&force), &s),
            Err(ChanceError::SenselessIntervention(_))
        ));
    }

    #[test]
    fn interventions() {
        let s = overlap(0.0, 30.0);
        let hv = PhotonPairState::product_eigenstate(
            AnalyzerAngle::from_degrees(0.0),
            OutcomeLabel::H,
            AnalyzerAngle::from_degrees(0.0),
            OutcomeLabel::V,
        );
        let replaced = apply_intervention(
            &s,
            &Intervention::new(
                EventId::new(PREPARATION_ID),
                InterventionMode::ReplacePreparation(Some(hv)),
            ),
        )
        .unwrap();
        assert!(
            chance_at(&s.probes().r, Target::E_A, &replaced)
                .unwrap()
                .value
                .abs()
                < IDENTITY_TOL
        );

        let rotated = apply_intervention(&s, &set_b(Some(75.0))).unwrap();
        assert_eq!(
            chance_at(&s.probes().p, Target::E_A, &rotated)
                .unwrap()
                .value,
            0.5
        );

        let none = apply_intervention(&s, &set_b(None)).unwrap();
        assert!(none.outcome(Wing::B).is_none());

        let force = Intervention::new(
            EventId::new(outcome_id(Wing::B)),
            InterventionMode::ForceOutcome(Wing::B, OutcomeLabel::H),
        );
        assert!(!force.is_admissible());
        assert!(matches!(
            apply_intervention(&s, &force),
            Err(ChanceError::SenselessIntervention(_))
        ));

        let mismatched = Intervention::new(
            EventId::new(PREPARATION_ID),
            InterventionMode::SetAngle(Wing::A, None),
        );
        assert!(matches!(
            apply_intervention(&s, &mismatched),
            Err(ChanceError::InvalidIntervention(_))
        ));
        let missing = Intervention::new(
            EventId::new("nope"),
            InterventionMode::ReplacePreparation(None),
        );
        assert!(matches!(
            apply_intervention(&s, &missing),
            Err(ChanceError::UnknownEvent(_))
        ));
    }

    #[test]
    fn causal_verdicts() {
        let s = overlap(0.0, 30.0);
        let verdict = causally_depends(Target::E_A, &EventId::new(PREPARATION_ID), &s).unwrap();
        match verdict {
            CausalVerdict::Dependent {
                actual,
                counterfactual,
                ..
            } => {
                assert!((actual.value - counterfactual.value).abs() > COMPOSED_TOL)
            }
            other => panic!("expected dependence, got {other:?}"),
        }
        let ob = EventId::new(outcome_id(Wing::B));
        assert_eq!(
            causally_depends(Target::E_A, &ob, &s).unwrap(),
            CausalVerdict::SenselessIntervention
        );
        let oa = EventId::new(outcome_id(Wing::A));
        assert_eq!(
            causally_depends(Target::E_B, &oa, &s).unwrap(),
            CausalVerdict::SenselessIntervention
        );
        let sb = EventId::new(setting_id(Wing::B));
        assert_eq!(
            causally_depends(Target::E_A, &sb, &s).unwrap(),
            CausalVerdict::Independent
        );
        assert!(matches!(
            causally_depends(Target::JOINT, &sb, &s).unwrap(),
            CausalVerdict::Dependent { .. }
        ));
        assert!(matches!(
            causally_depends(Target::E_A, &oa, &s),
            Err(ChanceError::NotDistinct { .. })
        ));
    }

    #[test]
    fn readings_of_local_causality_differ() {
        let s = overlap(10.0, 10.0);
        let r = local_causality_readings(&s).unwrap();
        assert!(!r.conditional_equality.holds);
        assert!((r.conditional_equality.max_deviation - 0.5).abs() < IDENTITY_TOL);
        assert!(r.chance_at_point.holds);
        assert_eq!(r.chance_at_point.max_deviation, 0.0);
    }

    #[test]
    fn target_parsing() {
        assert_eq!("eA".parse::<Target>().unwrap(), Target::E_A);
        assert_eq!("joint".parse::<Target>().unwrap(), Target::JOINT);
        assert!("x".parse::<Target>().is_err());
    }
}
