//! 1+1 Minkowski geometry (c = 1), localized events and the canonical
//! two-wing experiment layouts.
//!
//! Light cones are closed: a lightlike-separated event counts as causally
//! accessible.
//!
//! Canonical coordinates used by [`standard_scenario`] (time `t`, space `x`):
//!
//! | event / probe        | overlap settings | local settings | last-moment settings |
//! |----------------------|------------------|----------------|----------------------|
//! | `o` (preparation)    | (0, 0)           | (0, 0)         | (0, 0)               |
//! | setting `a`          | (2, −1)          | (6, −4)        | (9.5, −5.8)          |
//! | setting `b`          | (2, 1)           | (6, 4)         | (9.5, 5.8)           |
//! | outcome `A` (region 1) | (10, −6)       | (10, −6)       | (10, −6)             |
//! | outcome `B` (region 2) | (10, 6)        | (10, 6)        | (10, 6)              |
//! | probe `p`            | (9.8, −5.9)      | (9.8, −5.9)    | (9.8, −5.9)          |
//! | probe `p′`           | (9.8, 5.9)       | (9.8, 5.9)     | (9.8, 5.9)           |
//! | probe `q`            | (12, 6)          | (12, 6)        | (12, 6)              |
//! | probe `r`            | (5, 0)           | (12, 0)        | (15.5, 0)            |
//!
//! Regions 3a/3b are not given coordinates of their own; settings placed
//! outside the overlap carry the label of their own wing's region.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{bell_phi_plus, AnalyzerAngle, OutcomeLabel, PhotonPairState, Wing};

/// Relative tolerance on the interval when deciding lightlike separation.
pub const LIGHTCONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpacetimeError {
    #[error("inconsistent layout: {0}")]
    InconsistentLayout(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub const fn new(t: f64, x: f64) -> Self {
        SpacetimePoint { t, x }
    }

    /// `(Δt)² − (Δx)²`; non-negative for causally connected points.
    pub fn interval_squared(&self, other: &SpacetimePoint) -> f64 {
        let dt = other.t - self.t;
        let dx = other.x - self.x;
        dt * dt - dx * dx
    }

    /// Coordinates in a frame moving with `velocity` (|velocity| < 1).
    pub fn boosted(&self, velocity: f64) -> SpacetimePoint {
        assert!(velocity.abs() < 1.0, "boost velocity must be below c");
        let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
        SpacetimePoint {
            t: gamma * (self.t - velocity * self.x),
            x: gamma * (self.x - velocity * self.t),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }
}

impl fmt::Display for SpacetimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, x={})", self.t, self.x)
    }
}

/// Where `q` lies relative to `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalRelation {
    CausalPast,
    CausalFuture,
    Spacelike,
}

/// Classifies `q` relative to `p`. Lightlike separation is causal, and a
/// point coincident with `p` is in its (closed) past.
pub fn causal_relation(p: &SpacetimePoint, q: &SpacetimePoint) -> CausalRelation {
    let dt = q.t - p.t;
    let dx = q.x - p.x;
    let s2 = dt * dt - dx * dx;
    let scale = dt * dt + dx * dx;
    if s2 >= -LIGHTCONE_TOL * scale {
        if dt <= 0.0 {
            CausalRelation::CausalPast
        } else {
            CausalRelation::CausalFuture
        }
    } else {
        CausalRelation::Spacelike
    }
}

/// True when `q` is in the closed backward light cone of `p`.
pub fn in_causal_past(p: &SpacetimePoint, q: &SpacetimePoint) -> bool {
    causal_relation(p, q) == CausalRelation::CausalPast
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    One,
    Two,
    ThreeA,
    ThreeB,
    Overlap,
    SourceWorldline,
}

impl RegionLabel {
    pub fn outcome_region(wing: Wing) -> RegionLabel {
        match wing {
            Wing::A => RegionLabel::One,
            Wing::B => RegionLabel::Two,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        EventId(id.into())
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// The event `o` backing the state assignment.
    Preparation,
    /// `angle: None` means no polarization measurement is made on that wing.
    Setting {
        wing: Wing,
        angle: Option<AnalyzerAngle>,
    },
    Outcome {
        wing: Wing,
        outcome: OutcomeLabel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: EventId,
    pub point: SpacetimePoint,
    pub region: RegionLabel,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl EventRecord {
    pub fn new(
        id: impl Into<String>,
        point: SpacetimePoint,
        region: RegionLabel,
        kind: EventKind,
    ) -> Self {
        EventRecord {
            id: EventId::new(id),
            point,
            region,
            kind,
        }
    }
}

/// Named probe points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoints {
    pub p: SpacetimePoint,
    pub p_prime: SpacetimePoint,
    pub q: SpacetimePoint,
    pub r: SpacetimePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeName {
    P,
    PPrime,
    Q,
    R,
}

impl FromStr for ProbeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p" => Ok(ProbeName::P),
            "p'" | "p_prime" | "pprime" => Ok(ProbeName::PPrime),
            "q" => Ok(ProbeName::Q),
            "r" => Ok(ProbeName::R),
            other => Err(format!("unknown probe point `{other}`")),
        }
    }
}

impl ProbePoints {
    pub fn get(&self, name: ProbeName) -> SpacetimePoint {
        match name {
            ProbeName::P => self.p,
            ProbeName::PPrime => self.p_prime,
            ProbeName::Q => self.q,
            ProbeName::R => self.r,
        }
    }
}

/// A photon-pair state together with the localized events of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioDocument", into = "ScenarioDocument")]
pub struct Scenario {
    state: PhotonPairState,
    events: Vec<EventRecord>,
    probes: ProbePoints,
}

impl Scenario {
    pub fn new(
        state: PhotonPairState,
        events: Vec<EventRecord>,
        probes: ProbePoints,
    ) -> Result<Self, SpacetimeError> {
        validate_events(&events)?;
        for (name, pt) in [
            ("p", probes.p),
            ("p'", probes.p_prime),
            ("q", probes.q),
            ("r", probes.r),
        ] {
            if !pt.is_finite() {
                return Err(SpacetimeError::InvalidScenario(format!(
                    "probe {name} is not finite"
                )));
            }
        }
        Ok(Scenario {
            state,
            events,
            probes,
        })
    }

    pub fn state(&self) -> &PhotonPairState {
        &self.state
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn probes(&self) -> &ProbePoints {
        &self.probes
    }

    pub fn event(&self, id: &EventId) -> Option<&EventRecord> {
        self.events.iter().find(|e| &e.id == id)
    }

    pub fn preparation(&self) -> Option<&EventRecord> {
        self.events
            .iter()
            .find(|e| e.kind == EventKind::Preparation)
    }

    pub fn setting(&self, wing: Wing) -> Option<&EventRecord> {
        self.events
            .iter()
            .find(|e| matches!(e.kind, EventKind::Setting { wing: w, .. } if w == wing))
    }

    pub fn outcome(&self, wing: Wing) -> Option<&EventRecord> {
        self.events
            .iter()
            .find(|e| matches!(e.kind, EventKind::Outcome { wing: w, .. } if w == wing))
    }

    /// Same events and probes, different state.
    pub fn with_state(&self, state: PhotonPairState) -> Scenario {
        Scenario {
            state,
            events: self.events.clone(),
            probes: self.probes,
        }
    }

    /// Replaces the event list, re-validating it.
    pub fn with_events(&self, events: Vec<EventRecord>) -> Result<Scenario, SpacetimeError> {
        Scenario::new(self.state.clone(), events, self.probes)
    }

    pub fn with_probes(&self, probes: ProbePoints) -> Scenario {
        Scenario {
            state: self.state.clone(),
            events: self.events.clone(),
            probes,
        }
    }

    /// Every point in the scenario, boosted into a frame moving with `velocity`.
    pub fn boosted(&self, velocity: f64) -> Scenario {
        let events = self
            .events
            .iter()
            .map(|e| EventRecord {
                point: e.point.boosted(velocity),
                ..e.clone()
            })
            .collect();
        let b = |p: SpacetimePoint| p.boosted(velocity);
        Scenario {
            state: self.state.clone(),
            events,
            probes: ProbePoints {
                p: b(self.probes.p),
                p_prime: b(self.probes.p_prime),
                q: b(self.probes.q),
                r: b(self.probes.r),
            },
        }
    }

    /// Ways in which the probe points miss their intended placement. Empty
    /// for every layout built by [`standard_scenario`].
    pub fn probe_geometry_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let pr = &self.probes;
        let sees = |at: &SpacetimePoint, e: Option<&EventRecord>| {
            e.is_some_and(|e| in_causal_past(at, &e.point))
        };
        let spacelike = |at: &SpacetimePoint, e: Option<&EventRecord>| {
            e.is_none_or(|e| causal_relation(at, &e.point) == CausalRelation::Spacelike)
        };
        let (out_a, out_b, prep) = (
            self.outcome(Wing::A),
            self.outcome(Wing::B),
            self.preparation(),
        );
        if !spacelike(&pr.p, out_b) {
            out.push("p is not spacelike to the B outcome".into());
        }
        if !spacelike(&pr.p_prime, out_a) {
            out.push("p' is not spacelike to the A outcome".into());
        }
        if out_b.is_some() && !sees(&pr.q, out_b) {
            out.push("q is not in the future of region 2".into());
        }
        if sees(&pr.q, out_a) {
            out.push("q is in the future of region 1".into());
        }
        if sees(&pr.r, out_a) || sees(&pr.r, out_b) {
            out.push("r is inside an outcome's future".into());
        }
        if prep.is_some() && !sees(&pr.r, prep) {
            out.push("r is outside the preparation's future".into());
        }
        out
    }
}

fn validate_events(events: &[EventRecord]) -> Result<(), SpacetimeError> {
    let invalid = |msg: String| Err(SpacetimeError::InvalidScenario(msg));
    let mut ids: Vec<&EventId> = events.iter().map(|e| &e.id).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return invalid(format!("duplicate event id `{}`", w[0]));
    }
    if let Some(e) = events.iter().find(|e| !e.point.is_finite()) {
        return invalid(format!("event `{}` has non-finite coordinates", e.id));
    }
    let count = |pred: &dyn Fn(&EventKind) -> bool| events.iter().filter(|e| pred(&e.kind)).count();
    if count(&|k| *k == EventKind::Preparation) > 1 {
        return invalid("more than one preparation event".into());
    }
    for wing in Wing::ALL {
        if count(&|k| matches!(k, EventKind::Setting { wing: w, .. } if *w == wing)) > 1 {
            return invalid(format!("more than one setting event on wing {wing}"));
        }
        if count(&|k| matches!(k, EventKind::Outcome { wing: w, .. } if *w == wing)) > 1 {
            return invalid(format!("more than one outcome event on wing {wing}"));
        }
    }
    for e in events {
        if let EventKind::Outcome { wing, .. } = e.kind {
            if e.region != RegionLabel::outcome_region(wing) {
                return invalid(format!(
                    "outcome `{}` on wing {wing} labelled {:?}",
                    e.id, e.region
                ));
            }
            let setting = events
                .iter()
                .find(|s| matches!(s.kind, EventKind::Setting { wing: w, .. } if w == wing));
            match setting {
                Some(s) if matches!(s.kind, EventKind::Setting { angle: Some(_), .. }) => {
                    if !in_causal_past(&e.point, &s.point) {
                        return invalid(format!(
                            "setting `{}` is not in the past of outcome `{}`",
                            s.id, e.id
                        ));
                    }
                }
                _ => {
                    return invalid(format!(
                        "outcome `{}` has no analyzer setting on wing {wing}",
                        e.id
                    ))
                }
            }
        }
    }
    Ok(())
}

/// Events whose points lie in the closed backward light cone of `p`.
pub fn backward_cone_contents<'s>(
    p: &SpacetimePoint,
    scenario: &'s Scenario,
) -> Vec<&'s EventRecord> {
    scenario
        .events
        .iter()
        .filter(|e| in_causal_past(p, &e.point))
        .collect()
}

/// Parameters for [`standard_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLayout {
    pub state: PhotonPairState,
    /// Settings in the overlap of both outcomes' backward cones.
    pub settings_in_overlap: bool,
    /// Settings made just before each outcome.
    pub late_settings: bool,
    pub a: Option<AnalyzerAngle>,
    pub b: Option<AnalyzerAngle>,
    pub outcome_a: Option<OutcomeLabel>,
    pub outcome_b: Option<OutcomeLabel>,
}

impl Default for ScenarioLayout {
    fn default() -> Self {
        ScenarioLayout {
            state: bell_phi_plus(),
            settings_in_overlap: false,
            late_settings: false,
            a: Some(AnalyzerAngle::from_degrees(0.0)),
            b: Some(AnalyzerAngle::from_degrees(22.5)),
            outcome_a: Some(OutcomeLabel::V),
            outcome_b: Some(OutcomeLabel::V),
        }
    }
}

impl ScenarioLayout {
    /// Settings fixed long before, in the overlap (the probe-point layout).
    pub fn overlap(a: f64, b: f64) -> Self {
        ScenarioLayout {
            settings_in_overlap: true,
            a: Some(AnalyzerAngle::from_degrees(a)),
            b: Some(AnalyzerAngle::from_degrees(b)),
            ..ScenarioLayout::default()
        }
    }

    pub fn last_moment(a: f64, b: f64) -> Self {
        ScenarioLayout {
            late_settings: true,
            a: Some(AnalyzerAngle::from_degrees(a)),
            b: Some(AnalyzerAngle::from_degrees(b)),
            ..ScenarioLayout::default()
        }
    }

    pub fn with_outcomes(mut self, a: Option<OutcomeLabel>, b: Option<OutcomeLabel>) -> Self {
        self.outcome_a = a;
        self.outcome_b = b;
        self
    }

    pub fn with_state(mut self, state: PhotonPairState) -> Self {
        self.state = state;
        self
    }
}

pub const PREPARATION_ID: &str = "o";

pub fn setting_id(wing: Wing) -> &'static str {
    match wing {
        Wing::A => "setting-a",
        Wing::B => "setting-b",
    }
}

pub fn outcome_id(wing: Wing) -> &'static str {
    match wing {
        Wing::A => "outcome-a",
        Wing::B => "outcome-b",
    }
}

/// Builds the canonical layout described in the module docs.
pub fn standard_scenario(layout: &ScenarioLayout) -> Result<Scenario, SpacetimeError> {
    if layout.settings_in_overlap && layout.late_settings {
        return Err(SpacetimeError::InconsistentLayout(
            "settings cannot be both in the overlap and made at the last moment".into(),
        ));
    }
    let (setting_t, setting_x, r) = if layout.settings_in_overlap {
        (2.0, 1.0, SpacetimePoint::new(5.0, 0.0))
    } else if layout.late_settings {
        (9.5, 5.8, SpacetimePoint::new(15.5, 0.0))
    } else {
        (6.0, 4.0, SpacetimePoint::new(12.0, 0.0))
    };

    let mut events = vec![EventRecord::new(
        PREPARATION_ID,
        SpacetimePoint::new(0.0, 0.0),
        RegionLabel::Overlap,
        EventKind::Preparation,
    )];
    let wings = [
        (Wing::A, -1.0, layout.a, layout.outcome_a),
        (Wing::B, 1.0, layout.b, layout.outcome_b),
    ];
    for (wing, side, angle, outcome) in wings {
        let region = if layout.settings_in_overlap {
            RegionLabel::Overlap
        } else {
            RegionLabel::outcome_region(wing)
        };
        events.push(EventRecord::new(
            setting_id(wing),
            SpacetimePoint::new(setting_t, side * setting_x),
            region,
            EventKind::Setting { wing, angle },
        ));
        if let Some(outcome) = outcome {
            if angle.is_none() {
                return Err(SpacetimeError::InconsistentLayout(format!(
                    "wing {wing} has an outcome but no measurement"
                )));
            }
            events.push(EventRecord::new(
                outcome_id(wing),
                SpacetimePoint::new(10.0, side * 6.0),
                RegionLabel::outcome_region(wing),
                EventKind::Outcome { wing, outcome },
            ));
        }
    }
    let probes = ProbePoints {
        p: SpacetimePoint::new(9.8, -5.9),
        p_prime: SpacetimePoint::new(9.8, 5.9),
        q: SpacetimePoint::new(12.0, 6.0),
        r,
    };
    Scenario::new(layout.state.clone(), events, probes)
}

/// On-disk form of a [`Scenario`]: the state as real and imaginary 4×4 parts
/// in the `{HH, HV, VH, VV}` basis, plus events and probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub state: StateDocument,
    pub events: Vec<EventRecord>,
    pub probes: ProbePoints,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDocument {
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl From<&PhotonPairState> for StateDocument {
    fn from(state: &PhotonPairState) -> Self {
        let m = state.matrix();
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        StateDocument { re, im }
    }
}

impl TryFrom<&StateDocument> for PhotonPairState {
    type Error = crate::qcore::QError;

    fn try_from(doc: &StateDocument) -> Result<Self, Self::Error> {
        PhotonPairState::new(Matrix4::from_fn(|i, j| {
            Complex64::new(doc.re[i][j], doc.im[i][j])
        }))
    }
}

impl From<Scenario> for ScenarioDocument {
    fn from(s: Scenario) -> Self {
        ScenarioDocument {
            state: StateDocument::from(&s.state),
            events: s.events,
            probes: s.probes,
        }
    }
}

impl TryFrom<ScenarioDocument> for Scenario {
    type Error = SpacetimeError;

    fn try_from(doc: ScenarioDocument) -> Result<Self, Self::Error> {
        let state = PhotonPairState::try_from(&doc.state)
            .map_err(|e| SpacetimeError::InvalidScenario(e.to_string()))?;
        Scenario::new(state, doc.events, doc.probes)
    }
}
