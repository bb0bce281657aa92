//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use bellsim_core::chance::{
    causally_depends, chance_at, estimated_chance, CausalVerdict, Intervention, InterventionMode,
    Target,
};
use bellsim_core::harness::{empirical_statistics, run_trials, ModelSelector, RunConfig, Schedule};
use bellsim_core::lhv::{builtin_vector_model, deterministic_chsh_maximum};
use bellsim_core::locality::{
    check_factorizability, check_outcome_independence, check_parameter_independence, chsh,
    no_signalling_deviation, ChshAngles, QuantumModel,
};
use bellsim_core::qcore::{AnalyzerAngle, OutcomeLabel, Wing};
use bellsim_core::spacetime::EventId;
use bellsim_core::spacetime::{
    causal_relation, outcome_id, setting_id, standard_scenario, CausalRelation, EventKind,
    Scenario, ScenarioLayout, SpacetimePoint, PREPARATION_ID,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ANALYTIC_TOL: f64 = 1e-9;
const CHANCE_TOL: f64 = 1e-12;
const CONDITION_TOL: f64 = 1e-12;
const QUADRATURE_TOL: f64 = 1e-6;
const SIGMAS: f64 = 4.0;
const EMPIRICAL_TRIALS: u64 = 100_000;
const META_SEEDS: u64 = 100;
const META_PASS_FRACTION: f64 = 0.99;
const RANDOM_QUADRUPLES: usize = 100;
const PERTURBATIONS: usize = 1000;
const BOOSTS: usize = 1000;

const ANALYTIC_BUDGET: Duration = Duration::from_millis(1);
const EMPIRICAL_BUDGET: Duration = Duration::from_secs(5);
const BOUND_BUDGET: Duration = Duration::from_millis(10);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn deg(d: f64) -> AnalyzerAngle {
    AnalyzerAngle::from_degrees(d)
}

fn tsirelson() -> f64 {
    2.0 * 2f64.sqrt()
}

fn analytic_chsh() -> Outcome {
    let qm = QuantumModel::phi_plus();
    let angles = ChshAngles::maximal_violation();
    let start = Instant::now();
    let value = chsh(&qm, &angles);
    let elapsed = start.elapsed();
    let ok = (value - tsirelson()).abs() <= ANALYTIC_TOL && elapsed < ANALYTIC_BUDGET;
    outcome(
        ok,
        format!(
            "CHSH = {value:.12} vs 2√2 = {:.12}, {elapsed:?}",
            tsirelson()
        ),
    )
}

fn empirical_run(seed: u64) -> (f64, f64) {
    let config = RunConfig::new(
        ModelSelector::Qm,
        Schedule::Chsh(ChshAngles::maximal_violation()),
        EMPIRICAL_TRIALS,
        seed,
    );
    let log = run_trials(&config, None).expect("valid config");
    let c = empirical_statistics(&log)
        .expect("nonempty log")
        .chsh
        .expect("CHSH schedule");
    (c.value, c.stderr)
}

fn empirical_chsh() -> Outcome {
    let start = Instant::now();
    let (value, stderr) = empirical_run(2024);
    let elapsed = start.elapsed();
    let single = (value - tsirelson()).abs() <= SIGMAS * stderr;
    let passing = (0..META_SEEDS)
        .filter(|&seed| {
            let (v, s) = empirical_run(seed);
            (v - tsirelson()).abs() <= SIGMAS * s
        })
        .count();
    let fraction = passing as f64 / META_SEEDS as f64;
    let ok = single && elapsed < EMPIRICAL_BUDGET && fraction >= META_PASS_FRACTION;
    outcome(
        ok,
        format!(
            "CHSH = {value:.5} ± {stderr:.5} at n = {EMPIRICAL_TRIALS} per pair ({elapsed:?}); \
             {passing}/{META_SEEDS} seeds within {SIGMAS}σ"
        ),
    )
}

fn random_quadruple(rng: &mut ChaCha8Rng) -> ChshAngles {
    let mut angle = || rng.random_range(-180.0..180.0);
    ChshAngles::from_degrees(angle(), angle(), angle(), angle())
}

fn classical_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let quadruples: Vec<ChshAngles> = (0..RANDOM_QUADRUPLES)
        .map(|_| random_quadruple(&mut rng))
        .collect();
    let start = Instant::now();
    let maxima: Vec<f64> = quadruples
        .iter()
        .map(|q| deterministic_chsh_maximum(q).0)
        .collect();
    let elapsed = start.elapsed();
    let exact = maxima.iter().filter(|&&m| m == 2.0).count();
    outcome(
        exact == RANDOM_QUADRUPLES && elapsed < BOUND_BUDGET,
        format!("max = 2 exactly for {exact}/{RANDOM_QUADRUPLES} quadruples, {elapsed:?}"),
    )
}

fn chance_table() -> Outcome {
    let mut failures = Vec::new();
    let check = |failures: &mut Vec<String>, label: String, got: Option<f64>, want: f64| match got {
        Some(v) if (v - want).abs() <= CHANCE_TOL => {}
        other => failures.push(format!("{label}: {other:?} ≠ {want}")),
    };
    let base = standard_scenario(&ScenarioLayout::overlap(0.0, 30.0)).expect("layout");
    let probes = *base.probes();
    for (name, point) in [("p", probes.p), ("p'", probes.p_prime), ("r", probes.r)] {
        check(
            &mut failures,
            name.to_string(),
            chance_at(&point, Target::E_A, &base).ok().map(|c| c.value),
            0.5,
        );
    }
    for (angle, want) in [
        (0.0, 1.0),
        (22.5, 0.853553390593),
        (45.0, 0.5),
        (60.0, 0.25),
        (90.0, 0.0),
    ] {
        let s = standard_scenario(&ScenarioLayout::overlap(0.0, angle)).expect("layout");
        let got = chance_at(&probes.q, Target::E_A, &s).ok().map(|c| c.value);
        let exact = f64::to_radians(angle).cos().powi(2);
        check(&mut failures, format!("q at ∠ab = {angle}°"), got, exact);
        // the printed table value, to its six decimals
        if got.is_none_or(|g| (g - want).abs() > 1e-6) {
            failures.push(format!("q at ∠ab = {angle}°: {got:?} vs table {want}"));
        }
    }
    let aligned = standard_scenario(&ScenarioLayout::overlap(37.0, 37.0)).expect("layout");
    check(
        &mut failures,
        "q aligned".into(),
        chance_at(&probes.q, Target::E_A, &aligned)
            .ok()
            .map(|c| c.value),
        1.0,
    );
    let ok = failures.is_empty();
    outcome(
        ok,
        if ok {
            "p, p′, r give ½; q gives cos²∠ab; aligned q gives 1".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn condition_signature() -> Outcome {
    let qm = QuantumModel::phi_plus();
    let grid = AnalyzerAngle::uniform_grid(36);
    let pi = check_parameter_independence(&qm, &grid, CONDITION_TOL).expect("grid");
    let oi = check_outcome_independence(&qm, &grid, CONDITION_TOL).expect("grid");
    let fac = check_factorizability(&qm, &grid, CONDITION_TOL).expect("grid");
    let ns = no_signalling_deviation(&qm, &grid).expect("grid");
    let aligned =
        |w: &Option<bellsim_core::locality::Witness>| w.as_ref().is_some_and(|w| w.a == w.b);
    let ok = pi.holds
        && pi.max_deviation <= CONDITION_TOL
        && !oi.holds
        && (oi.max_deviation - 0.5).abs() <= CONDITION_TOL
        && aligned(&oi.witness)
        && !fac.holds
        && (fac.max_deviation - 0.25).abs() <= CONDITION_TOL
        && aligned(&fac.witness)
        && ns <= CONDITION_TOL;
    outcome(
        ok,
        format!(
            "PI {:.1e}, OI {:.12}, factorizability {:.12}, no-signalling {ns:.1e}",
            pi.max_deviation, oi.max_deviation, fac.max_deviation
        ),
    )
}

fn set_b(angle: Option<AnalyzerAngle>) -> Intervention {
    Intervention::new(
        EventId::new(setting_id(Wing::B)),
        InterventionMode::SetAngle(Wing::B, angle),
    )
}

fn decision_invariance() -> Outcome {
    let a = 20.0;
    let s = standard_scenario(&ScenarioLayout::overlap(a, 50.0)).expect("layout");
    let pp = s.probes().p_prime;
    let mut contemplated: Vec<Option<AnalyzerAngle>> =
        vec![Some(deg(a)), Some(deg(a + 60.0)), None];
    contemplated.extend(AnalyzerAngle::uniform_grid(180).into_iter().map(Some));
    let mut worst = 0.0f64;
    let mut errors = 0;
    for b in &contemplated {
        match estimated_chance(&pp, Target::E_A, Some(&set_b(*b)), &s) {
            Ok(c) => worst = worst.max((c.value - 0.5).abs()),
            Err(_) => errors += 1,
        }
    }
    outcome(
        errors == 0 && worst <= CHANCE_TOL,
        format!(
            "{} contemplated settings, max |estimate − ½| = {worst:.1e}, {errors} errors",
            contemplated.len()
        ),
    )
}

fn intervention_semantics() -> Outcome {
    let s = standard_scenario(&ScenarioLayout::overlap(0.0, 22.5)).expect("layout");
    let on_o = causally_depends(Target::E_A, &EventId::new(PREPARATION_ID), &s);
    let on_outcome = causally_depends(Target::E_A, &EventId::new(outcome_id(Wing::B)), &s);
    let on_setting = causally_depends(Target::E_A, &EventId::new(setting_id(Wing::B)), &s);
    let witness = match &on_o {
        Ok(CausalVerdict::Dependent {
            intervention,
            actual,
            counterfactual,
        }) => Some(format!(
            "{intervention}: {} → {}",
            actual.value, counterfactual.value
        )),
        _ => None,
    };
    let ok = witness.is_some()
        && matches!(on_outcome, Ok(CausalVerdict::SenselessIntervention))
        && matches!(on_setting, Ok(CausalVerdict::Independent));
    outcome(
        ok,
        format!(
            "o: {}; e_B: {:?}; b-setting: {:?}",
            witness.unwrap_or_else(|| format!("{on_o:?}")),
            on_outcome,
            on_setting
        ),
    )
}

/// Moves the B setting and outcome to random places spacelike to `p`,
/// with random angle and outcome.
fn perturb_remote_wing(base: &Scenario, rng: &mut ChaCha8Rng) -> Scenario {
    let setting = SpacetimePoint::new(
        6.0 + rng.random_range(-1.0..1.0),
        4.0 + rng.random_range(0.0..2.0),
    );
    let result = SpacetimePoint::new(
        setting.t + 4.0 + rng.random_range(0.0..2.0),
        setting.x + rng.random_range(-2.0..2.0),
    );
    let angle = rng.random_range(0.0..180.0);
    let label = if rng.random_bool(0.5) {
        OutcomeLabel::V
    } else {
        OutcomeLabel::H
    };
    let events = base
        .events()
        .iter()
        .cloned()
        .map(|mut e| {
            match e.kind {
                EventKind::Setting { wing: Wing::B, .. } => {
                    e.point = setting;
                    e.kind = EventKind::Setting {
                        wing: Wing::B,
                        angle: Some(deg(angle)),
                    };
                }
                EventKind::Outcome { wing: Wing::B, .. } => {
                    e.point = result;
                    e.kind = EventKind::Outcome {
                        wing: Wing::B,
                        outcome: label,
                    };
                }
                _ => {}
            }
            e
        })
        .collect();
    base.with_events(events)
        .expect("perturbed scenario stays valid")
}

fn cone_dependence() -> Outcome {
    let base = standard_scenario(&ScenarioLayout::default()).expect("layout");
    let p = base.probes().p;
    let reference = chance_at(&p, Target::E_A, &base)
        .expect("chance at p")
        .value;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut changed = 0;
    let mut not_spacelike = 0;
    for _ in 0..PERTURBATIONS {
        let s = perturb_remote_wing(&base, &mut rng);
        for wing_event in [s.setting(Wing::B), s.outcome(Wing::B)]
            .into_iter()
            .flatten()
        {
            if causal_relation(&p, &wing_event.point) != CausalRelation::Spacelike {
                not_spacelike += 1;
            }
        }
        let v = chance_at(&p, Target::E_A, &s).map(|c| c.value);
        if v.map(f64::to_bits) != Ok(reference.to_bits()) {
            changed += 1;
        }
    }

    let mut points: Vec<SpacetimePoint> = base.events().iter().map(|e| e.point).collect();
    let pr = base.probes();
    points.extend([pr.p, pr.p_prime, pr.q, pr.r]);
    let mut flipped = 0;
    for _ in 0..BOOSTS {
        let v = rng.random_range(-0.95..0.95);
        let extra =
            SpacetimePoint::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let all: Vec<SpacetimePoint> = points.iter().copied().chain([extra]).collect();
        for x in &all {
            for y in &all {
                if causal_relation(x, y) != causal_relation(&x.boosted(v), &y.boosted(v)) {
                    flipped += 1;
                }
            }
        }
    }
    outcome(
        changed == 0 && not_spacelike == 0 && flipped == 0,
        format!(
            "{changed}/{PERTURBATIONS} remote perturbations changed Ch_p(e_A) = {reference}; \
             {flipped} causal verdicts changed under {BOOSTS} boosts"
        ),
    )
}

fn lhv_sanity() -> Outcome {
    let model = builtin_vector_model();
    let grid = AnalyzerAngle::uniform_grid(36);
    let reports = [
        check_parameter_independence(&model, &grid, CONDITION_TOL).expect("grid"),
        check_outcome_independence(&model, &grid, CONDITION_TOL).expect("grid"),
        check_factorizability(&model, &grid, CONDITION_TOL).expect("grid"),
    ];
    let local = reports.iter().all(|r| r.holds);
    let value = chsh(&model, &ChshAngles::maximal_violation());
    let target = 0.0;
    outcome(
        local && (value - target).abs() <= QUADRATURE_TOL,
        format!(
            "locality checks {}; CHSH = {value:.9}, expected {target} within {QUADRATURE_TOL}",
            if local { "hold" } else { "fail" }
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("analytic CHSH", analytic_chsh),
        ("empirical CHSH", empirical_chsh),
        ("classical bound", classical_bound),
        ("chance table", chance_table),
        ("condition signature", condition_signature),
        ("decision invariance", decision_invariance),
        ("intervention semantics", intervention_semantics),
        ("cone dependence", cone_dependence),
        ("LHV sanity", lhv_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let r = run();
        if !r.pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            i + 1,
            r.detail
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
