use std::path::PathBuf;
use std::process::ExitCode;

use bellsim_core::chance::{causally_depends, chance_at, ChanceError, Target};
use bellsim_core::harness::{
    empirical_statistics, render_csv, render_json, run_trials, simulate, ModelSelector, RunConfig,
    Schedule,
};
use bellsim_core::lhv::{deterministic_chsh_maximum, deterministic_chsh_minimum};
use bellsim_core::locality::{check_no_signalling, chsh, parse_grid, ChshAngles};
use bellsim_core::qcore::{AnalyzerAngle, OutcomeLabel, IDENTITY_TOL};
use bellsim_core::spacetime::{
    standard_scenario, EventId, ProbeName, Scenario, ScenarioLayout, SpacetimePoint,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Chances, locality checks and CHSH experiments for entangled photon pairs.
///
/// Every subcommand prints JSON on stdout, except `simulate`, which prints
/// its CSV report when no report path is configured.
#[derive(Parser)]
#[command(name = "bellsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic CHSH value, and an empirical estimate when --trials is given.
    Chsh {
        /// qm, lhv, fixture or fixture:BIAS
        #[arg(long, default_value = "qm")]
        model: String,
        /// a,a',b,b' in degrees
        #[arg(long, default_value = "0,45,22.5,-22.5", allow_hyphen_values = true)]
        angles: String,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = bellsim_core::harness::config::DEFAULT_SEED)]
        seed: u64,
    },
    /// Chance of a target event at a probe point or at explicit coordinates.
    Chances {
        #[arg(long)]
        scenario: PathBuf,
        /// p, p', q, r or t,x
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// eA, eB or joint
        #[arg(long, default_value = "eA")]
        target: String,
    },
    /// Whether a target's chance at r depends on an event of the scenario.
    Depends {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "eA")]
        effect: String,
        /// Event id, e.g. o, setting-b, outcome-b
        #[arg(long)]
        cause: String,
    },
    /// Largest dependence of a prior-averaged marginal on the remote setting.
    Nosignal {
        #[arg(long, default_value = "qm")]
        model: String,
        /// N for N uniform angles, or a comma-separated list of degrees
        #[arg(long, default_value = "36", allow_hyphen_values = true)]
        grid: String,
    },
    /// Exact classical CHSH bound over all deterministic strategies.
    LhvBound {
        #[arg(long, default_value = "0,45,22.5,-22.5", allow_hyphen_values = true)]
        angles: String,
    },
    /// Run a JSON configuration, writing the trial log and report it names.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write one of the canonical scenarios as JSON.
    Scenario {
        #[arg(long, value_enum, default_value_t = Layout::Overlap)]
        layout: Layout,
        /// Setting a in degrees; omit the value with "none"
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "22.5", allow_hyphen_values = true)]
        b: String,
        /// V, H or none
        #[arg(long, default_value = "V")]
        outcome_a: String,
        #[arg(long, default_value = "V")]
        outcome_b: String,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Overlap,
    Local,
    LastMoment,
}

type CliResult = Result<Value, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Chsh {
            model,
            angles,
            trials,
            seed,
        } => cmd_chsh(&model, &angles, trials, seed),
        Command::Chances {
            scenario,
            point,
            target,
        } => cmd_chances(&scenario, &point, &target),
        Command::Depends {
            scenario,
            effect,
            cause,
        } => cmd_depends(&scenario, &effect, &cause),
        Command::Nosignal { model, grid } => cmd_nosignal(&model, &grid),
        Command::LhvBound { angles } => cmd_lhv_bound(&angles),
        Command::Simulate { config } => return cmd_simulate(&config),
        Command::Scenario {
            layout,
            a,
            b,
            outcome_a,
            outcome_b,
            out,
        } => cmd_scenario(layout, &a, &b, &outcome_a, &outcome_b, out),
    };
    match result {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&v).expect("JSON values serialize")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_angles(s: &str) -> Result<ChshAngles, String> {
    s.parse()
        .map_err(|e: bellsim_core::locality::LocalityError| e.to_string())
}

fn cmd_chsh(model: &str, angles: &str, trials: Option<u64>, seed: u64) -> CliResult {
    let selector = ModelSelector::parse(model).map_err(|e| e.to_string())?;
    let angles = parse_angles(angles)?;
    let built = selector.build().map_err(|e| e.to_string())?;
    let mut out = json!({
        "model": built.name(),
        "angles": angles,
        "analytic": chsh(built.as_ref(), &angles),
    });
    if let Some(n) = trials {
        let config = RunConfig::new(selector, Schedule::Chsh(angles), n, seed);
        let log = run_trials(&config, None).map_err(|e| e.to_string())?;
        let bundle = empirical_statistics(&log).map_err(|e| e.to_string())?;
        let estimate = bundle.chsh.expect("CHSH schedule yields an estimate");
        out["seed"] = json!(seed);
        out["trials_per_pair"] = json!(n);
        out["empirical"] = json!(estimate.value);
        out["stderr"] = json!(estimate.stderr);
    }
    Ok(out)
}

fn load_scenario(path: &std::path::Path) -> Result<Scenario, String> {
    bellsim_core::harness::load_scenario(path).map_err(|e| e.to_string())
}

fn parse_point(s: &str, scenario: &Scenario) -> Result<SpacetimePoint, String> {
    if let Some((t, x)) = s.split_once(',') {
        let coord = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad coordinate `{v}`"))
        };
        return Ok(SpacetimePoint::new(coord(t)?, coord(x)?));
    }
    let name: ProbeName = s.parse()?;
    Ok(scenario.probes().get(name))
}

fn cmd_chances(path: &std::path::Path, point: &str, target: &str) -> CliResult {
    let scenario = load_scenario(path)?;
    let at = parse_point(point, &scenario)?;
    let target: Target = target.parse()?;
    match chance_at(&at, target, &scenario) {
        Ok(c) => Ok(
            json!({ "point": point, "at": c.at, "target": target.to_string(), "chance": c.value }),
        ),
        Err(ChanceError::NoChanceDefined(why)) => Ok(json!({
            "point": point,
            "at": at,
            "target": target.to_string(),
            "chance": null,
            "reason": why,
        })),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_depends(path: &std::path::Path, effect: &str, cause: &str) -> CliResult {
    let scenario = load_scenario(path)?;
    let effect: Target = effect.parse()?;
    let verdict =
        causally_depends(effect, &EventId::new(cause), &scenario).map_err(|e| e.to_string())?;
    Ok(json!({ "effect": effect.to_string(), "cause": cause, "verdict": verdict }))
}

fn cmd_nosignal(model: &str, grid: &str) -> CliResult {
    let built = ModelSelector::parse(model)
        .and_then(|m| m.build())
        .map_err(|e| e.to_string())?;
    let grid = parse_grid(grid).map_err(|e| e.to_string())?;
    let report =
        check_no_signalling(built.as_ref(), &grid, IDENTITY_TOL).map_err(|e| e.to_string())?;
    serde_json::to_value(report).map_err(|e| e.to_string())
}

fn cmd_lhv_bound(angles: &str) -> CliResult {
    let angles = parse_angles(angles)?;
    let (max, arg_max) = deterministic_chsh_maximum(&angles);
    let (min, arg_min) = deterministic_chsh_minimum(&angles);
    Ok(json!({
        "angles": angles,
        "max": max,
        "max_strategy": arg_max,
        "min": min,
        "min_strategy": arg_min,
    }))
}

fn cmd_simulate(path: &std::path::Path) -> ExitCode {
    let run = || -> Result<(), String> {
        let config = RunConfig::load(path).map_err(|e| e.to_string())?;
        eprintln!("seed {}", config.seed);
        let (_, bundle) = simulate(&config).map_err(|e| e.to_string())?;
        if config.output.report.is_none() {
            let text = match config.output.format {
                bellsim_core::harness::ReportFormat::Csv => {
                    render_csv(&bundle).map_err(|e| e.to_string())?
                }
                bellsim_core::harness::ReportFormat::Json => render_json(&bundle),
            };
            print!("{text}");
        }
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn optional_angle(s: &str) -> Result<Option<AnalyzerAngle>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(AnalyzerAngle::from_degrees(v))),
        _ => Err(format!("bad angle `{s}`")),
    }
}

fn optional_outcome(s: &str) -> Result<Option<OutcomeLabel>, String> {
    match s {
        "V" | "v" => Ok(Some(OutcomeLabel::V)),
        "H" | "h" => Ok(Some(OutcomeLabel::H)),
        "none" => Ok(None),
        other => Err(format!("bad outcome `{other}` (expected V, H or none)")),
    }
}

fn cmd_scenario(
    layout: Layout,
    a: &str,
    b: &str,
    outcome_a: &str,
    outcome_b: &str,
    out: Option<PathBuf>,
) -> CliResult {
    let mut l = ScenarioLayout {
        settings_in_overlap: matches!(layout, Layout::Overlap),
        late_settings: matches!(layout, Layout::LastMoment),
        ..ScenarioLayout::default()
    };
    l.a = optional_angle(a)?;
    l.b = optional_angle(b)?;
    l.outcome_a = optional_outcome(outcome_a)?;
    l.outcome_b = optional_outcome(outcome_b)?;
    let scenario = standard_scenario(&l).map_err(|e| e.to_string())?;
    let value = serde_json::to_value(&scenario).map_err(|e| e.to_string())?;
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?;
            std::fs::write(&path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Value::Null)
        }
        None => Ok(value),
    }
}
