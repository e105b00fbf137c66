//! TOML run configuration.
//!
//! A document either names a preset (`scenario = "fig1_t03"`) and optionally
//! overrides some of its fields, or describes a run inline. Unknown keys are
//! rejected. See `docs/config.md` for the schema.

use std::path::Path;

use laneflow_core::model::{validate_model_on, LANE_CHANGING, LANE_VELOCITIES, MAXIMUM_DENSITIES, NONLOCAL_IMPACT};
use laneflow_core::scenario::{preset, DEFAULT_CFL, DEFAULT_DOMAIN, DEFAULT_N_CELLS};
use laneflow_core::{
    greenshields, LaneChange, ModelSpec, Profile, Scenario, ScenarioName, Segment, SimulationConfig, SourceSpec,
};
use serde::Deserialize;

use crate::error::AppError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    domain: Option<[f64; 2]>,
    n_cells: Option<usize>,
    cfl: Option<f64>,
    rho_max: Option<[f64; 2]>,
    eta: Option<f64>,
    eta_list: Option<Vec<f64>>,
    out_times: Option<Vec<f64>>,
    lane1: Option<RawLane>,
    lane2: Option<RawLane>,
    lane_change: Option<RawLaneChange>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLane {
    /// Greenshields free-flow speed.
    v_free: Option<f64>,
    /// Density where the velocity vanishes; defaults to the lane's `rho_max`.
    rho_ref: Option<f64>,
    #[serde(default)]
    segments: Vec<RawSegment>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    from: Option<f64>,
    to: Option<f64>,
    value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawLaneChange {
    None,
    Indicator { a: f64, b: f64, scale: f64 },
    Constant { c: f64 },
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
}

impl RunConfig {
    pub fn from_preset(name: ScenarioName) -> Self {
        Self { scenario: preset(name) }
    }

    /// Configuration for a single run at the scenario's `eta`.
    pub fn simulation(&self) -> Result<SimulationConfig, AppError> {
        Ok(self.scenario.default_config()?)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        AppError::Config(msg) => AppError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, AppError> {
    // toml errors carry line, column and the offending key
    let raw: RawConfig = toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
    resolve(raw)
}

fn config_err(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}

fn resolve(raw: RawConfig) -> Result<RunConfig, AppError> {
    let mut scenario = match &raw.scenario {
        Some(name) => preset(ScenarioName::parse(name).map_err(|_| {
            let known: Vec<&str> = ScenarioName::ALL.iter().map(|n| n.as_str()).collect();
            config_err(format!("scenario: unknown preset {name:?}; expected one of {}", known.join(", ")))
        })?),
        None => blank_scenario(),
    };
    if raw.scenario.is_none() && raw.out_times.is_none() {
        return Err(config_err("out_times: required when no scenario is given"));
    }

    if let Some([a, b]) = raw.domain {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(config_err(format!("domain: need finite x_min < x_max, got [{a}, {b}]")));
        }
        scenario.domain = (a, b);
    }
    if let Some(n) = raw.n_cells {
        if n < 2 {
            return Err(config_err(format!("n_cells: need at least 2, got {n}")));
        }
        scenario.n_cells = n;
    }
    if let Some(cfl) = raw.cfl {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(config_err(format!("cfl: must lie in (0, 1], got {cfl}")));
        }
        scenario.cfl = cfl;
    }
    if let Some(rho_max) = raw.rho_max {
        scenario.model.rho_max = rho_max;
    }
    let check_eta = |key: &str, eta: f64| {
        if eta >= 0.0 && eta.is_finite() {
            Ok(eta)
        } else {
            Err(config_err(format!("{key}: eta must be ≥ 0, got {eta}")))
        }
    };
    if let Some(list) = &raw.eta_list {
        if list.is_empty() {
            return Err(config_err("eta_list: must not be empty"));
        }
        scenario.eta_list = list.iter().map(|&e| check_eta("eta_list", e)).collect::<Result<_, _>>()?;
    }
    match raw.eta {
        Some(eta) => {
            scenario.model.eta = check_eta("eta", eta)?;
            if raw.eta_list.is_none() {
                scenario.eta_list = vec![eta];
            }
        }
        None if raw.eta_list.is_some() && raw.scenario.is_none() => scenario.model.eta = scenario.eta_list[0],
        None => {}
    }
    if let Some(times) = raw.out_times {
        let mut last = 0.0;
        for &t in &times {
            if !(t.is_finite() && t >= last) {
                return Err(config_err(format!("out_times: must be finite, nonnegative and nondecreasing; got {t}")));
            }
            last = t;
        }
        scenario.out_times = times;
    }
    for (i, lane) in [&raw.lane1, &raw.lane2].into_iter().enumerate() {
        let Some(lane) = lane else { continue };
        let key = if i == 0 { "lane1" } else { "lane2" };
        let v_free = lane.v_free.unwrap_or(1.0);
        let rho_ref = lane.rho_ref.unwrap_or(scenario.model.rho_max[i]);
        scenario.model.velocity[i] =
            greenshields(v_free, rho_ref).map_err(|e| config_err(format!("{key}: {e}")))?;
        let mut segments = Vec::with_capacity(lane.segments.len());
        for (k, s) in lane.segments.iter().enumerate() {
            let seg = Segment::new(s.from.unwrap_or(f64::NEG_INFINITY), s.to.unwrap_or(f64::INFINITY), s.value);
            if !(seg.from < seg.to) || !seg.value.is_finite() {
                return Err(config_err(format!("{key}.segments[{k}]: need from < to and a finite value")));
            }
            segments.push(seg);
        }
        scenario.initial[i] = Profile::Piecewise(segments);
    }
    if let Some(lc) = raw.lane_change {
        scenario.model.source = match lc {
            RawLaneChange::None => SourceSpec::none(),
            RawLaneChange::Indicator { a, b, scale } => {
                if !(a <= b) {
                    return Err(config_err(format!("lane_change: need a <= b, got [{a}, {b}]")));
                }
                SourceSpec::new(LaneChange::Indicator { a, b, scale })?
            }
            RawLaneChange::Constant { c } => SourceSpec::new(LaneChange::Constant(c))?,
        };
    }
    let violations = validate_model_on(&scenario.model, scenario.domain);
    if let Some(v) = violations.first() {
        let key = match v.assumption {
            a if a == LANE_VELOCITIES => "lane1/lane2",
            a if a == MAXIMUM_DENSITIES => "rho_max",
            a if a == NONLOCAL_IMPACT => "eta",
            a if a == LANE_CHANGING => "lane_change",
            _ => "model",
        };
        let all: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(config_err(format!("{key}: {}", all.join("; "))));
    }
    let run = RunConfig { scenario };
    // surfaces profile and bound problems (e.g. densities above rho_max) before any output exists
    run.simulation()?.validate()?;
    Ok(run)
}

fn blank_scenario() -> Scenario {
    let v = greenshields(1.0, 1.0).expect("unit Greenshields parameters are valid");
    Scenario {
        name: None,
        domain: DEFAULT_DOMAIN,
        n_cells: DEFAULT_N_CELLS,
        initial: [Profile::Piecewise(Vec::new()), Profile::Piecewise(Vec::new())],
        model: ModelSpec::new([v.clone(), v], [1.0, 1.0], SourceSpec::none(), 0.0),
        eta_list: vec![0.0],
        out_times: Vec::new(),
        cfl: DEFAULT_CFL,
    }
}
