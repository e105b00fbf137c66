//! Initial-data profiles and the named scenario presets.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{Grid, LaneState};
use crate::model::{LaneChange, ModelSpec, SourceSpec};
use crate::sim::SimulationConfig;
use crate::velocity::greenshields;

/// Constant `value` on `[from, to]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

impl Segment {
    pub fn new(from: f64, to: f64, value: f64) -> Self {
        Self { from, to, value }
    }
}

/// A lane's initial density, reduced to cell averages on a grid.
#[derive(Clone)]
pub enum Profile {
    /// Sum of constant segments (zero elsewhere); cells cut by a segment end
    /// get the overlap-weighted average.
    Piecewise(Vec<Segment>),
    /// Pointwise density, averaged per cell with 5-point Gauss-Legendre.
    Smooth(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Piecewise(s) => f.debug_tuple("Piecewise").field(s).finish(),
            Profile::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

const SNAP: f64 = 1e-9;

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Piecewise(vec![Segment::new(f64::NEG_INFINITY, f64::INFINITY, value)])
    }

    pub fn smooth<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Profile::Smooth(Arc::new(f))
    }

    pub fn cell_averages(&self, grid: &Grid) -> Vec<f64> {
        let dx = grid.dx();
        (0..grid.n_cells())
            .map(|j| {
                let (a, b) = (grid.interface(j), grid.interface(j + 1));
                match self {
                    Profile::Piecewise(segments) => segments
                        .iter()
                        .map(|s| {
                            // jumps within rounding of an interface count as on it
                            let frac = ((s.to.min(b) - s.from.max(a)) / dx).clamp(0.0, 1.0);
                            if frac < SNAP {
                                0.0
                            } else if frac > 1.0 - SNAP {
                                s.value
                            } else {
                                s.value * frac
                            }
                        })
                        .sum(),
                    Profile::Smooth(f) => {
                        let (mid, half) = (0.5 * (a + b), 0.5 * dx);
                        GAUSS5.iter().map(|(node, weight)| 0.5 * weight * f(mid + half * node)).sum()
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Fig1T03,
    Fig1T1,
    Fig2Tx,
    Fig3Tv,
    UniformOde,
    RiemannLocal,
    SZeroTv,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::Fig1T03,
        ScenarioName::Fig1T1,
        ScenarioName::Fig2Tx,
        ScenarioName::Fig3Tv,
        ScenarioName::UniformOde,
        ScenarioName::RiemannLocal,
        ScenarioName::SZeroTv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig1T03 => "fig1_t03",
            ScenarioName::Fig1T1 => "fig1_t1",
            ScenarioName::Fig2Tx => "fig2_tx",
            ScenarioName::Fig3Tv => "fig3_tv",
            ScenarioName::UniformOde => "uniform_ode",
            ScenarioName::RiemannLocal => "riemann_local",
            ScenarioName::SZeroTv => "s_zero_tv",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == name)
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    pub fn describe(self) -> &'static str {
        match self {
            ScenarioName::Fig1T03 => "two lanes, 0.6 ahead of 0 / 0.4 behind 0.1, exchange on [-2,2], T = 0.3",
            ScenarioName::Fig1T1 => "same data as fig1_t03, T = 1",
            ScenarioName::Fig2Tx => "same data, dense (t,x) output for eta in {0, 0.1, 0.005}",
            ScenarioName::Fig3Tv => "same data, total variation curves for eta in {0.1, 0.01, 0.005}",
            ScenarioName::UniformOde => "uniform 0.6 / 0.4 with constant exchange rate 1",
            ScenarioName::RiemannLocal => "local single-lane Riemann problem 0 | 0.6",
            ScenarioName::SZeroTv => "fig1 data without lane changing",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_DOMAIN: (f64, f64) = (-4.0, 4.0);
pub const DEFAULT_N_CELLS: usize = 1600;
pub const DEFAULT_CFL: f64 = 0.5;

/// Everything needed to run a configuration for one or more `eta`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: Option<ScenarioName>,
    pub domain: (f64, f64),
    pub n_cells: usize,
    pub initial: [Profile; 2],
    /// Model with the default `eta` used by single runs.
    pub model: ModelSpec,
    pub eta_list: Vec<f64>,
    pub out_times: Vec<f64>,
    pub cfl: f64,
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.0, self.domain.1, self.n_cells)
    }

    pub fn with_n_cells(mut self, n_cells: usize) -> Self {
        self.n_cells = n_cells;
        self
    }

    pub fn with_source(mut self, source: SourceSpec) -> Self {
        self.model.source = source;
        self
    }

    pub fn initial_state(&self) -> Result<LaneState> {
        let grid = self.grid()?;
        LaneState::new(self.initial[0].cell_averages(&grid), self.initial[1].cell_averages(&grid), 0.0)
    }

    /// Runnable configuration with the model's `eta` replaced.
    pub fn config(&self, eta: f64) -> Result<SimulationConfig> {
        Ok(SimulationConfig {
            grid: self.grid()?,
            initial: self.initial_state()?,
            model: self.model.with_eta(eta),
            out_times: self.out_times.clone(),
            cfl: self.cfl,
            fixed_dt: None,
        })
    }

    pub fn default_config(&self) -> Result<SimulationConfig> {
        self.config(self.model.eta)
    }
}

fn greenshields_pair() -> [crate::velocity::VelocityLaw; 2] {
    let v = greenshields(1.0, 1.0).expect("unit Greenshields parameters are valid");
    [v.clone(), v]
}

fn fig1_profiles() -> [Profile; 2] {
    [
        Profile::Piecewise(vec![Segment::new(0.0, f64::INFINITY, 0.6)]),
        Profile::Piecewise(vec![Segment::new(f64::NEG_INFINITY, 0.1, 0.4)]),
    ]
}

fn fig1_source() -> SourceSpec {
    SourceSpec::new(LaneChange::Indicator { a: -2.0, b: 2.0, scale: 1.0 }).expect("indicator has natural bounds")
}

fn grid_times(step: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64 * step).collect()
}

fn fig1(eta_list: Vec<f64>, out_times: Vec<f64>, name: ScenarioName) -> Scenario {
    Scenario {
        name: Some(name),
        domain: DEFAULT_DOMAIN,
        n_cells: DEFAULT_N_CELLS,
        initial: fig1_profiles(),
        model: ModelSpec::new(greenshields_pair(), [1.0, 1.0], fig1_source(), 0.1),
        eta_list,
        out_times,
        cfl: DEFAULT_CFL,
    }
}

/// Preset lookup by tag.
pub fn scenario(name: &str) -> Result<Scenario> {
    Ok(preset(ScenarioName::parse(name)?))
}

pub fn preset(name: ScenarioName) -> Scenario {
    let fig_etas = vec![0.1, 0.01, 0.005];
    match name {
        ScenarioName::Fig1T03 => fig1(fig_etas, vec![0.3], name),
        ScenarioName::Fig1T1 => fig1(fig_etas, vec![1.0], name),
        ScenarioName::Fig2Tx => fig1(vec![0.0, 0.1, 0.005], grid_times(0.02, 50), name),
        ScenarioName::Fig3Tv => fig1(fig_etas, grid_times(0.01, 100), name),
        ScenarioName::SZeroTv => {
            let mut s = fig1(fig_etas, grid_times(0.05, 20), name);
            s.model.source = SourceSpec::none();
            s
        }
        ScenarioName::UniformOde => Scenario {
            name: Some(name),
            domain: DEFAULT_DOMAIN,
            n_cells: 64,
            initial: [Profile::constant(0.6), Profile::constant(0.4)],
            model: ModelSpec::new(
                greenshields_pair(),
                [1.0, 1.0],
                SourceSpec::new(LaneChange::Constant(1.0)).expect("constant rate has natural bounds"),
                0.1,
            ),
            eta_list: vec![0.1],
            out_times: vec![1.0],
            cfl: DEFAULT_CFL,
        },
        ScenarioName::RiemannLocal => {
            let mut s = riemann(0.0, 0.6, vec![0.3, 1.0]);
            s.name = Some(name);
            s
        }
    }
}

/// Local single-lane Riemann problem `left | right` at `x = 0`, lane 2 empty.
pub fn riemann(left: f64, right: f64, out_times: Vec<f64>) -> Scenario {
    Scenario {
        name: None,
        domain: DEFAULT_DOMAIN,
        n_cells: DEFAULT_N_CELLS,
        initial: [
            Profile::Piecewise(vec![
                Segment::new(f64::NEG_INFINITY, 0.0, left),
                Segment::new(0.0, f64::INFINITY, right),
            ]),
            Profile::constant(0.0),
        ],
        model: ModelSpec::new(greenshields_pair(), [1.0, 1.0], SourceSpec::none(), 0.0),
        eta_list: vec![0.0],
        out_times,
        cfl: DEFAULT_CFL,
    }
}

/// Exact entropy solution of the Greenshields (`V = 1 - u`) Riemann problem.
pub fn greenshields_riemann_exact(left: f64, right: f64) -> Box<dyn Fn(f64, f64) -> f64 + Send + Sync> {
    let f = |u: f64| u * (1.0 - u);
    if left <= right {
        let speed = if right > left { (f(right) - f(left)) / (right - left) } else { 0.0 };
        Box::new(move |x, t| if x < speed * t { left } else { right })
    } else {
        // fan between characteristic speeds 1 - 2 left and 1 - 2 right
        Box::new(move |x, t| {
            if t <= 0.0 {
                return if x < 0.0 { left } else { right };
            }
            (0.5 * (1.0 - x / t)).clamp(right, left)
        })
    }
}
