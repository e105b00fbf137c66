//! Time integration to a list of output times, with diagnostics attached to
//! every snapshot.

use alloc::format;
use alloc::vec::Vec;

use crate::diagnostics::{entropy_residual, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{Grid, LaneState};
use crate::kernel::{Anchoring, KernelWeights, NonlocalField};
use crate::model::ModelSpec;
use crate::scheme::{cfl_dt, clip_to_target, Stepper, BOUND_TOL};

/// Kruzhkov levels, as fractions of the largest maximal density.
pub const KRUZHKOV_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub initial: LaneState,
    pub model: ModelSpec,
    /// Nondecreasing, nonnegative output times.
    pub out_times: Vec<f64>,
    pub cfl: f64,
    /// Overrides the CFL step (the last step before an output time is still shortened).
    pub fixed_dt: Option<f64>,
}

impl SimulationConfig {
    pub fn new(grid: Grid, initial: LaneState, model: ModelSpec, out_times: Vec<f64>, cfl: f64) -> Self {
        Self { grid, initial, model, out_times, cfl, fixed_dt: None }
    }

    /// Everything that can be rejected before the first step.
    pub fn validate(&self) -> Result<()> {
        self.initial.check_len(&self.grid)?;
        self.model.ensure_valid_on((self.grid.x_min(), self.grid.x_max()))?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("fixed dt must be positive, got {dt}")));
            }
        }
        if self.initial.t != 0.0 {
            return Err(Error::InvalidTimes(format!("initial state must sit at t = 0, got {}", self.initial.t)));
        }
        let mut last = 0.0;
        for &t in &self.out_times {
            if !(t.is_finite() && t >= last) {
                return Err(Error::InvalidTimes(format!(
                    "output times must be finite, nonnegative and nondecreasing; got {t} after {last}"
                )));
            }
            last = t;
        }
        if self.initial.rho1.iter().chain(&self.initial.rho2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial data must be finite".into()));
        }
        self.initial.check_bounds(self.model.rho_max, BOUND_TOL).map_err(|e| match e {
            Error::BoundViolation { lane, cell, value, .. } => Error::InvalidParameter(format!(
                "initial density {value} in lane {lane}, cell {cell} lies outside [0, rho_max]"
            )),
            other => other,
        })
    }
}

/// State at an output time with its nonlocal field (absent for local runs).
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: LaneState,
    pub field: Option<NonlocalField>,
    pub record: DiagnosticsRecord,
}

/// A running integration. Deterministic: the same configuration always
/// produces bit-identical states.
#[derive(Debug, Clone)]
pub struct Simulation {
    stepper: Stepper,
    state: LaneState,
    prev: Option<(LaneState, f64)>,
    kernel: Option<KernelWeights>,
    dt: Option<f64>,
    mass0: f64,
    inflow: f64,
    steps: usize,
}

impl Simulation {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let dt = match config.fixed_dt {
            Some(dt) => Some(dt),
            None => match cfl_dt(&config.model, &config.grid, config.cfl) {
                Ok(dt) => Some(dt),
                Err(Error::NoDynamics) => None,
                Err(e) => return Err(e),
            },
        };
        let kernel = if config.model.is_local() {
            None
        } else {
            Some(KernelWeights::new(config.model.eta, config.grid.dx())?)
        };
        Ok(Self {
            stepper: Stepper::new(&config.model, &config.grid)?,
            state: config.initial.clone(),
            prev: None,
            kernel,
            dt,
            mass0: config.initial.total_mass(config.grid.dx()),
            inflow: 0.0,
            steps: 0,
        })
    }

    pub fn state(&self) -> &LaneState {
        &self.state
    }

    pub fn model(&self) -> &ModelSpec {
        self.stepper.model()
    }

    pub fn grid(&self) -> &Grid {
        self.stepper.grid()
    }

    /// Nominal step size; `None` when nothing moves and a single step spans each interval.
    pub fn nominal_dt(&self) -> Option<f64> {
        self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// State before the last step, with that step's size.
    pub fn previous(&self) -> Option<(&LaneState, f64)> {
        self.prev.as_ref().map(|(s, dt)| (s, *dt))
    }

    /// Initial mass plus everything that has entered through the boundary.
    pub fn expected_mass(&self) -> f64 {
        self.mass0 + self.inflow
    }

    pub fn field(&self) -> Result<Option<NonlocalField>> {
        self.kernel
            .map(|kw| NonlocalField::compute(&self.state.rho1, &self.state.rho2, &kw, Anchoring::CellAnchored))
            .transpose()
    }

    /// Diagnostics of the current state, without the entropy residual.
    pub fn record(&self) -> Result<DiagnosticsRecord> {
        let field = self.field()?;
        Ok(DiagnosticsRecord::measure(&self.state, field.as_ref(), self.grid(), self.expected_mass()))
    }

    /// Largest residual of the last step over the Kruzhkov levels and lanes.
    pub fn last_entropy_residual(&self) -> Result<Option<f64>> {
        let Some((before, dt)) = &self.prev else { return Ok(None) };
        let scale = self.model().rho_max_norm();
        let mut worst = f64::NEG_INFINITY;
        for frac in KRUZHKOV_LEVELS {
            let r = entropy_residual(before, &self.state, self.model(), self.grid(), *dt, frac * scale)?;
            worst = worst.max(r[0]).max(r[1]);
        }
        Ok(Some(worst))
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        let field = self.field()?;
        let mut record = DiagnosticsRecord::measure(&self.state, field.as_ref(), self.grid(), self.expected_mass());
        record.entropy_residual_max = self.last_entropy_residual()?;
        Ok(Snapshot { state: self.state.clone(), field, record })
    }

    /// One step of at most the nominal size, landing exactly on `target`.
    pub fn step_toward(&mut self, target: f64) -> Result<f64> {
        let remaining = target - self.state.t;
        let dt = match self.dt {
            Some(dt) => clip_to_target(dt, self.state.t, target),
            None => remaining,
        };
        let before = self.state.clone();
        let report = self.stepper.step(&mut self.state, dt)?;
        if dt == remaining {
            self.state.t = target;
        }
        self.inflow += report.boundary_inflow;
        self.prev = Some((before, dt));
        self.steps += 1;
        Ok(dt)
    }

    /// Steps until `t == target`, calling `on_step` after every step.
    pub fn advance_to<F>(&mut self, target: f64, mut on_step: F) -> Result<()>
    where
        F: FnMut(&Simulation) -> Result<()>,
    {
        while self.state.t < target {
            self.step_toward(target)?;
            on_step(self)?;
        }
        Ok(())
    }
}

/// Initial snapshot followed by one snapshot per output time.
pub fn run(config: &SimulationConfig) -> Result<Vec<Snapshot>> {
    run_observed(config, |_| Ok(()))
}

/// As [`run`], calling `on_step` after every time step.
pub fn run_observed<F>(config: &SimulationConfig, mut on_step: F) -> Result<Vec<Snapshot>>
where
    F: FnMut(&Simulation) -> Result<()>,
{
    let mut sim = Simulation::new(config)?;
    let mut out = Vec::with_capacity(config.out_times.len() + 1);
    out.push(sim.snapshot()?);
    for &t in &config.out_times {
        sim.advance_to(t, &mut on_step)?;
        out.push(sim.snapshot()?);
    }
    Ok(out)
}
