//! Explicit first-order finite-volume updates.
//!
//! Nonlocal lanes use the upwind flux `F[j+1/2] = rho[j] * V(W_half[j])`, where
//! `W_half[j]` averages only cells strictly downstream of the interface. The
//! local limit uses the Godunov flux. The lane-change source is added in the
//! same explicit update (lane 1 gets `+dt*S`, lane 2 gets `-dt*S`).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Grid, LaneState};
use crate::kernel::{eval_cell_anchored_into, eval_interface_anchored_into, KernelWeights};
use crate::model::ModelSpec;
use crate::velocity::VelocityLaw;

/// Slack allowed around `[0, rho_max]` before a step is rejected.
pub const BOUND_TOL: f64 = 1e-10;

/// Stable step size for `model` on `grid`.
///
/// `dt = cfl * min(dx / c, 1 / (2 H m))` with `m = max(1/rho_max1, 1/rho_max2)`
/// and `c = max_i (sup V_i + rho_max_i * sup |V_i'|)`, the speed bound under
/// which the nonlocal upwind update is monotone in the upwind cell. It also
/// dominates `sup |f_i'|` for the Godunov flux. Returns [`Error::NoDynamics`]
/// when both limits are infinite.
pub fn cfl_dt(model: &ModelSpec, grid: &Grid, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let speed = (0..2)
        .map(|i| {
            let law = &model.velocity[i];
            let cap = model.rho_max[i];
            law.max_speed(cap) + cap * law.max_slope(cap)
        })
        .fold(0.0, f64::max);
    let convective = if speed > 0.0 { grid.dx() / speed } else { f64::INFINITY };
    let inv_cap = (1.0 / model.rho_max[0]).max(1.0 / model.rho_max[1]);
    let h = model.source.bounds.h;
    let source = if h > 0.0 { 1.0 / (2.0 * h * inv_cap) } else { f64::INFINITY };
    let dt = convective.min(source);
    if dt.is_infinite() {
        return Err(Error::NoDynamics);
    }
    Ok(cfl * dt)
}

/// Shortens `dt` so that `t + dt` lands exactly on `target`; a step that would
/// overshoot by less than a relative `1e-12` is also snapped to the target.
///
/// When a full step would leave a sliver shorter than `dt / 4`, the remainder
/// is split into two equal steps instead. Sliver steps are harmless for the
/// update but divide rounding noise by a tiny `dt` in per-step diagnostics.
pub fn clip_to_target(dt: f64, t: f64, target: f64) -> f64 {
    let remaining = target - t;
    if dt >= remaining - 1e-12 * dt {
        remaining
    } else if remaining < 1.25 * dt {
        0.5 * remaining
    } else {
        dt
    }
}

/// Godunov flux for `f(u) = u V(u)`: `min f` on `[ul, ur]` if `ul <= ur`,
/// `max f` on `[ur, ul]` otherwise.
pub fn godunov_flux(ul: f64, ur: f64, law: &VelocityLaw) -> Result<f64> {
    let cap = law.rho_ref();
    for u in [ul, ur] {
        if !(u >= -BOUND_TOL && u <= cap + BOUND_TOL) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Godunov flux input {u} outside [0, {cap}]"
            )));
        }
    }
    Ok(godunov(ul, ur, law))
}

#[inline]
pub(crate) fn godunov(ul: f64, ur: f64, law: &VelocityLaw) -> f64 {
    let (fl, fr) = (law.flux(ul), law.flux(ur));
    if ul <= ur {
        let mut best = fl.min(fr);
        if let Some(u) = law.interior_extremum(ul, ur, false) {
            best = best.min(law.flux(u));
        }
        best
    } else {
        let mut best = fl.max(fr);
        if let Some(u) = law.interior_extremum(ur, ul, true) {
            best = best.max(law.flux(u));
        }
        best
    }
}

/// Two-point numerical flux for the local update.
pub type TwoPointFlux = fn(f64, f64, &VelocityLaw) -> f64;

/// Per-step bookkeeping returned by [`Stepper::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// `dt * sum_lanes (F_left - F_right)`, the mass entering through the ends.
    pub boundary_inflow: f64,
}

/// Reusable buffers for stepping one model on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: ModelSpec,
    grid: Grid,
    kernel: Option<KernelWeights>,
    local_flux: TwoPointFlux,
    centers: Vec<f64>,
    flux: [Vec<f64>; 2],
    w_half: Vec<f64>,
    w_cell: [Vec<f64>; 2],
    source: Vec<f64>,
}

impl Stepper {
    pub fn new(model: &ModelSpec, grid: &Grid) -> Result<Self> {
        Self::with_local_flux(model, grid, godunov)
    }

    /// Local steps use `flux` instead of Godunov. Nonlocal steps are unaffected.
    pub fn with_local_flux(model: &ModelSpec, grid: &Grid, flux: TwoPointFlux) -> Result<Self> {
        if !(model.eta >= 0.0 && model.eta.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("eta must be >= 0, got {}", model.eta)));
        }
        let kernel = if model.is_local() { None } else { Some(KernelWeights::new(model.eta, grid.dx())?) };
        let n = grid.n_cells();
        Ok(Self {
            model: model.clone(),
            grid: *grid,
            kernel,
            local_flux: flux,
            centers: grid.centers(),
            flux: [vec![0.0; n + 1], vec![0.0; n + 1]],
            w_half: vec![0.0; n],
            w_cell: [vec![0.0; n], vec![0.0; n]],
            source: vec![0.0; n],
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Interface fluxes `F[0..=n]` of the last step for `lane` (0 or 1).
    pub fn last_fluxes(&self, lane: usize) -> &[f64] {
        &self.flux[lane]
    }

    /// Advances `state` in place by `dt`, then checks the box bounds.
    pub fn step(&mut self, state: &mut LaneState, dt: f64) -> Result<StepReport> {
        state.check_len(&self.grid)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("dt must be positive, got {dt}")));
        }
        let n = self.grid.n_cells();
        let lambda = dt / self.grid.dx();

        match self.kernel {
            Some(kw) => {
                for lane in 0..2 {
                    let rho = state.lane(lane);
                    let law = &self.model.velocity[lane];
                    let tail = rho[n - 1];
                    eval_interface_anchored_into(rho, &kw, tail, &mut self.w_half)?;
                    eval_cell_anchored_into(rho, &kw, tail, &mut self.w_cell[lane])?;
                    let f = &mut self.flux[lane];
                    // the ghost cell left of the domain sees exactly W at the left edge of cell 0
                    f[0] = rho[0] * law.evaluate(self.w_cell[lane][0]);
                    for j in 0..n {
                        f[j + 1] = rho[j] * law.evaluate(self.w_half[j]);
                    }
                }
                for j in 0..n {
                    self.source[j] = self.model.source_rate(
                        state.rho1[j],
                        state.rho2[j],
                        self.w_cell[0][j],
                        self.w_cell[1][j],
                        self.centers[j],
                    );
                }
            }
            None => {
                let flux = self.local_flux;
                for lane in 0..2 {
                    let rho = state.lane(lane);
                    let law = &self.model.velocity[lane];
                    let f = &mut self.flux[lane];
                    f[0] = flux(rho[0], rho[0], law);
                    for j in 0..n - 1 {
                        f[j + 1] = flux(rho[j], rho[j + 1], law);
                    }
                    f[n] = flux(rho[n - 1], rho[n - 1], law);
                }
                for j in 0..n {
                    let (r1, r2) = (state.rho1[j], state.rho2[j]);
                    self.source[j] = self.model.source_rate(r1, r2, r1, r2, self.centers[j]);
                }
            }
        }

        let [f1, f2] = &self.flux;
        for j in 0..n {
            let s = dt * self.source[j];
            state.rho1[j] = state.rho1[j] - lambda * (f1[j + 1] - f1[j]) + s;
            state.rho2[j] = state.rho2[j] - lambda * (f2[j + 1] - f2[j]) - s;
        }
        state.t += dt;
        let boundary_inflow = dt * ((f1[0] - f1[n]) + (f2[0] - f2[n]));
        state.check_bounds(self.model.rho_max, BOUND_TOL)?;
        Ok(StepReport { dt, boundary_inflow })
    }
}

/// One nonlocal step (requires `eta > 0`).
pub fn nonlocal_step(state: &LaneState, model: &ModelSpec, grid: &Grid, dt: f64) -> Result<LaneState> {
    if model.is_local() {
        return Err(Error::NonpositiveEta(model.eta));
    }
    let mut next = state.clone();
    Stepper::new(model, grid)?.step(&mut next, dt)?;
    Ok(next)
}

/// One local Godunov step; the model's `eta` is ignored.
pub fn local_step(state: &LaneState, model: &ModelSpec, grid: &Grid, dt: f64) -> Result<LaneState> {
    let mut next = state.clone();
    Stepper::new(&model.with_eta(0.0), grid)?.step(&mut next, dt)?;
    Ok(next)
}
