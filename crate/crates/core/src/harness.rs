//! Studies built from many runs: `eta` sweeps against the local limit, grid
//! refinement, and the uniform-data exchange oracle.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::diagnostics::{l1_distance, tv_bound, DiagnosticsRecord, TvBoundInputs};
use crate::error::{Error, Result};
use crate::grid::{Grid, LaneState};
use crate::scenario::{preset, Scenario, ScenarioName};
use crate::sim::{run_observed, Simulation, SimulationConfig, Snapshot};

/// One row of the L1 convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Row {
    pub eta: f64,
    pub t: f64,
    pub lanes: [f64; 2],
    pub sum: f64,
}

/// One row of the TV table; one per time step and `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvRow {
    pub eta: f64,
    pub t: f64,
    pub tv_w_sum: f64,
    pub tv_rho_sum: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SweepMember {
    pub eta: f64,
    /// Initial snapshot, then one per output time.
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// The local (`eta = 0`) run every member is compared with.
    pub reference: SweepMember,
    /// Sorted by decreasing `eta`.
    pub members: Vec<SweepMember>,
    pub l1_table: Vec<L1Row>,
    pub tv_table: Vec<TvRow>,
}

impl SweepResult {
    pub fn member(&self, eta: f64) -> Option<&SweepMember> {
        self.members.iter().find(|m| m.eta == eta)
    }
}

fn tv_row(eta: f64, config: &SimulationConfig, tv0: f64, rec: &DiagnosticsRecord) -> TvRow {
    TvRow {
        eta,
        t: rec.t,
        tv_w_sum: rec.tv_w_sum,
        tv_rho_sum: rec.tv_rho_sum(),
        bound: tv_bound(&TvBoundInputs::for_model(&config.model, tv0, rec.t)),
    }
}

/// Runs `scenario` for every `eta` (and always for the local limit) and
/// tabulates L1 distances to the local run and TV of the nonlocal term.
pub fn eta_sweep(scenario: &Scenario, eta_list: &[f64]) -> Result<SweepResult> {
    for &eta in eta_list {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
        }
    }
    let mut etas: Vec<f64> = eta_list.to_vec();
    etas.sort_by(|a, b| b.total_cmp(a));
    etas.dedup();

    let wrap = |eta: f64| move |e: Error| Error::Sweep { eta, source: Box::new(e) };
    let mut tv_table = Vec::new();
    let reference = sweep_member(scenario, 0.0, &mut tv_table).map_err(wrap(0.0))?;
    if !etas.contains(&0.0) {
        tv_table.clear();
    }

    let mut members = Vec::with_capacity(etas.len());
    let mut l1_table = Vec::new();
    let grid = scenario.grid()?;
    for &eta in &etas {
        let member = if eta == 0.0 {
            reference.clone()
        } else {
            sweep_member(scenario, eta, &mut tv_table).map_err(wrap(eta))?
        };
        for (snap, local) in member.snapshots.iter().zip(&reference.snapshots).skip(1) {
            let d = l1_distance(&snap.state, &local.state, &grid)?;
            l1_table.push(L1Row { eta, t: snap.state.t, lanes: d.lanes, sum: d.sum });
        }
        members.push(member);
    }
    // reference rows were pushed first; keep the table ordered like the members
    tv_table.sort_by(|a, b| b.eta.total_cmp(&a.eta));
    Ok(SweepResult { reference, members, l1_table, tv_table })
}

/// Runs one member, appending a TV row for the initial state and every step.
fn sweep_member(scenario: &Scenario, eta: f64, rows: &mut Vec<TvRow>) -> Result<SweepMember> {
    let config = scenario.config(eta)?;
    let head = Simulation::new(&config)?.record()?;
    let tv0 = head.tv_w_sum;
    rows.push(tv_row(eta, &config, tv0, &head));
    let snapshots = run_observed(&config, |sim| {
        rows.push(tv_row(eta, &config, tv0, &sim.record()?));
        Ok(())
    })?;
    Ok(SweepMember { eta, snapshots })
}

/// What a refinement study measures its errors against.
pub enum Reference<'a> {
    /// Each level against the next finer one, coarsened by cell averaging.
    SelfConvergence,
    /// Pointwise exact densities `(x, t) -> [rho1, rho2]`, cell-averaged.
    Analytic(&'a dyn Fn(f64, f64) -> [f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub n_cells: usize,
    pub dx: f64,
    /// L1 error summed over lanes at the final output time.
    pub error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
}

/// Averages groups of `factor` consecutive cells.
pub fn coarsen(state: &LaneState, factor: usize) -> Result<LaneState> {
    if factor == 0 || !state.n_cells().is_multiple_of(factor) {
        return Err(Error::NonNestedGrids(format!("{} cells cannot be grouped by {factor}", state.n_cells())));
    }
    let avg = |a: &[f64]| a.chunks(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect();
    LaneState::new(avg(&state.rho1), avg(&state.rho2), state.t)
}

const EXACT_SUBSAMPLES: usize = 32;

fn exact_averages(grid: &Grid, t: f64, exact: &dyn Fn(f64, f64) -> [f64; 2]) -> LaneState {
    let mut rho = [Vec::with_capacity(grid.n_cells()), Vec::with_capacity(grid.n_cells())];
    let h = grid.dx() / EXACT_SUBSAMPLES as f64;
    for j in 0..grid.n_cells() {
        let mut acc = [0.0; 2];
        for k in 0..EXACT_SUBSAMPLES {
            let v = exact(grid.interface(j) + (k as f64 + 0.5) * h, t);
            acc[0] += v[0];
            acc[1] += v[1];
        }
        rho[0].push(acc[0] / EXACT_SUBSAMPLES as f64);
        rho[1].push(acc[1] / EXACT_SUBSAMPLES as f64);
    }
    let [rho1, rho2] = rho;
    LaneState { rho1, rho2, t }
}

/// L1 errors and observed orders over the nested grids `n_list`. Self
/// convergence yields one row fewer than there are levels.
pub fn refinement_study<F>(make: F, n_list: &[usize], reference: Reference<'_>) -> Result<Vec<RefinementRow>>
where
    F: Fn(usize) -> Result<SimulationConfig>,
{
    if n_list.is_empty() {
        return Err(Error::NonNestedGrids("no grid sizes".into()));
    }
    for p in n_list.windows(2) {
        if !(p[1] > p[0] && p[1].is_multiple_of(p[0])) {
            return Err(Error::NonNestedGrids(format!("{} cells do not refine {} cells", p[1], p[0])));
        }
    }
    let mut finals = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let config = make(n)?;
        if config.grid.n_cells() != n {
            return Err(Error::NonNestedGrids(format!("builder for {n} cells returned {}", config.grid.n_cells())));
        }
        if let Some((g, _)) = finals.first() {
            let g: &Grid = g;
            if g.x_min() != config.grid.x_min() || g.x_max() != config.grid.x_max() {
                return Err(Error::NonNestedGrids("levels cover different domains".into()));
            }
        }
        let snaps = run_observed(&config, |_| Ok(()))?;
        let last = snaps.into_iter().next_back().expect("run returns the initial snapshot").state;
        finals.push((config.grid, last));
    }

    let mut rows: Vec<RefinementRow> = Vec::new();
    let levels = match reference {
        Reference::SelfConvergence => finals.len().saturating_sub(1),
        Reference::Analytic(_) => finals.len(),
    };
    for k in 0..levels {
        let (grid, state) = &finals[k];
        let target = match reference {
            Reference::SelfConvergence => {
                let (fine_grid, fine) = &finals[k + 1];
                coarsen(fine, fine_grid.n_cells() / grid.n_cells())?
            }
            Reference::Analytic(exact) => exact_averages(grid, state.t, exact),
        };
        let error = l1_distance(state, &target, grid)?.sum;
        let order = rows.last().map(|prev| {
            let ratio = grid.n_cells() as f64 / prev.n_cells as f64;
            libm::log(prev.error / error) / libm::log(ratio)
        });
        rows.push(RefinementRow { n_cells: grid.n_cells(), dx: grid.dx(), error, order });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeRow {
    pub dt: f64,
    /// Largest `|(rho1 - rho2) - 0.2 exp(-2t)|` over all steps and cells.
    pub max_error: f64,
}

/// Runs the uniform-data preset with fixed steps and compares the lane
/// difference with its exact exponential decay.
pub fn ode_oracle_check(t_end: f64, dt_list: &[f64]) -> Result<Vec<OdeRow>> {
    let scenario = preset(ScenarioName::UniformOde);
    let mut rows = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let mut config = scenario.default_config()?;
        config.out_times = alloc::vec![t_end];
        config.fixed_dt = Some(dt);
        let mut max_error: f64 = 0.0;
        run_observed(&config, |sim| {
            let s = sim.state();
            let exact = 0.2 * libm::exp(-2.0 * s.t);
            for (a, b) in s.rho1.iter().zip(&s.rho2) {
                max_error = max_error.max(libm::fabs(a - b - exact));
            }
            Ok(())
        })?;
        rows.push(OdeRow { dt, max_error });
    }
    Ok(rows)
}
