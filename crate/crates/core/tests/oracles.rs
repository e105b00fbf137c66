//! End-to-end runs compared with closed-form solutions.

use laneflow_core::harness::{ode_oracle_check, refinement_study, Reference};
use laneflow_core::scenario::{greenshields_riemann_exact, riemann};
use laneflow_core::{run, run_observed};

#[test]
fn rarefaction_fan_is_resolved() {
    let config = riemann(0.6, 0.0, vec![1.0]).default_config().unwrap();
    let snaps = run(&config).unwrap();
    let exact = greenshields_riemann_exact(0.6, 0.0);
    let grid = config.grid;
    let err: f64 =
        (0..grid.n_cells()).map(|j| (snaps[1].state.rho1[j] - exact(grid.cell_center(j), 1.0)).abs()).sum::<f64>()
            * grid.dx();
    assert!(err < 1e-2, "{err}");
}

#[test]
fn rarefaction_errors_shrink_under_refinement() {
    let fan = greenshields_riemann_exact(0.6, 0.0);
    let exact = move |x: f64, t: f64| [fan(x, t), 0.0];
    let make = |n: usize| riemann(0.6, 0.0, vec![1.0]).with_n_cells(n).default_config();
    let rows = refinement_study(make, &[200, 400, 800], Reference::Analytic(&exact)).unwrap();
    assert!(rows.windows(2).all(|p| p[1].error < p[0].error));
    // first order up to a logarithm on centred rarefactions
    assert!(rows.iter().filter_map(|r| r.order).all(|p| p > 0.6), "{rows:?}");
}

#[test]
fn shock_travels_at_rankine_hugoniot_speed() {
    let config = riemann(0.0, 0.6, vec![0.3, 1.0]).default_config().unwrap();
    let snaps = run(&config).unwrap();
    for snap in &snaps[1..] {
        let rho = &snap.state.rho1;
        let j = rho.iter().position(|&v| v >= 0.3).unwrap();
        let x = config.grid.cell_center(j - 1) + (0.3 - rho[j - 1]) / (rho[j] - rho[j - 1]) * config.grid.dx();
        assert!((x - 0.4 * snap.state.t).abs() <= 2.0 * config.grid.dx(), "t={} x={x}", snap.state.t);
    }
}

#[test]
fn godunov_steps_satisfy_cell_entropy_inequalities() {
    for (l, r) in [(0.6, 0.0), (0.0, 0.6), (0.9, 0.2)] {
        let config = riemann(l, r, vec![0.3, 1.0]).with_n_cells(400).default_config().unwrap();
        run_observed(&config, |sim| {
            let e = sim.last_entropy_residual()?.unwrap();
            assert!(e <= 1e-8, "{l}|{r} t={} residual {e}", sim.state().t);
            Ok(())
        })
        .unwrap();
    }
}

#[test]
fn exchange_matches_exponential_decay() {
    let rows = ode_oracle_check(1.0, &[1e-3, 5e-4, 2.5e-4]).unwrap();
    assert!(rows[0].max_error <= 2e-3);
    for p in rows.windows(2) {
        let ratio = p[0].max_error / p[1].max_error;
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }
}
