//! Drives the stepper by hand: a circle shrinking by curvature, compared with
//! r(t) = sqrt(r0^2 - 2t).

use phasefield::forcing::{ForcingAux, ForcingSpec};
use phasefield::grid::Grid;
use phasefield::potential::{well_prepared_initial, Geometry, ProfileSpec};
use phasefield::sharp::{extract_interface, interface_metrics, RadialOracle};
use phasefield::solver::{DtRule, Stepper, StepperConfig};

fn main() -> phasefield::Result<()> {
    let eps = 0.025;
    let grid = Grid::cube(2, 1.0, 160)?;
    let geometry = Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.3 };
    let u0 = well_prepared_initial(&ProfileSpec { epsilon: eps, geometry }, &grid)?;
    let config = StepperConfig::default().with_dt_rule(DtRule::Cfl { gamma_h: 0.2, gamma_eps: 0.05 });
    let stepper = Stepper::new(&grid, eps, config)?;
    let oracle = RadialOracle::new(2, 0.3, 0.0)?;

    let mut state = stepper.initial_state(u0);
    let every = (0.004 / stepper.dt()).round() as u64;
    while state.t < 0.03 {
        state = stepper.step(&state, &ForcingSpec::Zero, ForcingAux::default())?.state;
        if state.steps % every == 0 {
            let m = interface_metrics(&extract_interface(&state.u), 2)?;
            let exact = oracle.radius_at(state.t).radius().unwrap_or(0.0);
            let r = m.radius.unwrap_or(f64::NAN);
            println!("t={:.4}  r={r:.4}  exact={exact:.4}  length={:.4}", state.t, m.measure);
        }
    }
    Ok(())
}
