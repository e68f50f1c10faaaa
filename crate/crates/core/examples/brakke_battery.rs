//! Brakke-inequality slacks and the curvature pairing over a seeded battery
//! of test functions along a shrinking circle.

use phasefield::diagnostics::{Monitor, TestFunctionBattery};
use phasefield::forcing::{ForcingAux, ForcingSpec};
use phasefield::grid::Grid;
use phasefield::potential::{well_prepared_initial, Geometry, ProfileSpec};
use phasefield::solver::{DtRule, Stepper, StepperConfig};

fn main() -> phasefield::Result<()> {
    let eps = 0.04;
    let grid = Grid::cube(2, 1.0, 128)?;
    let geometry = Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.28 };
    let u0 = well_prepared_initial(&ProfileSpec { epsilon: eps, geometry }, &grid)?;
    let config = StepperConfig::default().with_dt_rule(DtRule::Cfl { gamma_h: 0.2, gamma_eps: 0.05 });
    let stepper = Stepper::new(&grid, eps, config)?;
    let horizon = 0.02;
    let battery = TestFunctionBattery::seeded(&grid, horizon, 11, 8);
    let mut state = stepper.initial_state(u0);
    let mut monitor = Monitor::new(&state, Some(battery));
    while state.t < horizon {
        let out = stepper.step(&state, &ForcingSpec::Zero, ForcingAux::default())?;
        monitor.observe(&state, &out, None);
        state = out.state;
    }
    for (k, slack) in monitor.brakke_slacks(state.tallies.budget.lambda).iter().enumerate() {
        println!("member {k}: slack {slack:+.4e}");
    }
    println!("curvature pairing {:.3e}", monitor.curvature_pairing(&state.u));
    println!("closure {:.3e}", monitor.closure(&state));
    Ok(())
}
