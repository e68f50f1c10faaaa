//! Grain boundary motion driven by a concentration field: F never increases
//! and int c is conserved.

use phasefield::coupled::{free_energy, grain_step, GrainState, DEFAULT_MOBILITY_FLOOR};
use phasefield::grid::{Grid, ScalarField};
use phasefield::linalg::CgSettings;
use phasefield::potential::{well_prepared_initial, Geometry, ProfileSpec};
use phasefield::solver::{DtRule, Stepper, StepperConfig};

fn main() -> phasefield::Result<()> {
    let eps = 0.04;
    let grid = Grid::cube(2, 1.0, 96)?;
    let geometry = Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.3 };
    let u0 = well_prepared_initial(&ProfileSpec { epsilon: eps, geometry }, &grid)?;
    let c0 = ScalarField::from_fn(grid, |x| 0.5 * (std::f64::consts::PI * x[0]).cos());
    let config = StepperConfig::default().with_dt_rule(DtRule::Cfl { gamma_h: 0.2, gamma_eps: 0.05 });
    let stepper = Stepper::new(&grid, eps, config)?;
    let mut state = GrainState::new(stepper.initial_state(u0), c0, DEFAULT_MOBILITY_FLOOR)?;
    let mut last = free_energy(&state.phase.u, &state.c, eps);
    for k in 1..=200 {
        state = grain_step(&stepper, &state, CgSettings::default())?.0;
        let f = free_energy(&state.phase.u, &state.c, eps);
        assert!(f <= last + 1e-9 * last.abs(), "free energy rose at step {k}");
        last = f;
        if k % 40 == 0 {
            println!("t={:.4}  F={f:.8}  mass={:.3e}", state.t(), state.mass());
        }
    }
    Ok(())
}
