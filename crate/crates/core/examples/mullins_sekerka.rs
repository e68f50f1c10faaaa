//! Phase field coupled to a heat field: the enthalpy int(theta + G(u)) is
//! conserved and the coupled energy identity closes.

use phasefield::coupled::{ms_energy_identity, ms_step, MsState};
use phasefield::grid::{Grid, ScalarField};
use phasefield::potential::{well_prepared_initial, Geometry, ProfileSpec};
use phasefield::solver::{DtRule, Stepper, StepperConfig};

fn main() -> phasefield::Result<()> {
    let eps = 0.04;
    let grid = Grid::cube(2, 1.0, 128)?;
    let geometry = Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.25 };
    let u0 = well_prepared_initial(&ProfileSpec { epsilon: eps, geometry }, &grid)?;
    let config = StepperConfig::default().with_dt_rule(DtRule::Cfl { gamma_h: 0.2, gamma_eps: 0.05 });
    let stepper = Stepper::new(&grid, eps, config)?;
    let initial = MsState::new(stepper.initial_state(u0), ScalarField::constant(grid, 0.5))?;
    let mut state = initial.clone();
    for k in 1..=500 {
        state = ms_step(&stepper, &state)?.0;
        if k % 100 == 0 {
            println!(
                "t={:.4}  enthalpy={:.12}  total energy={:.6}  identity residual={:.2e}",
                state.t(),
                state.conserved(),
                state.total_energy(),
                ms_energy_identity(&initial, &state)
            );
        }
    }
    Ok(())
}
