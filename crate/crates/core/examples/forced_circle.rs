//! With theta = 2 the radius r* = 1/2 is stationary but repelling: circles
//! starting on either side move away from it.

use phasefield::harness::{execute, ScenarioConfig};
use phasefield::sharp::RadialOracle;

fn main() -> phasefield::Result<()> {
    for r0 in [0.4, 0.6] {
        let config = ScenarioConfig::from_toml(&format!(
            r#"
scenario = "circle-forced"
dim = 2
extent = [2.0, 2.0]
cells = [160, 160]
epsilons = [0.05]
horizon = 0.1
output_interval = 0.02
allow_extinction = true

[geometry]
kind = "ball"
center = [1.0, 1.0]
radius = {r0}

[forcing]
theta = 2.0

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.05
"#
        ))?;
        let oracle = RadialOracle::new(2, r0, 2.0)?;
        for r in execute(&config, 0.05)?.records {
            let exact = oracle.radius_at(r.t).radius().unwrap_or(0.0);
            println!("r0={r0} t={:.3} r={:.4} sharp={exact:.4}", r.t, r.radius.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
