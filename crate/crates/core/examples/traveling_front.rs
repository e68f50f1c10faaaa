//! Constant forcing theta moves a planar front at speed theta.

use phasefield::harness::{execute, ScenarioConfig};

fn main() -> phasefield::Result<()> {
    for theta in [0.2, -0.2] {
        let config = ScenarioConfig::from_toml(&format!(
            r#"
scenario = "traveling-front"
dim = 1
extent = [2.0]
cells = [1024]
epsilons = [0.02]
horizon = 0.25
output_interval = 0.0125

[geometry]
kind = "plane"
point = [1.0]
normal = [-1.0]

[forcing]
theta = {theta}

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.05
"#
        ))?;
        let s = execute(&config, 0.02)?.summary;
        println!(
            "theta={theta:+}: speed {:+.4} (rms {:.1e})",
            s.metric("front_speed").unwrap_or(f64::NAN),
            s.metric("front_rms").unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
