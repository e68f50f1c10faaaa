//! A 3D sphere shrinks with r^2 = r0^2 - 4t.

use phasefield::harness::config::GeometrySection;
use phasefield::harness::{execute, ScenarioConfig, ScenarioKind};

fn main() -> phasefield::Result<()> {
    let mut config = ScenarioConfig::from_toml(
        r#"
scenario = "circle-mcf"
dim = 3
extent = [1.0, 1.0, 1.0]
cells = [64, 64, 64]
epsilons = [0.05]
horizon = 0.01
output_interval = 0.002
battery_size = 4

[geometry]
kind = "ball"
center = [0.5, 0.5, 0.5]
radius = 0.25

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.05
"#,
    )?;
    assert_eq!(config.scenario, ScenarioKind::CircleMcf);
    config.geometry = GeometrySection::Ball { center: vec![0.5; 3], radius: 0.25 };
    let run = execute(&config, 0.05)?;
    for r in &run.records {
        let exact = (0.25f64 * 0.25 - 4.0 * r.t).sqrt();
        println!("t={:.4}  r={:.4}  exact={exact:.4}", r.t, r.radius.unwrap_or(f64::NAN));
    }
    println!("max relative error {:.3}", run.summary.metric("interface_error").unwrap_or(f64::NAN));
    Ok(())
}
