//! A planar optimal profile in 1D stays put: energy c0, no drift, equipartition.

use phasefield::harness::config::GeometrySection;
use phasefield::harness::{execute, ScenarioConfig};

fn main() -> phasefield::Result<()> {
    let mut config = ScenarioConfig::from_toml(
        r#"
scenario = "standing-profile"
dim = 1
extent = [1.0]
cells = [1024]
epsilons = [0.02]
horizon = 0.02
output_interval = 0.002

[geometry]
kind = "plane"
point = [0.5]
normal = [1.0]

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.05
"#,
    )?;
    config.geometry = GeometrySection::Plane { point: vec![0.4], normal: vec![1.0] };
    let run = execute(&config, 0.02)?;
    for r in &run.records {
        println!("t={:.4}  E={:.10}  discrepancy={:.3e}", r.t, r.energy, r.discrepancy_l1);
    }
    println!("c0 = {:.10}", phasefield::potential::c0());
    for a in &run.summary.assertions {
        println!("{:<22} {:>12.4e}  {}", a.name, a.measured, if a.passed { "ok" } else { "FAILED" });
    }
    Ok(())
}
