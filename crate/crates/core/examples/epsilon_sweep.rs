//! Runs one circle at three interface widths and fits decay exponents.

use phasefield::harness::{sweep, ScenarioConfig};

fn main() -> phasefield::Result<()> {
    let config = ScenarioConfig::from_toml(
        r#"
scenario = "circle-mcf"
dim = 2
extent = [2.0, 2.0]
cells = [200, 200]
epsilons = [0.16, 0.08, 0.04]
horizon = 0.02
output_interval = 0.002
battery_size = 6

[geometry]
kind = "ball"
center = [1.0, 1.0]
radius = 0.3

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.05
"#,
    )?;
    let dir = std::env::temp_dir().join("phasefield-sweep-example");
    let report = sweep(&config, Some(&dir))?;
    for row in &report.rows {
        println!("eps={:<5} discrepancy={:.3e} interface error={:.3e}", row.epsilon,
            row.discrepancy_l1.unwrap_or(f64::NAN), row.interface_error.unwrap_or(f64::NAN));
    }
    for fit in &report.fits {
        println!("{:<18} slope {:.2}  95% [{:.2}, {:.2}]", fit.metric, fit.slope, fit.ci_low, fit.ci_high);
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}
