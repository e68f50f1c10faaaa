use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phasefield::harness::{self, Assertion, RunStatus, ScenarioConfig};
use phasefield::Error;

#[derive(Parser)]
#[command(name = "phasefield", version, about = "Phase-field runs, epsilon sweeps and reports")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run a scenario once per listed epsilon.
    Run(Common),
    /// Run all epsilons in parallel and fit decay rates.
    Sweep(Common),
    /// Merge run or sweep directories into tables and a verdict.
    Report {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Exit with status 1 if any assertion failed.
        #[arg(long = "assert")]
        assert: bool,
        /// Run or sweep directories.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated epsilons replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Exit with status 1 if any assertion failed.
    #[arg(long = "assert")]
    assert: bool,
}

const ASSERTION_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const RUNTIME_FAILURE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Toml(_) | Error::Usage(_) | Error::Schema { .. } => CONFIG_ERROR,
        _ => RUNTIME_FAILURE,
    }
}

fn print_assertions(label: &str, assertions: &[Assertion]) {
    for a in assertions {
        let rel = match a.relation {
            harness::run::Relation::AtMost => "<=",
            harness::run::Relation::AtLeast => ">=",
        };
        println!(
            "{} {label} {}: {:.6e} {rel} {:.6e} (tolerance {:.1e})",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.measured,
            a.bound,
            a.tolerance
        );
    }
}

fn load(common: &Common) -> Result<(ScenarioConfig, PathBuf), Error> {
    let mut config = ScenarioConfig::load(&common.config).map_err(|e| match e {
        Error::Io(io) => Error::Usage(format!("cannot read {}: {io}", common.config.display())),
        other => other,
    })?;
    if let Some(eps) = &common.epsilon {
        config.epsilons = eps.clone();
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(config.scenario.name()));
    Ok((config, out))
}

fn run(common: &Common) -> Result<u8, Error> {
    let (config, out) = load(common)?;
    let warnings = config.check()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut code = 0;
    let many = config.epsilons.len() > 1;
    for &eps in &config.epsilons {
        let dir = if many { out.join(harness::sweep::run_name(eps)) } else { out.clone() };
        let summary = harness::run(&config, eps, &dir)?;
        let label = format!("eps={eps}");
        print_assertions(&label, &summary.assertions);
        if summary.status == RunStatus::Failed {
            eprintln!("{label}: run failed: {}", summary.error.as_deref().unwrap_or("unknown error"));
            code = RUNTIME_FAILURE;
        } else if common.assert && !summary.passed() && code == 0 {
            code = ASSERTION_FAILED;
        }
        println!("{label}: wrote {}", dir.display());
    }
    Ok(code)
}

fn sweep(common: &Common) -> Result<u8, Error> {
    let (config, out) = load(common)?;
    let report = harness::sweep(&config, Some(&out))?;
    let mut code = 0;
    for row in &report.rows {
        if row.status == RunStatus::Failed {
            eprintln!("eps={}: run failed: {}", row.epsilon, row.error.as_deref().unwrap_or("unknown error"));
            code = RUNTIME_FAILURE;
        }
    }
    for fit in &report.fits {
        println!("fit {}: slope {:.3} (95% interval {:.3} .. {:.3})", fit.metric, fit.slope, fit.ci_low, fit.ci_high);
    }
    print_assertions("sweep", &report.assertions);
    if code == 0 && common.assert && !(report.passed() && report.rows.iter().all(|r| r.passed)) {
        code = ASSERTION_FAILED;
    }
    println!("wrote {}", out.display());
    Ok(code)
}

fn report(out: &Path, inputs: &[PathBuf], assert: bool) -> Result<u8, Error> {
    let verdict = harness::report(inputs, out)?;
    for r in &verdict.runs {
        let state = if r.passed { "PASS" } else { "FAIL" };
        println!("{state} {} ({} rows) {}", r.name, r.rows, r.failed_assertions.join(" "));
    }
    let failed = verdict.runs.iter().any(|r| r.status == RunStatus::Failed);
    Ok(if failed {
        RUNTIME_FAILURE
    } else if assert && !verdict.all_passed {
        ASSERTION_FAILED
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.verb {
        Verb::Run(c) => run(c),
        Verb::Sweep(c) => sweep(c),
        Verb::Report { out, assert, inputs } => report(out, inputs, *assert),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
