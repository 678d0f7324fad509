use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ilt_lab::{run, Experiment, ExperimentConfig, RunOptions};

/// Runs one ilt-lab experiment and writes its CSV tables.
#[derive(Debug, Parser)]
#[command(name = "ilt-lab", version)]
struct Args {
    /// specfun-check, phi, levy, sample, cm-check, dominance, simulate,
    /// compare, laplace-fit, excursions, trace or green
    experiment: String,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `workers`.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: $ILT_LAB_OUT, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match execute(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ilt-lab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(args: Args) -> Result<i32, ilt_lab::CliError> {
    let experiment: Experiment = args.experiment.parse()?;
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p, Some(experiment))?,
        None => ExperimentConfig::new(experiment),
    };
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let out = args
        .out
        .or_else(|| std::env::var_os("ILT_LAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let report = run(&cfg, &RunOptions::writing_to(out))?;
    for c in &report.checks {
        println!("{:<8} {:<40} {:>24} {}", if c.pass { "ok" } else { "FAIL" }, c.name, ilt_lab::output::format_num(c.value), c.threshold);
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(report.exit_code())
}
