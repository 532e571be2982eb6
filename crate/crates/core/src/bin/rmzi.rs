//! `rmzi <experiment> --config <path> [--override key=value]... [--out-dir <path>]`
//!
//! Exit status: 0 success, 2 configuration error, 3 infeasible, 4 numerical
//! failure. Failures also print a one-line JSON error record on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rmzi::experiments::{run, Experiment};
use rmzi::Error;

#[derive(Parser, Debug)]
#[command(name = "rmzi", version, about = "PPLN ring / MZI frequency-converter experiments")]
struct Cli {
    /// spectrum | couplings | match | convert | noise | tradeoff | calibrate
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Dotted `section.key=value` or a unique bare `key=value`; repeatable.
    #[arg(long = "override", visible_alias = "overrides", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn fail(err: &Error) -> ExitCode {
    let record = serde_json::json!({
        "error": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    });
    eprintln!("{record}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("RMZI_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // 0 keeps rayon's automatic choice.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let experiment: Experiment = match cli.experiment.parse() {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    match run(&cli.config, experiment, &cli.overrides, &cli.out_dir) {
        Ok(record) => {
            for warning in &record.warnings {
                eprintln!("warning: {warning}");
            }
            for file in &record.outputs {
                println!("{}", cli.out_dir.join(file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
