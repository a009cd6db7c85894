use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use epswitch::config::{Format, Overrides, RunConfig};
use epswitch::{run, CliError, MANIFEST_NAME};

/// Exceptional-point scans, searches, loop tracking and switch experiments
/// for a driven, dissipative three-level system.
#[derive(Debug, Parser)]
#[command(name = "epswitch", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long, env = "EPSWITCH_CONFIG")]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, env = "EPSWITCH_OUTPUT")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, env = "EPSWITCH_FORMAT")]
    format: Option<Format>,
    /// Worker threads; 0 uses every core, 1 runs serially.
    #[arg(long, env = "EPSWITCH_WORKERS")]
    workers: Option<usize>,
    /// Which `[seeds]` entry `find-ep` starts from.
    #[arg(long, env = "EPSWITCH_SEED_SECTION")]
    seed_section: Option<String>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(dir) => {
            println!("{}", dir.join(MANIFEST_NAME).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    config.apply(&Overrides {
        output: args.output.clone(),
        format: args.format,
        workers: args.workers,
        seed_section: args.seed_section.clone(),
    });
    if config.output.is_none() {
        config.output = Some(PathBuf::from("out"));
    }
    run(&config)?;
    Ok(config.output.expect("set above"))
}
