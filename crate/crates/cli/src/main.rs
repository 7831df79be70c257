use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fieldroad_cli::{execute, parse_config, write_outputs, CliError, Command};

#[derive(Parser)]
#[command(name = "fieldroad", version, about = "Field-road diffusion experiments")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment document.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output_path` of the document.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` of the document.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

fn main_inner(args: &Args) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut spec = parse_config(&text)?;
    spec.command = args.command;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| spec.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.command.name())));
    spec.output_path = Some(out.display().to_string());
    let outcome = execute(&spec, args.verbose)?;
    let sidecar = write_outputs(&spec, &outcome, &out)?;
    if args.verbose {
        eprintln!("wrote {} and {}", out.display(), sidecar.display());
    }
    Ok(out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            match e {
                CliError::Schema { .. } | CliError::Range { .. } | CliError::Missing { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
