//! `nanomag` — batch runner for nanosphere magnon-cavity experiments.
//!
//! ```text
//! nanomag <modes|spectrum|fieldmap|decay|transfer|coupling-sweep>
//!         [--config FILE] [--out DIR] [--format csv|json] [--threads N]
//!         [--KEY=VALUE ...]
//! ```
//!
//! Any `--KEY=VALUE` (or `--KEY VALUE`) whose key is not one of the runner's own
//! options overrides the configuration key of that name.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nanomagnonics::runner::{self, config::KEYS, Experiment, OutputFormat, RunOptions};
use nanomagnonics::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Modes,
    Spectrum,
    Fieldmap,
    Decay,
    Transfer,
    CouplingSweep,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Modes => Experiment::Modes,
            Command::Spectrum => Experiment::Spectrum,
            Command::Fieldmap => Experiment::Fieldmap,
            Command::Decay => Experiment::Decay,
            Command::Transfer => Experiment::Transfer,
            Command::CouplingSweep => Experiment::CouplingSweep,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "nanomag",
    version,
    about = "Magnon modes, spectral densities and spin dynamics of a ferrimagnetic nanosphere",
    after_help = "Configuration keys can be overridden as --KEY=VALUE, e.g. --R_nm=50 --mu0_H0_T=0.5.\n\
                  Exit status: 0 ok, 2 configuration error, 3 numerical failure."
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for sweeps (default: all cores); never changes results.
    #[arg(long)]
    threads: Option<usize>,
}

const OWN_OPTIONS: &[&str] = &["config", "out", "format", "threads", "help", "version"];

/// Splits configuration overrides out of the argument list.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), String> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    if let Some(program) = it.next() {
        rest.push(program);
    }
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if name.is_empty() || OWN_OPTIONS.contains(&name.as_str()) {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| format!("override --{name} needs a value"))?,
        };
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let (args, mut overrides) = match split_overrides(std::env::args().collect()) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let experiment: Experiment = cli.command.into();
    overrides.push(("experiment".to_string(), experiment.name().to_string()));

    let config_error = |err: Error| {
        eprintln!("error: {err}");
        if let Some(key) = match &err {
            Error::Config { key: Some(k), .. } => Some(k.clone()),
            _ => None,
        } {
            if !KEYS.iter().any(|(k, _)| *k == key) {
                let known: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
                eprintln!("known keys: {}", known.join(", "));
            }
        }
        if let Err(e) = runner::report_error(&cli.out, "config", &err) {
            eprintln!("warning: could not write error report: {e}");
        }
        ExitCode::from(err.exit_code() as u8)
    };

    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                return config_error(Error::Config {
                    key: None,
                    line: None,
                    message: format!("cannot read {}: {e}", path.display()),
                })
            }
        },
        None => String::new(),
    };
    let cfg = match runner::parse_config(&text, &overrides) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };

    let opts = RunOptions {
        out_dir: cli.out.clone(),
        format: match cli.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        threads: cli.threads,
    };
    match runner::run(&cfg, &opts) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!(
                "wrote {} and manifest.json to {}",
                outcome.manifest.outputs.join(", "),
                cli.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
