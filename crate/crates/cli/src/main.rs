use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qilab_cli::config::{parse_grid, parse_param, GridSpec};
use qilab_cli::{commands, emit, run, CliError, Format, SweepConfig, Threads};

#[derive(Debug, Parser)]
#[command(name = "qilab", version, about = "Parameter sweeps for quantum illumination, covert sensing and gain estimation")]
struct Args {
    /// One of: perfect-covert, covert-energy, covert-bound, gain-qfi, gain-mse,
    /// gain-threshold, ecb, spes, distinguish.
    subcommand: String,
    /// JSON sweep config; command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Worker threads, or `auto`.
    #[arg(long, value_parser = parse_threads)]
    threads: Option<Threads>,
    /// Scalar parameter NAME=VALUE.
    #[arg(long = "param", value_parser = parse_param_arg)]
    params: Vec<(String, f64)>,
    /// Grid NAME=START:STOP:COUNT[:log].
    #[arg(long = "grid", value_parser = parse_grid_arg)]
    grids: Vec<(String, GridSpec)>,
    /// First Gaussian state file (distinguish).
    #[arg(long)]
    state_a: Option<PathBuf>,
    /// Second Gaussian state file (distinguish).
    #[arg(long)]
    state_b: Option<PathBuf>,
    /// Reserved; accepted and ignored.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_param_arg(s: &str) -> Result<(String, f64), String> {
    parse_param(s).map_err(|e| e.to_string())
}

fn parse_grid_arg(s: &str) -> Result<(String, GridSpec), String> {
    parse_grid(s).map_err(|e| e.to_string())
}

fn build_config(args: Args) -> Result<SweepConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let c = SweepConfig::from_file(path)?;
            if !c.subcommand.is_empty() && c.subcommand != args.subcommand {
                return Err(CliError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    c.subcommand, args.subcommand
                )));
            }
            c
        }
        None => SweepConfig::default(),
    };
    cfg.subcommand = args.subcommand;
    for (name, v) in args.params {
        cfg.grids.remove(&name);
        cfg.params.insert(name, v);
    }
    for (name, g) in args.grids {
        cfg.params.remove(&name);
        cfg.grids.insert(name, g);
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if args.out.is_some() {
        cfg.output = args.out;
    }
    if args.state_a.is_some() {
        cfg.state_a = args.state_a;
    }
    if args.state_b.is_some() {
        cfg.state_b = args.state_b;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    Ok(cfg)
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let cfg = build_config(args)?;
    let ds = run(&cfg)?;
    let failed = ds.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("qilab: {failed} of {} rows failed; see the `error` column", ds.rows.len());
    }
    let bytes = emit(&ds, cfg.format)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("qilab: {e}");
            let names: Vec<&str> = commands::COMMANDS.iter().map(|c| c.name).collect();
            eprintln!("subcommands: {}", names.join(", "));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qilab: {e}");
            ExitCode::FAILURE
        }
    }
}
