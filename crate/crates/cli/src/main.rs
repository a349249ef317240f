//! `kinproof` command-line front end.
//!
//! Parameters come from defaults, then an optional `--config` file of
//! `key = value` lines, then repeated `--set key=value` overrides, then the
//! dedicated flags. Every subcommand writes CSV into the output directory and,
//! with `--svg`, a line plot. Failures print a JSON record on stderr and exit
//! with 2 (config), 3 (numeric) or 4 (verification).

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinproof::pde::PdeKind;

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "kinproof", version, about = "Kinetic-proofreading models: exact solves, asymptotics and checks")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Worker threads for parallel sweeps (0 uses every core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write SVG line plots.
    #[arg(long, global = true)]
    svg: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form exponents, prefactors and regime for the configured parameters.
    Report,
    /// Exact response probability of the finite ladder.
    Pres,
    /// Response probability over the σ grid, one CSV per entry of `deltas`.
    Sweep,
    /// Critical Δ_c(σ) over the σ grid.
    Phase,
    /// Half-line ratio along the ray k = θτ for each τ in `taus`.
    Halfline,
    /// Enlarged network integrated from the frozen state, with external fluxes.
    Enlarged,
    /// Long-time shape of the first transport equation.
    Pde1,
    /// Long-time shape of the second transport equation.
    Pde2,
    /// Steady profile and exponent of a modified network (`variant` key).
    Variant,
    /// Monte Carlo estimates of p_res at each of `mc_sigmas`.
    Mc,
    /// Full acceptance suite with a summary table.
    Verify,
    /// Print the effective configuration in `key = value` form.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.svg |= cli.svg;
    Ok(cfg)
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> (Result<Output, CliError>, Option<CliError>) {
    match cmd {
        Command::Report => (commands::report(cfg), None),
        Command::Pres => (commands::pres(cfg), None),
        Command::Sweep => (commands::sweep(cfg), None),
        Command::Phase => (commands::phase(cfg), None),
        Command::Halfline => (commands::halfline(cfg), None),
        Command::Enlarged => (commands::enlarged(cfg), None),
        Command::Pde1 => (commands::pde(cfg, PdeKind::Pde1), None),
        Command::Pde2 => (commands::pde(cfg, PdeKind::Pde2), None),
        Command::Variant => (commands::variant(cfg), None),
        Command::Mc => (commands::mc(cfg), None),
        Command::Verify => {
            let (out, err) = commands::verify(cfg);
            (Ok(out), err)
        }
        Command::Config => (Ok(Output { files: Vec::new(), stdout: cfg.serialize() }), None),
    }
}

fn write(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    if !out.files.is_empty() {
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| CliError::Config(format!("output directory {}: {e}", cfg.out_dir.display())))?;
        for (name, contents) in &out.files {
            std::fs::write(cfg.out_dir.join(name), contents)?;
        }
    }
    print!("{}", out.stdout);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load(&cli)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    }
    let (out, late) = dispatch(cli.command, &cfg);
    write(&cfg, &out?)?;
    late.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
