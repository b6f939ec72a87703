//! `hhg` — high-harmonic spectra of a strong-cw-driven 1D model atom,
//! cavity-free and inside single-mode cavities, with attosecond pulse-train
//! synthesis, parameter sweeps, an independent time-propagation oracle, and
//! per-figure reproduction presets.
//!
//! Exit codes: 0 success, 2 configuration error (including CLI misuse),
//! 3 numerical or runtime failure.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hhg_core::Error;

#[derive(Parser)]
#[command(
    name = "hhg",
    version,
    about = "High-harmonic spectra from a driven model atom, with and without cavities"
)]
struct Cli {
    /// TOML run configuration; production defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "seed_figure")]
    config: Option<PathBuf>,

    /// Directory artifacts are written into.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Disable the on-disk eigenstate cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Start from the built-in configuration of a figure panel. The preset
    /// TOML is written to the output directory; with no subcommand, that is
    /// all that happens.
    #[arg(long, global = true, value_enum, value_name = "PANEL")]
    seed_figure: Option<Panel>,

    #[command(subcommand)]
    command: Option<Command>,
}

/// Figure panels with built-in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Panel {
    A,
    B1,
    B2,
    B3,
    C1,
    C2,
    C3,
    C4,
    D1,
    D2,
}

impl Panel {
    fn name(self) -> &'static str {
        match self {
            Panel::A => "a",
            Panel::B1 => "b1",
            Panel::B2 => "b2",
            Panel::B3 => "b3",
            Panel::C1 => "c1",
            Panel::C2 => "c2",
            Panel::C3 => "c3",
            Panel::C4 => "c4",
            Panel::D1 => "d1",
            Panel::D2 => "d2",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dressed ground and excited resonances and report them.
    Eigen,
    /// Cavity-free harmonic spectrum of the dressed ground state.
    Spectrum,
    /// Single-cavity hybrid spectrum (uses the first [[cavity]] section).
    Cavity,
    /// Coherent spectrum of all configured cavities in a row.
    Chain,
    /// Total-intensity sweep over the (cavity frequency, coupling) grid.
    Sweep,
    /// Attosecond pulse train synthesized from the configured spectrum.
    Pulse,
    /// Independent time-propagation cross-check spectrum.
    Oracle,
    /// Re-create the artifact set of one figure panel from its preset.
    Reproduce {
        #[arg(value_enum)]
        panel: Panel,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidConfig(_) => 2u8,
                _ => 3u8,
            })
        }
    }
}

fn run(cli: Cli) -> hhg_core::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidConfig(vec![
                "--threads must be at least 1".to_string(),
            ]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(vec![format!("thread pool: {e}")]))?;
    }

    let cache_root = if cli.no_cache {
        None
    } else {
        Some(
            std::env::var_os("HHG_CACHE_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| cli.out.join("cache")),
        )
    };

    match (&cli.command, cli.seed_figure) {
        (None, None) => Err(Error::InvalidConfig(vec![
            "nothing to do: give a subcommand or --seed-figure PANEL".to_string(),
        ])),
        (None, Some(panel)) => {
            let text = config::preset_toml(panel.name()).expect("every panel has a preset");
            pipeline::write_preset(&cli.out, panel.name(), text)
        }
        (Some(Command::Reproduce { panel }), seed) => {
            if cli.config.is_some() || seed.is_some() {
                return Err(Error::InvalidConfig(vec![
                    "reproduce always runs its built-in preset; drop --config/--seed-figure"
                        .to_string(),
                ]));
            }
            let text = config::preset_toml(panel.name()).expect("every panel has a preset");
            pipeline::write_preset(&cli.out, panel.name(), text)?;
            let run_config = config::load(text)?;
            let ctx = pipeline::Context::new(run_config, cli.out.clone(), cache_root);
            pipeline::run_panel(&ctx, panel.name())
        }
        (Some(command), seed) => {
            let text: String = match (cli.config.as_ref(), seed) {
                (Some(path), None) => std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidConfig(vec![format!(
                        "cannot read config {}: {e}",
                        path.display()
                    )])
                })?,
                (None, Some(panel)) => {
                    let text =
                        config::preset_toml(panel.name()).expect("every panel has a preset");
                    pipeline::write_preset(&cli.out, panel.name(), text)?;
                    text.to_string()
                }
                (None, None) => String::new(),
                (Some(_), Some(_)) => unreachable!("clap rejects --config with --seed-figure"),
            };
            let run_config = config::load(&text)?;
            let ctx = pipeline::Context::new(run_config, cli.out.clone(), cache_root);
            match command {
                Command::Eigen => pipeline::run_eigen(&ctx, ""),
                Command::Spectrum => pipeline::run_spectrum(&ctx, ""),
                Command::Cavity => pipeline::run_cavity(&ctx, ""),
                Command::Chain => pipeline::run_chain(&ctx, ""),
                Command::Sweep => pipeline::run_sweep(&ctx, ""),
                Command::Pulse => pipeline::run_pulse(&ctx, ""),
                Command::Oracle => pipeline::run_oracle(&ctx, ""),
                Command::Reproduce { .. } => unreachable!("handled above"),
            }
        }
    }
}
