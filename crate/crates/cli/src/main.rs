use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fluxshift::config::RunConfig;
use fluxshift::sweep::{Normalization, OrderPolicy};
use fluxshift::PhotonMode;

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "fluxshift",
    version,
    about = "Drive-shifted flux qubit spectroscopy simulator"
)]
struct Cli {
    /// JSON run configuration; nominal device defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true, env = "FLUXSHIFT_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    order: Option<OrderArg>,
    #[arg(long, global = true)]
    normalize: Option<NormalizeArg>,
    #[arg(long, global = true)]
    mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
    Mixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Column,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    FixedN,
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckArg {
    Population,
    Shift,
    Transmission,
    Sidebands,
    Rates,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Levels ±Ω_R/2 and ⟨σ_z⟩ over bias and drive amplitude.
    Levels,
    /// |t| over bias and spectroscopy frequency, with gap extraction.
    Spectroscopy,
    /// |t(ε)| traces per drive amplitude or power, with dip positions.
    Biastrace,
    /// Drive power to amplitude table.
    Calibrate,
    /// Shift, couplings and modified rates at the configured point.
    Shift,
    /// Analytic model against the master-equation and Floquet oracles.
    OracleCompare {
        #[arg(long, value_enum)]
        check: CheckArg,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            RunConfig::from_path(p).with_context(|| format!("reading config {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(o) = cli.order {
        cfg.mode.correction_order = match o {
            OrderArg::First => OrderPolicy::First,
            OrderArg::Second => OrderPolicy::Second,
            OrderArg::Mixed => OrderPolicy::Mixed,
        };
    }
    if let Some(n) = cli.normalize {
        cfg.mode.normalization = match n {
            NormalizeArg::Column => Normalization::Column,
            NormalizeArg::None => Normalization::None,
        };
    }
    if let Some(m) = cli.mode {
        cfg.mode.photon_mode = match m {
            ModeArg::FixedN => PhotonMode::FixedN,
            ModeArg::SelfConsistent => PhotonMode::SelfConsistent,
        };
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let cfg = load_config(&cli)?;
    let resolved = cfg.resolve().context("invalid configuration")?;
    let out = PathBuf::from(&resolved.config.output.dir);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let ctx = commands::Context { resolved, out };
    match cli.command {
        Command::Levels => commands::levels(&ctx),
        Command::Spectroscopy => commands::spectroscopy(&ctx),
        Command::Biastrace => commands::biastrace(&ctx),
        Command::Calibrate => commands::calibrate(&ctx),
        Command::Shift => commands::shift(&ctx),
        Command::OracleCompare { check } => commands::oracle_compare(&ctx, check),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
