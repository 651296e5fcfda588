//! Command-line driver: ingestion, synthetic data, experiment runs and
//! single-series forecast listings.

mod commands;
pub mod config;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_forecast, cmd_ingest, cmd_run, cmd_synth, load_registry, ForecastRow, IngestSummary, RunSummary};
pub use config::{ExperimentConfig, Overrides};

/// A bad argument, config key or lookup; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for usage errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "mortcast", version, about = "Lee-Carter and LSTM mortality forecasting experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML experiment config; defaults apply to missing keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load death-rate files and report which countries qualify
    Ingest {
        /// Directory of `XXX.Mx_1x1.txt` files; defaults to the config's data_dir
        data_dir: Option<PathBuf>,
    },
    /// Write a seeded synthetic dataset in the same text format
    Synth {
        #[arg(long)]
        countries: Option<usize>,
        #[arg(long)]
        years: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Run every configured model on the holdout split and write reports
    Run {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Train the LSTMs on untransformed rates instead of log rates
        #[arg(long)]
        raw_rates: bool,
    },
    /// Print history and holdout forecast for one country and age
    Forecast {
        #[arg(long)]
        country: String,
        #[arg(long)]
        age: u32,
        /// lc, lc-auto, lc-higher[:n], lc-auto-higher[:n], lstm-country, lstm-world, lstm-coed
        #[arg(long, default_value = "lc")]
        model: String,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        raw_rates: bool,
    },
}

/// Executes a parsed command line, writing human output to `out`.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut config = ExperimentConfig::load(cli.global.config.as_deref())?;
    let mut overrides = Overrides {
        seed: cli.global.seed,
        jobs: cli.global.jobs,
        ..Default::default()
    };
    match cli.command {
        Command::Ingest { data_dir } => {
            config.apply(&overrides)?;
            let dir = data_dir.unwrap_or(config.data_dir.clone());
            cmd_ingest(&dir, cli.global.output.as_deref(), config.min_years, out)?;
        }
        Command::Synth { countries, years, noise } => {
            config.synth_countries = countries.unwrap_or(config.synth_countries);
            config.synth_years = years.unwrap_or(config.synth_years);
            config.synth_noise_sd = noise.unwrap_or(config.synth_noise_sd);
            config.apply(&overrides)?;
            let dir = cli.global.output.unwrap_or(config.data_dir.clone());
            cmd_synth(&config, &dir, out)?;
        }
        Command::Run { data_dir, raw_rates } => {
            overrides.output = cli.global.output;
            overrides.data_dir = data_dir;
            overrides.raw_rates = raw_rates;
            config.apply(&overrides)?;
            cmd_run(&config, out)?;
        }
        Command::Forecast {
            country,
            age,
            model,
            data_dir,
            raw_rates,
        } => {
            overrides.data_dir = data_dir;
            overrides.raw_rates = raw_rates;
            config.apply(&overrides)?;
            cmd_forecast(&config, &country, age, &model, cli.global.output.as_deref(), out)?;
        }
    }
    Ok(())
}
