//! Command-line front end: ingestion, descriptive statistics, experiments,
//! forecasts and model audits, all writing plot-ready CSV.

pub mod config;
mod data;
mod describe;
mod experiment;
mod forecast;
mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "aqcast", version, about = "Multi-step-ahead PM2.5 forecasting with LSTM models")]
pub struct Cli {
    /// Base seed; overrides the config file's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for every file a command writes.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a station CSV, repair gaps and write the canonical file.
    Ingest(data::IngestArgs),
    /// Period mean and 95% interval of one feature, per station.
    Stats(data::StatsArgs),
    /// Pearson correlation matrix of all features.
    Correlate(data::CorrelateArgs),
    /// Run the configured model × mode × strategy matrix.
    Experiment,
    /// Closed-loop forecast with a 95% band over trials.
    Forecast(forecast::ForecastArgs),
    /// Layer shapes and parameter counts.
    Describe(describe::DescribeArgs),
}

/// `NAME=PATH` or a bare path whose file stem names the station.
pub(crate) fn station_input(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "station".into());
            (name, path)
        }
    }
}

pub(crate) fn load_station(spec: &str) -> Result<(aqcast_core::station::TimeSeriesFrame, PathBuf)> {
    let (name, path) = station_input(spec);
    let file = File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    let frame = aqcast_core::station::parse_station_csv(file, &name).with_context(|| format!("reading {}", path.display()))?;
    Ok((frame, path))
}

/// Creates `out_dir/name` (and parents) and hands a buffered writer to `body`.
pub(crate) fn write_output(out_dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
    let path = out_dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut sink = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    body(&mut sink)?;
    sink.flush()?;
    Ok(path)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(args) => data::ingest(&cli, args),
        Command::Stats(args) => data::stats(&cli, args),
        Command::Correlate(args) => data::correlate(&cli, args),
        Command::Experiment => experiment::run(&cli),
        Command::Forecast(args) => forecast::run(&cli, args),
        Command::Describe(args) => describe::run(args),
    }
}
