//! The `hivewatch` command line: track detection streams, simulate
//! recordings, score runs, render telemetry reports and run the service.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod error;
pub mod evaluate;
pub mod plot;
pub mod report;
pub mod serve;
pub mod simulate;
pub mod track;

use config::{parse_geometry, parse_interval, RunConfig};
pub use error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hivewatch", version, about = "Honey bee traffic monitoring at the hive entrance")]
pub struct Cli {
    /// TOML run configuration. Command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Log more detail to stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track bees through one or more detection streams.
    Track(track::TrackArgs),
    /// Generate a synthetic detection stream with ground truth.
    Simulate(simulate::SimulateArgs),
    /// Score tracker output against hand counts.
    Eval(evaluate::EvalArgs),
    /// Write per-measurement series and plots from stored telemetry.
    Report(report::ReportArgs),
    /// Run the telemetry HTTP service.
    Serve(serve::ServeArgs),
}

/// Geometry overrides shared by commands that track.
#[derive(Debug, Clone, Default, Args)]
pub struct GeometryArgs {
    /// Frame size and trigger lines: WxH or WxH:ARRIVE:LEAVE [default: 640x420:140:280]
    #[arg(long, value_name = "WxH[:A:L]")]
    pub geometry: Option<String>,

    /// Largest midpoint jump in pixels still matched to the same bee [default: 50]
    #[arg(long, value_name = "PX")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ThresholdArgs {
    /// Minimum confidence for a pollen detection to count [default: 0.25]
    #[arg(long, value_name = "P")]
    pub threshold_pollen: Option<f64>,

    /// Minimum confidence for a mite detection to count [default: 0.25]
    #[arg(long, value_name = "P")]
    pub threshold_mite: Option<f64>,
}

impl GeometryArgs {
    pub fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(text) = &self.geometry {
            cfg.geometry = parse_geometry(text, cfg.geometry)?;
        }
        if let Some(t) = self.tolerance {
            cfg.geometry.match_tolerance = t;
        }
        Ok(())
    }
}

impl ThresholdArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = self.threshold_pollen {
            cfg.thresholds.pollen = p;
        }
        if let Some(m) = self.threshold_mite {
            cfg.thresholds.mite = m;
        }
    }
}

pub(crate) fn apply_interval(cfg: &mut RunConfig, flag: Option<&str>) -> CliResult<()> {
    if let Some(s) = flag {
        cfg.interval = parse_interval(s)?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Track(a) => track::run(a, cfg),
        Command::Simulate(a) => simulate::run(a, cfg),
        Command::Eval(a) => evaluate::run(a, cfg),
        Command::Report(a) => report::run(a, cfg),
        Command::Serve(a) => serve::run(a, cfg),
    }
}
