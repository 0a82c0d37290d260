//! `hivewatch simulate`: writes `<out>/stream.txt` and `<out>/truth.csv`
//! and prints the ground-truth summary as JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use hivewatch_core::simulator::{generate, truth_summary, SimConfig};
use hivewatch_core::stream_io::{write_detection_stream, write_ground_truth};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::GeometryArgs;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory [default: sim]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Use the noise-free, well-separated scene the tracker should get exactly right.
    #[arg(long)]
    pub ideal: bool,

    /// Number of bees [default: 30, or 12 with --ideal]
    #[arg(long)]
    pub bees: Option<usize>,

    /// Recording length in seconds [default: 60]
    #[arg(long, value_name = "SECS")]
    pub duration: Option<f64>,

    /// Frames per second [default: 10]
    #[arg(long)]
    pub fps: Option<f64>,

    /// Standard deviation of detection position noise in pixels [default: 0]
    #[arg(long, value_name = "PX")]
    pub jitter: Option<f64>,

    /// Per-frame chance that a visible bee is missed [default: 0]
    #[arg(long, value_name = "P")]
    pub dropout: Option<f64>,

    #[command(flatten)]
    pub geometry: GeometryArgs,
}

pub fn config_from(args: &SimulateArgs, mut run: RunConfig) -> CliResult<SimConfig> {
    args.geometry.apply(&mut run)?;
    run.geometry.validate().map_err(CliError::validation)?;
    let seed = args.seed.unwrap_or(run.seed);
    let mut cfg = if args.ideal {
        SimConfig::ideal(seed)
    } else {
        run.simulation
    };
    cfg.seed = seed;
    cfg.geom = run.geometry;
    if let Some(n) = args.bees {
        cfg.n_bees = n;
    }
    if let Some(d) = args.duration {
        cfg.duration_s = d;
    }
    if let Some(f) = args.fps {
        cfg.fps = f;
    }
    if let Some(j) = args.jitter {
        cfg.jitter_px = j;
    }
    if let Some(p) = args.dropout {
        cfg.dropout_prob = p;
    }
    cfg.validate().map_err(CliError::validation)?;
    Ok(cfg)
}

pub fn run(args: SimulateArgs, run: RunConfig) -> CliResult<()> {
    let out = args
        .out
        .clone()
        .or_else(|| run.out.clone())
        .unwrap_or_else(|| PathBuf::from("sim"));
    let cfg = config_from(&args, run)?;
    let sim = generate(&cfg).map_err(CliError::validation)?;

    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let stream = out.join("stream.txt");
    let f = File::create(&stream).map_err(|e| CliError::io(&stream, e))?;
    let mut w = BufWriter::new(f);
    write_detection_stream(&mut w, &sim.frames)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&stream, e))?;

    let truth = out.join("truth.csv");
    let f = File::create(&truth).map_err(|e| CliError::io(&truth, e))?;
    write_ground_truth(BufWriter::new(f), &sim.truth).map_err(|e| CliError::io(&truth, e))?;

    let summary = truth_summary(&sim.truth);
    println!(
        "{}",
        serde_json::json!({
            "stream": stream,
            "truth": truth,
            "frames": sim.frames.len(),
            "seed": cfg.seed,
            "summary": summary,
        })
    );
    Ok(())
}
