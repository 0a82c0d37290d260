//! `hivewatch track`: detection stream in, track log and summary out.
//!
//! For each stream `S` the command writes `<out>/<stem>.tracks.csv` and
//! `<out>/<stem>.summary.json`, and prints one JSON line per stream to
//! stdout. With `--interval` it keeps running: after the streams given on
//! the command line it reads further stream paths from stdin, one per line,
//! and starts each no sooner than one interval after the previous start.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Args;
use hivewatch_core::analytics::{associate_secondary, summarize_video, SecondaryFlags, VideoSummary};
use hivewatch_core::stream_io::{read_secondary, write_track_log, DetectionStreamReader};
use hivewatch_core::tracker::{ProfileId, TrackProfile, Tracker};
use hivewatch_telemetry::{Environment, HiveSample, TelemetryClient};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::{apply_interval, GeometryArgs, ThresholdArgs};

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Detection stream files.
    #[arg(value_name = "STREAM")]
    pub streams: Vec<PathBuf>,

    #[command(flatten)]
    pub geometry: GeometryArgs,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,

    /// Pollen/mite detections on this stream's snapshots (single stream only).
    #[arg(long, value_name = "CSV")]
    pub secondary: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Keep running, taking more stream paths from stdin at this cadence (e.g. 5m30s).
    #[arg(long, value_name = "DURATION")]
    pub interval: Option<String>,

    /// Telemetry service to upload each summary to.
    #[arg(long, value_name = "URL")]
    pub telemetry_url: Option<String>,

    /// File containing the hive's upload key.
    #[arg(long, value_name = "FILE")]
    pub key_file: Option<PathBuf>,

    /// Hive id used for uploads.
    #[arg(long, value_name = "ID")]
    pub hive: Option<String>,

    /// JSON file with temperature_f, humidity_pct, cpu_temp_c and gpu_temp_c; required for uploads.
    #[arg(long, value_name = "FILE")]
    pub sensors: Option<PathBuf>,

    /// Upload timestamp in UTC seconds [default: now]
    #[arg(long, value_name = "SECS")]
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackOutcome {
    pub stream: PathBuf,
    pub frames: u64,
    pub tracks: PathBuf,
    pub summary: VideoSummary,
}

/// Tracks one stream in memory.
pub fn track_file(
    path: &Path,
    cfg: &RunConfig,
    secondary: Option<&Path>,
) -> CliResult<(Vec<TrackProfile>, VideoSummary, u64)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut tracker = Tracker::new(cfg.geometry).map_err(CliError::validation)?;
    let mut frames = 0u64;
    for frame in DetectionStreamReader::new(BufReader::new(file)) {
        let frame = frame.map_err(|e| CliError::format(path, e))?;
        tracker
            .step(&frame)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        frames += 1;
    }
    let profiles = tracker.finalize();
    let flags: BTreeMap<ProfileId, SecondaryFlags> = match secondary {
        Some(sp) => {
            let f = File::open(sp).map_err(|e| CliError::io(sp, e))?;
            let dets = read_secondary(BufReader::new(f)).map_err(|e| CliError::format(sp, e))?;
            associate_secondary(&profiles, &dets, &cfg.thresholds)
                .map_err(|e| CliError::Validation(format!("{}: {e}", sp.display())))?
        }
        None => BTreeMap::new(),
    };
    let summary = summarize_video(&profiles, &flags);
    Ok((profiles, summary, frames))
}

fn write_outputs(
    stream: &Path,
    out: &Path,
    profiles: &[TrackProfile],
    summary: &VideoSummary,
) -> CliResult<PathBuf> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let stem = stream
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("stream");
    let tracks = out.join(format!("{stem}.tracks.csv"));
    let f = File::create(&tracks).map_err(|e| CliError::io(&tracks, e))?;
    write_track_log(BufWriter::new(f), profiles).map_err(|e| CliError::io(&tracks, e))?;
    let sp = out.join(format!("{stem}.summary.json"));
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(&sp, text + "\n").map_err(|e| CliError::io(&sp, e))?;
    Ok(tracks)
}

struct Uploader {
    client: TelemetryClient,
    hive: String,
    env: Environment,
    timestamp: Option<i64>,
    runtime: tokio::runtime::Runtime,
}

impl Uploader {
    fn from_args(args: &TrackArgs, cfg: &RunConfig) -> CliResult<Option<Self>> {
        let url = args.telemetry_url.clone().or_else(|| cfg.telemetry.url.clone());
        let Some(url) = url else {
            return Ok(None);
        };
        let hive = args
            .hive
            .clone()
            .or_else(|| cfg.telemetry.hive.clone())
            .ok_or_else(|| CliError::Usage("uploading needs --hive".into()))?;
        let key_file = args
            .key_file
            .clone()
            .or_else(|| cfg.telemetry.key_file.clone())
            .ok_or_else(|| CliError::Usage("uploading needs --key-file".into()))?;
        let key = fs::read_to_string(&key_file)
            .map_err(|e| CliError::io(&key_file, e))?
            .trim()
            .to_string();
        let sensors = args
            .sensors
            .as_ref()
            .ok_or_else(|| CliError::Usage("uploading needs --sensors".into()))?;
        let text = fs::read_to_string(sensors).map_err(|e| CliError::io(sensors, e))?;
        let env: Environment = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", sensors.display())))?;
        let client = TelemetryClient::new(&url, Some(key))?;
        let runtime = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .map_err(|e| CliError::Network(e.to_string()))?;
        Ok(Some(Self {
            client,
            hive,
            env,
            timestamp: args.timestamp,
            runtime,
        }))
    }

    fn upload(&self, summary: &VideoSummary) -> CliResult<u64> {
        let ts = self.timestamp.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        });
        let sample = HiveSample::from_summary(ts, self.env, summary);
        sample
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(self
            .runtime
            .block_on(self.client.upload_data(&self.hive, &sample))?)
    }
}

fn process(
    stream: &Path,
    args: &TrackArgs,
    cfg: &RunConfig,
    out: &Path,
    uploader: Option<&Uploader>,
) -> CliResult<TrackOutcome> {
    let (profiles, summary, frames) = track_file(stream, cfg, args.secondary.as_deref())?;
    let tracks = write_outputs(stream, out, &profiles, &summary)?;
    let outcome = TrackOutcome {
        stream: stream.to_path_buf(),
        frames,
        tracks,
        summary,
    };
    let mut stdout = std::io::stdout().lock();
    let line = serde_json::to_string(&outcome).expect("outcome serializes");
    writeln!(stdout, "{line}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    if frames == 0 {
        tracing::warn!(stream = %stream.display(), "stream has no frames");
    }
    if let Some(up) = uploader {
        let seq = up.upload(&outcome.summary)?;
        tracing::info!(hive = %up.hive, seq, "summary uploaded");
    }
    Ok(outcome)
}

pub fn run(args: TrackArgs, mut cfg: RunConfig) -> CliResult<()> {
    args.geometry.apply(&mut cfg)?;
    args.thresholds.apply(&mut cfg);
    apply_interval(&mut cfg, args.interval.as_deref())?;
    cfg.validate()?;
    if args.secondary.is_some() && args.streams.len() > 1 {
        return Err(CliError::Usage("--secondary needs exactly one stream".into()));
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let uploader = Uploader::from_args(&args, &cfg)?;

    if args.interval.is_none() {
        if args.streams.is_empty() {
            return Err(CliError::Usage("no streams given".into()));
        }
        for s in &args.streams {
            process(s, &args, &cfg, &out, uploader.as_ref())?;
        }
        return Ok(());
    }
    run_loop(&args, &cfg, &out, uploader.as_ref())
}

/// Processes queued streams while a reader thread keeps accepting paths, so
/// stream N is tracked while N+1 is still being recorded. A failed stream
/// is reported and skipped; the loop ends when stdin closes and the queue
/// is empty.
fn run_loop(
    args: &TrackArgs,
    cfg: &RunConfig,
    out: &Path,
    uploader: Option<&Uploader>,
) -> CliResult<()> {
    let (tx, rx) = mpsc::channel::<PathBuf>();
    for s in &args.streams {
        tx.send(s.clone()).expect("receiver alive");
    }
    std::thread::spawn(move || {
        for line in std::io::stdin().lock().lines() {
            let Ok(line) = line else { break };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if tx.send(PathBuf::from(line)).is_err() {
                break;
            }
        }
    });

    let mut last_start: Option<Instant> = None;
    let mut failures = 0usize;
    for stream in rx {
        if let Some(prev) = last_start {
            let due = prev + cfg.interval;
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        last_start = Some(Instant::now());
        if let Err(e) = process(&stream, args, cfg, out, uploader) {
            failures += 1;
            eprintln!("hivewatch: {e}");
        }
    }
    if failures > 0 {
        return Err(CliError::Validation(format!("{failures} stream(s) failed")));
    }
    Ok(())
}
