//! `hivewatch report`: one `timestamp,value` CSV and one SVG chart per
//! hive measurement.
//!
//! Samples come from a telemetry data directory (`--store DIR --hive ID`)
//! or from a JSONL file of samples (`--samples FILE`). `--year Y` switches
//! to the hourly history for that year.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use hivewatch_telemetry::{downsample_hourly, year_bounds, HiveSample, HiveStore, Measurement};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::plot::line_chart;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Telemetry data directory.
    #[arg(long, value_name = "DIR", conflicts_with = "samples", requires = "hive")]
    pub store: Option<PathBuf>,

    /// Hive to report on (with --store).
    #[arg(long, value_name = "ID")]
    pub hive: Option<String>,

    /// JSONL file of samples, one object per line.
    #[arg(long, value_name = "FILE")]
    pub samples: Option<PathBuf>,

    /// Report the hourly history of this year instead of every sample.
    #[arg(long)]
    pub year: Option<i32>,

    /// Skip the SVG charts.
    #[arg(long)]
    pub no_plots: bool,

    /// Output directory [default: report]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn read_samples_jsonl(path: &Path) -> CliResult<Vec<HiveSample>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out: Vec<HiveSample> = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| {
            CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        let s = HiveSample::from_json(&value)
            .map_err(|e| CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if let Some(prev) = out.last() {
            if s.timestamp <= prev.timestamp {
                return Err(CliError::Validation(format!(
                    "{}:{}: timestamps must increase",
                    path.display(),
                    i + 1
                )));
            }
        }
        out.push(s);
    }
    Ok(out)
}

fn load(args: &ReportArgs) -> CliResult<Vec<HiveSample>> {
    let series = match (&args.store, &args.samples) {
        (Some(dir), None) => {
            if !dir.is_dir() {
                return Err(CliError::io(
                    dir,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory"),
                ));
            }
            let hive = args.hive.as_deref().expect("clap requires --hive");
            let store = HiveStore::open(dir)?;
            match args.year {
                Some(y) => return Ok(store.history(hive, y)?),
                None => store.series(hive)?,
            }
        }
        (None, Some(file)) => read_samples_jsonl(file)?,
        _ => return Err(CliError::Usage("give --store with --hive, or --samples".into())),
    };
    Ok(match args.year {
        Some(y) => {
            let (start, end) = year_bounds(y)
                .ok_or_else(|| CliError::Usage(format!("year {y} out of range")))?;
            let in_year: Vec<_> = series
                .into_iter()
                .filter(|s| (start..end).contains(&s.timestamp))
                .collect();
            downsample_hourly(&in_year)
        }
        None => series,
    })
}

/// Writes the ten series files (and charts) and returns their paths.
pub fn write_report(samples: &[HiveSample], out: &Path, plots: bool) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for m in Measurement::ALL {
        let path = out.join(format!("{}.csv", m.field()));
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(f);
        let mut points = Vec::new();
        let res = (|| -> std::io::Result<()> {
            writeln!(w, "timestamp,{}", m.field())?;
            for s in samples {
                match m.value(s) {
                    Some(v) => {
                        writeln!(w, "{},{v}", s.timestamp)?;
                        points.push((s.timestamp, v));
                    }
                    None => writeln!(w, "{},", s.timestamp)?,
                }
            }
            w.flush()
        })();
        res.map_err(|e| CliError::io(&path, e))?;
        written.push(path);

        if plots && !points.is_empty() {
            let svg = out.join(format!("{}.svg", m.field()));
            line_chart(&svg, m.label(), &points).map_err(|e| {
                CliError::io(&svg, std::io::Error::other(e))
            })?;
            written.push(svg);
        }
    }
    Ok(written)
}

pub fn run(args: ReportArgs, cfg: RunConfig) -> CliResult<()> {
    let out = args
        .out
        .clone()
        .or(cfg.out)
        .unwrap_or_else(|| PathBuf::from("report"));
    let samples = load(&args)?;
    if samples.is_empty() {
        eprintln!("hivewatch: warning: no samples to report; writing empty series");
    }
    let written = write_report(&samples, &out, !args.no_plots)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}
