//! `hivewatch eval`: count tables, pollen tables or a tracker run against
//! ground truth. The report is printed as `video,metric,value` CSV and
//! optionally saved with `--out`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use hivewatch_core::analytics::associate_secondary;
use hivewatch_core::eval::{compare_runs, MetricsReport};
use hivewatch_core::stream_io::{
    read_count_table, read_ground_truth, read_pollen_table, read_secondary, read_track_log,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::ThresholdArgs;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Per-video hand and tracker arriving/leaving counts.
    #[arg(long, value_name = "CSV")]
    pub counts: Option<PathBuf>,

    /// Per-video pollen counts with false positives and negatives.
    #[arg(long, value_name = "CSV")]
    pub pollen: Option<PathBuf>,

    /// Annotated ground truth for one video (use with --log).
    #[arg(long, value_name = "CSV", requires = "log")]
    pub truth: Option<PathBuf>,

    /// Track log produced by `track` for the same video.
    #[arg(long, value_name = "CSV", requires = "truth")]
    pub log: Option<PathBuf>,

    /// Pollen/mite detections for the tracked run.
    #[arg(long, value_name = "CSV", requires = "log")]
    pub secondary: Option<PathBuf>,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,

    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn build_report(args: &EvalArgs, cfg: &RunConfig) -> CliResult<MetricsReport> {
    if args.counts.is_none() && args.pollen.is_none() && args.truth.is_none() {
        return Err(CliError::Usage(
            "nothing to evaluate: give --counts, --pollen or --truth with --log".into(),
        ));
    }
    let mut report = MetricsReport::default();
    if let Some(p) = &args.counts {
        let rows = read_count_table(open(p)?).map_err(|e| CliError::format(p, e))?;
        let r = MetricsReport::from_counts(&rows)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        report.videos = r.videos;
        report.average_accuracy = r.average_accuracy;
    }
    if let Some(p) = &args.pollen {
        let rows = read_pollen_table(open(p)?).map_err(|e| CliError::format(p, e))?;
        let r = MetricsReport::from_pollen(&rows)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        report.pollen = r.pollen;
        report.pollen_average = r.pollen_average;
    }
    if let (Some(tp), Some(lp)) = (&args.truth, &args.log) {
        let truth = read_ground_truth(open(tp)?).map_err(|e| CliError::format(tp, e))?;
        let profiles = read_track_log(open(lp)?).map_err(|e| CliError::format(lp, e))?;
        let flags = match &args.secondary {
            Some(sp) => {
                let dets = read_secondary(open(sp)?).map_err(|e| CliError::format(sp, e))?;
                associate_secondary(&profiles, &dets, &cfg.thresholds)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", sp.display())))?
            }
            None => BTreeMap::new(),
        };
        let r = compare_runs(&truth, &profiles, &flags).map_err(CliError::validation)?;
        let mut videos = r.videos;
        let name = lp
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("run")
            .trim_end_matches(".tracks");
        for v in &mut videos {
            v.video = name.to_string();
        }
        if report.videos.is_empty() {
            report.average_accuracy = r.average_accuracy;
        }
        report.videos.extend(videos);
    }
    Ok(report)
}

pub fn run(args: EvalArgs, mut cfg: RunConfig) -> CliResult<()> {
    args.thresholds.apply(&mut cfg);
    cfg.thresholds.validate().map_err(CliError::validation)?;
    let report = build_report(&args, &cfg)?;
    let mut text = Vec::new();
    report
        .write_csv(&mut text)
        .expect("writing to memory cannot fail");
    if let Some(out) = &args.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
    }
    print!("{}", String::from_utf8(text).expect("report is UTF-8"));
    Ok(())
}
