//! Scoring tracker counts and pollen detections against hand annotation.
//!
//! Tracking is scored per direction as `1 - |algorithm - manual| / manual`
//! (clamped at zero), averaged over arriving and leaving for each video and
//! then over videos. Pollen detection uses precision, recall and their
//! harmonic mean, with true positives taken as `manual - false_neg`.
//! All averages are over full-precision per-video values.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::analytics::SecondaryFlags;
use crate::stream_io::{CountRow, GroundTruthRecord};
use crate::tracker::{ProfileId, TrackProfile, TrackStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{metric} is undefined: {reason}")]
    UndefinedMetric { metric: &'static str, reason: String },
    #[error("inconsistent pollen counts: {0}")]
    InvalidCounts(String),
}

fn undefined(metric: &'static str, reason: impl Into<String>) -> EvalError {
    EvalError::UndefinedMetric {
        metric,
        reason: reason.into(),
    }
}

/// A hand count and the tracker's count of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountPair {
    pub manual: u64,
    pub algorithm: u64,
}

impl CountPair {
    pub fn new(manual: u64, algorithm: u64) -> Self {
        Self { manual, algorithm }
    }
}

pub fn error_rate(p: CountPair) -> Result<f64, EvalError> {
    if p.manual == 0 {
        return Err(undefined("error rate", "manual count is zero"));
    }
    Ok(p.algorithm.abs_diff(p.manual) as f64 / p.manual as f64)
}

pub fn accuracy(p: CountPair) -> Result<f64, EvalError> {
    Ok((1.0 - error_rate(p)?).max(0.0))
}

/// Mean of the arriving and leaving accuracies.
pub fn video_accuracy(arriving: CountPair, leaving: CountPair) -> Result<f64, EvalError> {
    Ok((accuracy(arriving)? + accuracy(leaving)?) / 2.0)
}

pub fn average_accuracy(videos: &[(CountPair, CountPair)]) -> Result<f64, EvalError> {
    if videos.is_empty() {
        return Err(undefined("average accuracy", "no videos"));
    }
    let per_video = videos
        .iter()
        .map(|(a, l)| video_accuracy(*a, *l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean(&per_video))
}

/// Pollen detection counts for one video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PollenVideoCounts {
    pub manual_pollen: u64,
    pub algorithm_pollen: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub total_bees: u64,
}

impl PollenVideoCounts {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.false_neg > self.manual_pollen {
            return Err(EvalError::InvalidCounts(format!(
                "false negatives ({}) exceed manual pollen count ({})",
                self.false_neg, self.manual_pollen
            )));
        }
        Ok(())
    }

    pub fn true_positives(&self) -> u64 {
        self.manual_pollen - self.false_neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PollenMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn pollen_metrics(v: &PollenVideoCounts) -> Result<PollenMetrics, EvalError> {
    v.validate()?;
    let tp = v.true_positives() as f64;
    if v.true_positives() + v.false_pos == 0 {
        return Err(undefined("precision", "no positive detections"));
    }
    if v.manual_pollen == 0 {
        return Err(undefined("recall", "manual pollen count is zero"));
    }
    let precision = tp / (tp + v.false_pos as f64);
    let recall = tp / v.manual_pollen as f64;
    if precision + recall == 0.0 {
        return Err(undefined("f1", "precision and recall are both zero"));
    }
    let f1 = 2.0 * precision * recall / (precision + recall);
    Ok(PollenMetrics {
        precision,
        recall,
        f1,
    })
}

/// Unweighted per-video means of precision, recall and F1.
pub fn pollen_averages(videos: &[PollenVideoCounts]) -> Result<PollenMetrics, EvalError> {
    if videos.is_empty() {
        return Err(undefined("pollen averages", "no videos"));
    }
    let per_video = videos.iter().map(pollen_metrics).collect::<Result<Vec<_>, _>>()?;
    Ok(average_metrics(&per_video))
}

fn average_metrics(per_video: &[PollenMetrics]) -> PollenMetrics {
    let pick = |f: fn(&PollenMetrics) -> f64| mean(&per_video.iter().map(f).collect::<Vec<_>>());
    PollenMetrics {
        precision: pick(|m| m.precision),
        recall: pick(|m| m.recall),
        f1: pick(|m| m.f1),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoMetrics {
    pub video: String,
    pub arriving: CountPair,
    pub leaving: CountPair,
    pub deck: Option<CountPair>,
    pub pollen: Option<CountPair>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PollenVideoMetrics {
    pub video: String,
    pub counts: PollenVideoCounts,
    pub metrics: PollenMetrics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub videos: Vec<VideoMetrics>,
    pub average_accuracy: Option<f64>,
    pub pollen: Vec<PollenVideoMetrics>,
    pub pollen_average: Option<PollenMetrics>,
}

impl MetricsReport {
    /// Scores a table of per-video hand and tracker counts.
    pub fn from_counts(rows: &[CountRow]) -> Result<Self, EvalError> {
        let videos = rows
            .iter()
            .map(|r| {
                Ok(VideoMetrics {
                    video: r.video.clone(),
                    arriving: r.arriving,
                    leaving: r.leaving,
                    deck: None,
                    pollen: None,
                    accuracy: video_accuracy(r.arriving, r.leaving)?,
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        let pairs: Vec<_> = rows.iter().map(|r| (r.arriving, r.leaving)).collect();
        Ok(Self {
            average_accuracy: Some(average_accuracy(&pairs)?),
            videos,
            ..Self::default()
        })
    }

    pub fn from_pollen(rows: &[(String, PollenVideoCounts)]) -> Result<Self, EvalError> {
        let pollen = rows
            .iter()
            .map(|(video, counts)| {
                Ok(PollenVideoMetrics {
                    video: video.clone(),
                    counts: *counts,
                    metrics: pollen_metrics(counts)?,
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        if pollen.is_empty() {
            return Err(undefined("pollen averages", "no videos"));
        }
        let per_video: Vec<_> = pollen.iter().map(|p| p.metrics).collect();
        Ok(Self {
            pollen_average: Some(average_metrics(&per_video)),
            pollen,
            ..Self::default()
        })
    }

    /// Writes the report as `video,metric,value` rows.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> io::Result<()> {
        writeln!(sink, "video,metric,value")?;
        for v in &self.videos {
            let id = &v.video;
            writeln!(sink, "{id},arriving_manual,{}", v.arriving.manual)?;
            writeln!(sink, "{id},arriving_algorithm,{}", v.arriving.algorithm)?;
            writeln!(sink, "{id},leaving_manual,{}", v.leaving.manual)?;
            writeln!(sink, "{id},leaving_algorithm,{}", v.leaving.algorithm)?;
            if let Some(d) = v.deck {
                writeln!(sink, "{id},deck_manual,{}", d.manual)?;
                writeln!(sink, "{id},deck_algorithm,{}", d.algorithm)?;
            }
            if let Some(p) = v.pollen {
                writeln!(sink, "{id},pollen_manual,{}", p.manual)?;
                writeln!(sink, "{id},pollen_algorithm,{}", p.algorithm)?;
            }
            writeln!(sink, "{id},accuracy,{:.6}", v.accuracy)?;
        }
        if let Some(avg) = self.average_accuracy {
            writeln!(sink, "average,accuracy,{avg:.6}")?;
        }
        for p in &self.pollen {
            let id = &p.video;
            writeln!(sink, "{id},precision,{:.6}", p.metrics.precision)?;
            writeln!(sink, "{id},recall,{:.6}", p.metrics.recall)?;
            writeln!(sink, "{id},f1,{:.6}", p.metrics.f1)?;
        }
        if let Some(avg) = self.pollen_average {
            writeln!(sink, "average,precision,{:.6}", avg.precision)?;
            writeln!(sink, "average,recall,{:.6}", avg.recall)?;
            writeln!(sink, "average,f1,{:.6}", avg.f1)?;
        }
        sink.flush()
    }
}

/// Accuracy for one direction of a run comparison. A direction with no bees
/// in either count carries no information and is skipped; counting bees that
/// were never there scores zero.
fn run_direction_accuracy(p: CountPair) -> Option<f64> {
    match (p.manual, p.algorithm) {
        (0, 0) => None,
        (0, _) => Some(0.0),
        _ => accuracy(p).ok(),
    }
}

/// Compares a tracker run against annotated ground truth for the same video.
///
/// Bees whose final status is New are left out of every count.
pub fn compare_runs(
    truth: &[GroundTruthRecord],
    profiles: &[TrackProfile],
    flags: &BTreeMap<ProfileId, SecondaryFlags>,
) -> Result<MetricsReport, EvalError> {
    if truth.is_empty() {
        return Err(undefined("accuracy", "ground truth is empty"));
    }
    let count_truth = |s: TrackStatus| truth.iter().filter(|r| r.final_status == s).count() as u64;
    let count_algo = |s: TrackStatus| profiles.iter().filter(|p| p.status == s).count() as u64;
    let pair = |s| CountPair::new(count_truth(s), count_algo(s));

    let arriving = pair(TrackStatus::Arriving);
    let leaving = pair(TrackStatus::Leaving);
    let deck = pair(TrackStatus::Deck);
    let pollen = CountPair::new(
        truth.iter().filter(|r| r.has_pollen).count() as u64,
        flags.values().filter(|f| f.pollen).count() as u64,
    );

    let directions: Vec<f64> = [arriving, leaving]
        .into_iter()
        .filter_map(run_direction_accuracy)
        .collect();
    if directions.is_empty() {
        return Err(undefined("accuracy", "no arriving or leaving bees in either run"));
    }
    let acc = mean(&directions);
    Ok(MetricsReport {
        videos: vec![VideoMetrics {
            video: "run".into(),
            arriving,
            leaving,
            deck: Some(deck),
            pollen: Some(pollen),
            accuracy: acc,
        }],
        average_accuracy: Some(acc),
        ..MetricsReport::default()
    })
}
