//! Per-video aggregation: pollen/mite flags per bee and the summary a hive
//! uploads after each recording.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream_io::{SecondaryClass, SecondaryDetection};
use crate::tracker::{ProfileId, TrackProfile, TrackStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("detection refers to missing snapshot (profile {profile_id}, frame {frame_index})")]
    DanglingSnapshot { profile_id: ProfileId, frame_index: u64 },
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
}

/// Minimum confidence for a secondary detection to count, per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub pollen: f64,
    pub mite: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pollen: 0.25,
            mite: 0.25,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        for t in [self.pollen, self.mite] {
            if !(0.0..=1.0).contains(&t) {
                return Err(AnalyticsError::Threshold(t));
            }
        }
        Ok(())
    }

    fn for_class(&self, class: SecondaryClass) -> f64 {
        match class {
            SecondaryClass::Pollen => self.pollen,
            SecondaryClass::Mite => self.mite,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondaryFlags {
    pub pollen: bool,
    pub mite: bool,
}

/// Flags every profile that has at least one confident pollen (or mite)
/// detection on any of its snapshots. Every profile gets an entry.
pub fn associate_secondary(
    profiles: &[TrackProfile],
    detections: &[SecondaryDetection],
    thresholds: &Thresholds,
) -> Result<BTreeMap<ProfileId, SecondaryFlags>, AnalyticsError> {
    thresholds.validate()?;
    let snapshots: HashSet<(ProfileId, u64)> = profiles
        .iter()
        .flat_map(|p| p.snapshots.iter().map(move |s| (p.id, s.frame_index)))
        .collect();
    let mut flags: BTreeMap<ProfileId, SecondaryFlags> =
        profiles.iter().map(|p| (p.id, SecondaryFlags::default())).collect();

    for d in detections {
        if !snapshots.contains(&(d.profile_id, d.frame_index)) {
            return Err(AnalyticsError::DanglingSnapshot {
                profile_id: d.profile_id,
                frame_index: d.frame_index,
            });
        }
        if d.confidence < thresholds.for_class(d.class) {
            continue;
        }
        let entry = flags.entry(d.profile_id).or_default();
        match d.class {
            SecondaryClass::Pollen => entry.pollen = true,
            SecondaryClass::Mite => entry.mite = true,
        }
    }
    Ok(flags)
}

/// Counts for one processed video.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VideoSummary {
    pub arriving: u64,
    pub leaving: u64,
    pub deck: u64,
    pub new: u64,
    pub pollen_tracks: u64,
    pub mite_tracks: u64,
    pub mean_size_mm: Option<f64>,
    pub total_tracks: u64,
}

impl VideoSummary {
    /// Builds a summary from final statuses, optional sizes and flags.
    pub fn from_parts<I>(items: I) -> Self
    where
        I: IntoIterator<Item = (TrackStatus, Option<f64>, SecondaryFlags)>,
    {
        let mut s = VideoSummary::default();
        let mut size_sum = 0.0;
        let mut sized = 0u64;
        for (status, size, flags) in items {
            match status {
                TrackStatus::Arriving => s.arriving += 1,
                TrackStatus::Leaving => s.leaving += 1,
                TrackStatus::Deck => s.deck += 1,
                TrackStatus::New => s.new += 1,
            }
            s.total_tracks += 1;
            s.pollen_tracks += u64::from(flags.pollen);
            s.mite_tracks += u64::from(flags.mite);
            if let Some(mm) = size {
                size_sum += mm;
                sized += 1;
            }
        }
        s.mean_size_mm = (sized > 0).then(|| size_sum / sized as f64);
        s
    }

    /// Tracks that crossed at least one trigger line.
    pub fn evaluated_total(&self) -> u64 {
        self.arriving + self.leaving + self.deck
    }

    /// `(arriving, leaving, deck, new, total)`, the part a ground-truth file
    /// can be checked against.
    pub fn status_counts(&self) -> (u64, u64, u64, u64, u64) {
        (self.arriving, self.leaving, self.deck, self.new, self.total_tracks)
    }
}

/// Buckets each finalized profile by its final status.
pub fn summarize_video(
    profiles: &[TrackProfile],
    flags: &BTreeMap<ProfileId, SecondaryFlags>,
) -> VideoSummary {
    VideoSummary::from_parts(profiles.iter().map(|p| {
        (
            p.status,
            p.size_mm,
            flags.get(&p.id).copied().unwrap_or_default(),
        )
    }))
}

/// One bin of a size histogram: `[lower_mm, lower_mm + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeBin {
    pub lower_mm: f64,
    pub count: u64,
}

/// Histogram of extracted sizes with fixed-width bins starting at zero.
/// Profiles without a size are ignored; empty bins are kept between the
/// first and last occupied bin.
pub fn size_histogram(profiles: &[TrackProfile], bin_width_mm: f64) -> Vec<SizeBin> {
    assert!(bin_width_mm > 0.0, "bin width must be positive");
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for size in profiles.iter().filter_map(|p| p.size_mm) {
        *counts.entry((size / bin_width_mm).floor() as u64).or_default() += 1;
    }
    let (Some((&lo, _)), Some((&hi, _))) = (counts.first_key_value(), counts.last_key_value()) else {
        return Vec::new();
    };
    (lo..=hi)
        .map(|bin| SizeBin {
            lower_mm: bin as f64 * bin_width_mm,
            count: counts.get(&bin).copied().unwrap_or(0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Crossing, DetectionBox, Midpoint};
    use crate::tracker::SnapshotRef;
    use proptest::prelude::*;

    fn profile(id: u64, status: TrackStatus, size: Option<f64>, snapshot_frames: &[u64]) -> TrackProfile {
        TrackProfile {
            id,
            last_midpoint: Midpoint::new(0.0, 0.0),
            status,
            size_mm: size,
            first_frame: 0,
            last_frame: 100,
            snapshots: snapshot_frames
                .iter()
                .map(|&f| SnapshotRef {
                    frame_index: f,
                    bbox: DetectionBox::new(0.0, 0.0, 10.0, 10.0, 0.9).unwrap(),
                    crossing: Crossing::ArriveCross,
                })
                .collect(),
        }
    }

    fn det(profile_id: u64, frame_index: u64, class: SecondaryClass, confidence: f64) -> SecondaryDetection {
        SecondaryDetection {
            profile_id,
            frame_index,
            class,
            confidence,
            bbox: DetectionBox::new(1.0, 1.0, 4.0, 4.0, confidence).unwrap(),
        }
    }

    #[test]
    fn single_pollen_detection() {
        let profiles = [profile(1, TrackStatus::Arriving, Some(12.0), &[10, 20])];
        let flags = associate_secondary(&profiles, &[det(1, 20, SecondaryClass::Pollen, 0.9)], &Thresholds::default()).unwrap();
        assert_eq!(flags[&1], SecondaryFlags { pollen: true, mite: false });
    }

    #[test]
    fn no_detections_means_no_flags() {
        let profiles = [profile(1, TrackStatus::Arriving, None, &[3]), profile(2, TrackStatus::New, None, &[])];
        let flags = associate_secondary(&profiles, &[], &Thresholds::default()).unwrap();
        assert_eq!(flags.len(), 2);
        assert!(flags.values().all(|f| !f.pollen && !f.mite));
    }

    #[test]
    fn duplicate_pollen_on_one_snapshot_counts_once() {
        let profiles = [profile(1, TrackStatus::Leaving, None, &[5]), profile(2, TrackStatus::Leaving, None, &[6])];
        let dets = [det(1, 5, SecondaryClass::Pollen, 0.8), det(1, 5, SecondaryClass::Pollen, 0.7)];
        let flags = associate_secondary(&profiles, &dets, &Thresholds::default()).unwrap();
        let summary = summarize_video(&profiles, &flags);
        // brute-force recount: distinct profiles with a confident pollen hit
        let expected: HashSet<u64> = dets.iter().filter(|d| d.confidence >= 0.25).map(|d| d.profile_id).collect();
        assert_eq!(summary.pollen_tracks, expected.len() as u64);
        assert_eq!(summary.pollen_tracks, 1);
    }

    #[test]
    fn thresholds_filter_weak_detections() {
        let profiles = [profile(1, TrackStatus::Leaving, None, &[5])];
        let dets = [det(1, 5, SecondaryClass::Mite, 0.2)];
        let flags = associate_secondary(&profiles, &dets, &Thresholds::default()).unwrap();
        assert!(!flags[&1].mite);
        let flags = associate_secondary(&profiles, &dets, &Thresholds { pollen: 0.25, mite: 0.1 }).unwrap();
        assert!(flags[&1].mite);
        assert!(associate_secondary(&profiles, &dets, &Thresholds { pollen: 2.0, mite: 0.1 }).is_err());
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let profiles = [profile(1, TrackStatus::Leaving, None, &[5])];
        let err = associate_secondary(&profiles, &[det(1, 6, SecondaryClass::Pollen, 0.9)], &Thresholds::default()).unwrap_err();
        assert_eq!(err, AnalyticsError::DanglingSnapshot { profile_id: 1, frame_index: 6 });
        assert!(associate_secondary(&profiles, &[det(9, 5, SecondaryClass::Pollen, 0.9)], &Thresholds::default()).is_err());
    }

    #[test]
    fn summary_of_first_video_algorithm_counts() {
        let mut profiles = Vec::new();
        for i in 0..17 {
            profiles.push(profile(i + 1, TrackStatus::Arriving, None, &[]));
        }
        for i in 0..19 {
            profiles.push(profile(100 + i, TrackStatus::Leaving, None, &[]));
        }
        let s = summarize_video(&profiles, &BTreeMap::new());
        assert_eq!((s.arriving, s.leaving, s.deck), (17, 19, 0));
        assert_eq!(s.evaluated_total(), 36);
        assert_eq!(s.total_tracks, 36);
    }

    #[test]
    fn empty_and_mean_size() {
        let s = summarize_video(&[], &BTreeMap::new());
        assert_eq!(s, VideoSummary::default());
        assert_eq!(s.mean_size_mm, None);

        let profiles = [
            profile(1, TrackStatus::Arriving, Some(10.0), &[]),
            profile(2, TrackStatus::Leaving, Some(12.0), &[]),
            profile(3, TrackStatus::Deck, Some(14.0), &[]),
            profile(4, TrackStatus::New, None, &[]),
        ];
        let s = summarize_video(&profiles, &BTreeMap::new());
        assert_eq!(s.mean_size_mm, Some(12.0));
        assert_eq!(s.new, 1);
        assert_eq!(s.arriving + s.leaving + s.deck + s.new, s.total_tracks);
    }

    #[test]
    fn histogram_bins() {
        let profiles = [
            profile(1, TrackStatus::Arriving, Some(11.2), &[]),
            profile(2, TrackStatus::Arriving, Some(11.9), &[]),
            profile(3, TrackStatus::Leaving, Some(15.1), &[]),
            profile(4, TrackStatus::New, None, &[]),
        ];
        let h = size_histogram(&profiles, 1.0);
        assert_eq!(h.len(), 5);
        assert_eq!((h[0].lower_mm, h[0].count), (11.0, 2));
        assert_eq!(h[4].count, 1);
        assert!(size_histogram(&[], 1.0).is_empty());
    }

    proptest! {
        #[test]
        fn association_is_order_independent_and_idempotent(
            raw in prop::collection::vec((1u64..6, 0u64..4, any::<bool>(), 0.0..=1.0f64), 0..30),
            rot in 0usize..30,
        ) {
            let profiles: Vec<_> = (1..6).map(|id| profile(id, TrackStatus::Arriving, None, &[0, 1, 2, 3])).collect();
            let dets: Vec<_> = raw.iter().map(|&(p, f, pollen, c)| {
                det(p, f, if pollen { SecondaryClass::Pollen } else { SecondaryClass::Mite }, c)
            }).collect();
            let a = associate_secondary(&profiles, &dets, &Thresholds::default()).unwrap();
            let mut shuffled = dets.clone();
            if !shuffled.is_empty() {
                let n = shuffled.len();
                shuffled.rotate_left(rot % n);
                shuffled.reverse();
            }
            prop_assert_eq!(&a, &associate_secondary(&profiles, &shuffled, &Thresholds::default()).unwrap());
            let doubled: Vec<_> = dets.iter().chain(dets.iter()).copied().collect();
            prop_assert_eq!(&a, &associate_secondary(&profiles, &doubled, &Thresholds::default()).unwrap());
        }

        #[test]
        fn bucketing_is_a_partition(statuses in prop::collection::vec(0usize..4, 0..50)) {
            let profiles: Vec<_> = statuses.iter().enumerate()
                .map(|(i, s)| profile(i as u64, TrackStatus::ALL[*s], None, &[])).collect();
            let s = summarize_video(&profiles, &BTreeMap::new());
            prop_assert_eq!(s.arriving + s.leaving + s.deck + s.new, s.total_tracks);
            prop_assert_eq!(s.total_tracks, profiles.len() as u64);
        }
    }
}
