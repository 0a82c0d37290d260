//! Frame-to-frame bee profiles.
//!
//! Each frame's detections are paired with the previous frame's midpoints by
//! proximity. Paired profiles move; a move across a trigger line changes the
//! profile's status and records a snapshot. Unpaired detections start new
//! profiles and unpaired profiles are retired immediately, with no grace
//! period.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Crossing, DetectionBox, GeometryError, HiveGeometry, Midpoint};

pub type ProfileId = u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackerError {
    #[error("frame {got} does not follow frame {last}")]
    OutOfOrder { last: u64, got: u64 },
    #[error("frame {frame}, box {index}: {source}")]
    InvalidBox {
        frame: u64,
        index: usize,
        source: GeometryError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrackStatus {
    New,
    Arriving,
    Leaving,
    Deck,
}

impl TrackStatus {
    pub const ALL: [TrackStatus; 4] = [
        TrackStatus::New,
        TrackStatus::Arriving,
        TrackStatus::Leaving,
        TrackStatus::Deck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::New => "New",
            TrackStatus::Arriving => "Arriving",
            TrackStatus::Leaving => "Leaving",
            TrackStatus::Deck => "Deck",
        }
    }

    /// Status a profile takes on after the given crossing.
    pub fn after(crossing: Crossing) -> TrackStatus {
        match crossing {
            Crossing::ArriveCross => TrackStatus::Arriving,
            Crossing::LeaveCross => TrackStatus::Leaving,
            Crossing::DeckCrossFromArrive | Crossing::DeckCrossFromLeave => TrackStatus::Deck,
        }
    }
}

impl fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrackStatus::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown status `{s}` (expected New, Arriving, Leaving or Deck)"))
    }
}

/// The box a bee had in the frame where it crossed a trigger line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRef {
    pub frame_index: u64,
    pub bbox: DetectionBox,
    pub crossing: Crossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackProfile {
    pub id: ProfileId,
    pub last_midpoint: Midpoint,
    pub status: TrackStatus,
    /// Set at the first trigger crossing and never changed afterwards.
    pub size_mm: Option<f64>,
    pub first_frame: u64,
    pub last_frame: u64,
    pub snapshots: Vec<SnapshotRef>,
}

/// One frame of detector output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub frame_index: u64,
    pub boxes: Vec<DetectionBox>,
}

impl FrameDetections {
    pub fn new(frame_index: u64, boxes: Vec<DetectionBox>) -> Self {
        Self { frame_index, boxes }
    }
}

/// Result of pairing previous midpoints with current detections.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    /// `(profile id, current index)` in the order they were assigned.
    pub assignments: Vec<(ProfileId, usize)>,
    pub unmatched_prev: Vec<ProfileId>,
    pub unmatched_cur: Vec<usize>,
}

/// Greedy nearest-neighbour pairing.
///
/// All `(prev, cur)` pairs within `tolerance` are sorted by distance, ties
/// going to the lower profile id and then the lower current index, and taken
/// in that order whenever both sides are still free.
pub fn match_detections(prev: &[(ProfileId, Midpoint)], cur: &[Midpoint], tolerance: f64) -> Matching {
    let mut candidates: Vec<(f64, ProfileId, usize, usize)> = Vec::new();
    for (pi, (id, p)) in prev.iter().enumerate() {
        for (ci, c) in cur.iter().enumerate() {
            let d = p.distance(c);
            if d <= tolerance {
                candidates.push((d, *id, ci, pi));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut prev_taken = vec![false; prev.len()];
    let mut cur_taken = vec![false; cur.len()];
    let mut assignments = Vec::new();
    for (_, id, ci, pi) in candidates {
        if prev_taken[pi] || cur_taken[ci] {
            continue;
        }
        prev_taken[pi] = true;
        cur_taken[ci] = true;
        assignments.push((id, ci));
    }

    let unmatched_prev = prev
        .iter()
        .zip(&prev_taken)
        .filter(|(_, taken)| !**taken)
        .map(|((id, _), _)| *id)
        .collect();
    let unmatched_cur = (0..cur.len()).filter(|ci| !cur_taken[*ci]).collect();
    Matching {
        assignments,
        unmatched_prev,
        unmatched_cur,
    }
}

/// Tracking state for a single detection stream.
#[derive(Debug, Clone)]
pub struct Tracker {
    geom: HiveGeometry,
    /// Sorted by id.
    active: Vec<TrackProfile>,
    retired: Vec<TrackProfile>,
    next_id: ProfileId,
    last_frame: Option<u64>,
}

impl Tracker {
    pub fn new(geom: HiveGeometry) -> Result<Self, TrackerError> {
        geom.validate()?;
        Ok(Self {
            geom,
            active: Vec::new(),
            retired: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

    pub fn geometry(&self) -> &HiveGeometry {
        &self.geom
    }

    pub fn active(&self) -> &[TrackProfile] {
        &self.active
    }

    pub fn retired(&self) -> &[TrackProfile] {
        &self.retired
    }

    /// Number of profiles created so far.
    pub fn spawned(&self) -> u64 {
        self.next_id - 1
    }

    /// Advances the tracker by one frame and returns the crossings it saw,
    /// ordered by profile id.
    ///
    /// A rejected frame leaves the state untouched.
    pub fn step(&mut self, frame: &FrameDetections) -> Result<Vec<(ProfileId, Crossing)>, TrackerError> {
        if let Some(last) = self.last_frame {
            if frame.frame_index <= last {
                return Err(TrackerError::OutOfOrder {
                    last,
                    got: frame.frame_index,
                });
            }
        }
        let mids = frame
            .boxes
            .iter()
            .enumerate()
            .map(|(index, b)| {
                geometry::midpoint(b).map_err(|source| TrackerError::InvalidBox {
                    frame: frame.frame_index,
                    index,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.last_frame = Some(frame.frame_index);

        let prev: Vec<(ProfileId, Midpoint)> =
            self.active.iter().map(|p| (p.id, p.last_midpoint)).collect();
        let matching = match_detections(&prev, &mids, self.geom.match_tolerance);

        let mut assigned: Vec<Option<usize>> = vec![None; self.active.len()];
        for (id, ci) in &matching.assignments {
            // active is sorted by id
            let slot = self
                .active
                .binary_search_by_key(id, |p| p.id)
                .expect("matched id is active");
            assigned[slot] = Some(*ci);
        }

        let mut events = Vec::new();
        let mut still_active = Vec::with_capacity(self.active.len() + matching.unmatched_cur.len());
        for (mut profile, slot) in std::mem::take(&mut self.active).into_iter().zip(assigned) {
            let Some(ci) = slot else {
                self.retired.push(profile);
                continue;
            };
            let cur = mids[ci];
            if let Some(c) = geometry::crossing(profile.last_midpoint.y, cur.y, &self.geom) {
                let bbox = frame.boxes[ci];
                profile.status = TrackStatus::after(c);
                if profile.size_mm.is_none() {
                    profile.size_mm = Some(geometry::size_unchecked(&bbox, &self.geom));
                }
                profile.snapshots.push(SnapshotRef {
                    frame_index: frame.frame_index,
                    bbox,
                    crossing: c,
                });
                events.push((profile.id, c));
            }
            profile.last_midpoint = cur;
            profile.last_frame = frame.frame_index;
            still_active.push(profile);
        }

        for ci in matching.unmatched_cur {
            let id = self.next_id;
            self.next_id += 1;
            still_active.push(TrackProfile {
                id,
                last_midpoint: mids[ci],
                status: TrackStatus::New,
                size_mm: None,
                first_frame: frame.frame_index,
                last_frame: frame.frame_index,
                snapshots: Vec::new(),
            });
        }
        self.active = still_active;
        Ok(events)
    }

    /// Retires every active profile and returns all profiles ordered by id.
    pub fn finalize(mut self) -> Vec<TrackProfile> {
        self.retired.append(&mut self.active);
        self.retired.sort_by_key(|p| p.id);
        self.retired
    }
}

/// Runs a whole stream through a fresh tracker.
pub fn track_stream<'a, I>(geom: HiveGeometry, frames: I) -> Result<Vec<TrackProfile>, TrackerError>
where
    I: IntoIterator<Item = &'a FrameDetections>,
{
    let mut tracker = Tracker::new(geom)?;
    for frame in frames {
        tracker.step(frame)?;
    }
    Ok(tracker.finalize())
}

/// Whether `to` is reachable from `from` in one crossing.
pub fn is_valid_transition(from: TrackStatus, to: TrackStatus) -> bool {
    use TrackStatus::*;
    matches!(
        (from, to),
        (New, Arriving | Leaving | Deck)
            | (Arriving, Deck | Leaving)
            | (Leaving, Deck | Arriving)
            | (Deck, Arriving | Leaving)
    )
}
