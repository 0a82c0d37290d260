//! Synthetic hive-entrance recordings with exact ground truth.
//!
//! Each bee walks a piecewise-linear route: it appears at the top edge, the
//! bottom edge or on the deck, optionally pauses at a deck waypoint, and walks
//! off the top or bottom edge. Bees do not interact. Detections may be
//! jittered and dropped; the ground truth always comes from the noise-free
//! route, scored with the same trigger-line rules as the tracker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{SecondaryFlags, VideoSummary};
use crate::geometry::{self, DetectionBox, HiveGeometry, Midpoint};
use crate::stream_io::GroundTruthRecord;
use crate::tracker::{FrameDetections, TrackStatus};

/// Attempts per bee before a crowded scene is given up on.
const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    Config(String),
    #[error("could not place bee {placed} of {requested} with the requested separation")]
    Crowded { placed: usize, requested: usize },
}

/// Closed interval to sample uniformly from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }

    fn check(&self, name: &str) -> Result<(), SimError> {
        if !(self.min.is_finite() && self.max.is_finite() && 0.0 < self.min && self.min <= self.max) {
            return Err(SimError::Config(format!(
                "{name} must satisfy 0 < min <= max, got {}..{}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Box extents in pixels. Bees walk vertically, so `length` is along y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyDims {
    pub length: Span,
    pub width: Span,
}

/// Relative weights of where bees first appear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryWeights {
    pub top: f64,
    pub bottom: f64,
    pub deck: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub geom: HiveGeometry,
    pub fps: f64,
    pub duration_s: f64,
    pub n_bees: usize,
    pub speed_px_per_frame: Span,
    pub entry: EntryWeights,
    /// Chance that a bee leaves through the edge it came in by.
    pub turn_back_prob: f64,
    /// Chance of a pause at a deck waypoint.
    pub loiter_prob: f64,
    pub loiter_frames: Span,
    /// Standard deviation of the positional noise added to each detection.
    pub jitter_px: f64,
    /// Per-frame chance that a visible bee is not detected.
    pub dropout_prob: f64,
    pub worker_px: BodyDims,
    pub drone_px: BodyDims,
    pub drone_ratio: f64,
    pub pollen_prob: f64,
    pub mite_prob: f64,
    /// When set, routes are resampled until every pair of distinct bees stays
    /// farther apart than this, both within a frame and across consecutive
    /// frames.
    pub min_separation_px: Option<f64>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geom: HiveGeometry::default(),
            fps: 10.0,
            duration_s: 60.0,
            n_bees: 30,
            speed_px_per_frame: Span::new(4.0, 12.0),
            entry: EntryWeights {
                top: 0.45,
                bottom: 0.45,
                deck: 0.1,
            },
            turn_back_prob: 0.1,
            loiter_prob: 0.3,
            loiter_frames: Span::new(5.0, 30.0),
            jitter_px: 0.0,
            dropout_prob: 0.0,
            // about 11-13 mm and 15-17 mm at the default scale
            worker_px: BodyDims {
                length: Span::new(72.0, 84.0),
                width: Span::new(28.0, 36.0),
            },
            drone_px: BodyDims {
                length: Span::new(97.0, 110.0),
                width: Span::new(38.0, 46.0),
            },
            drone_ratio: 0.1,
            pollen_prob: 0.1,
            mite_prob: 0.02,
            min_separation_px: None,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// A scene the tracker should get exactly right: no noise, no missed
    /// detections, slow bees and wide separation.
    pub fn ideal(seed: u64) -> Self {
        let geom = HiveGeometry::default();
        Self {
            n_bees: 12,
            speed_px_per_frame: Span::new(3.0, 20.0),
            min_separation_px: Some(geom.match_tolerance + 5.0),
            pollen_prob: 0.0,
            mite_prob: 0.0,
            seed,
            geom,
            ..Self::default()
        }
    }

    pub fn n_frames(&self) -> u64 {
        (self.fps * self.duration_s).round() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.geom
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(SimError::Config("fps must be positive".into()));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(SimError::Config("duration_s must be positive".into()));
        }
        for (name, p) in [
            ("turn_back_prob", self.turn_back_prob),
            ("loiter_prob", self.loiter_prob),
            ("dropout_prob", self.dropout_prob),
            ("drone_ratio", self.drone_ratio),
            ("pollen_prob", self.pollen_prob),
            ("mite_prob", self.mite_prob),
            ("entry.top", self.entry.top),
            ("entry.bottom", self.entry.bottom),
            ("entry.deck", self.entry.deck),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.entry.top + self.entry.bottom + self.entry.deck <= 0.0 {
            return Err(SimError::Config("entry weights must not all be zero".into()));
        }
        if !(self.jitter_px >= 0.0 && self.jitter_px.is_finite()) {
            return Err(SimError::Config("jitter_px must be non-negative".into()));
        }
        self.speed_px_per_frame.check("speed_px_per_frame")?;
        self.loiter_frames.check("loiter_frames")?;
        for (name, dims) in [("worker_px", &self.worker_px), ("drone_px", &self.drone_px)] {
            dims.length.check(&format!("{name}.length"))?;
            dims.width.check(&format!("{name}.width"))?;
            let half = dims.length.max / 2.0;
            if half >= self.geom.arrive_line || half >= self.geom.frame_h - self.geom.leave_line {
                return Err(SimError::Config(format!(
                    "{name}.length must fit between a frame edge and its trigger line"
                )));
            }
            if dims.width.max >= self.geom.frame_w {
                return Err(SimError::Config(format!("{name}.width exceeds the frame")));
            }
        }
        if let Some(sep) = self.min_separation_px {
            if !(sep > 0.0 && sep.is_finite()) {
                return Err(SimError::Config("min_separation_px must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One simulated bee: its noise-free box in every frame it is on screen.
#[derive(Debug, Clone, PartialEq)]
pub struct BeePath {
    pub bee_id: u64,
    pub spawn_frame: u64,
    pub width: f64,
    pub length: f64,
    pub is_drone: bool,
    pub flags: SecondaryFlags,
    /// Box centers for frames `spawn_frame..spawn_frame + centers.len()`.
    pub centers: Vec<Midpoint>,
}

impl BeePath {
    pub fn last_frame(&self) -> u64 {
        self.spawn_frame + self.centers.len() as u64 - 1
    }

    fn center_at(&self, frame: u64) -> Option<Midpoint> {
        frame
            .checked_sub(self.spawn_frame)
            .and_then(|k| self.centers.get(k as usize))
            .copied()
    }

    /// Noise-free box at `frame`, if the bee is on screen.
    pub fn box_at(&self, frame: u64) -> Option<DetectionBox> {
        self.center_at(frame).map(|c| self.box_around(c))
    }

    fn box_around(&self, c: Midpoint) -> DetectionBox {
        DetectionBox {
            min_x: (c.x - self.width / 2.0).max(0.0),
            min_y: (c.y - self.length / 2.0).max(0.0),
            max_x: c.x + self.width / 2.0,
            max_y: c.y + self.length / 2.0,
            confidence: 1.0,
        }
    }

    /// Final status of the noise-free route.
    pub fn final_status(&self, geom: &HiveGeometry) -> TrackStatus {
        let ys: Vec<f64> = (self.spawn_frame..=self.last_frame())
            .filter_map(|f| self.box_at(f))
            .map(|b| b.center().y)
            .collect();
        ys.windows(2)
            .filter_map(|w| geometry::crossing(w[0], w[1], geom))
            .next_back()
            .map(TrackStatus::after)
            .unwrap_or(TrackStatus::New)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub frames: Vec<FrameDetections>,
    pub truth: Vec<GroundTruthRecord>,
    /// Every spawned bee, ordered by id.
    pub bees: Vec<BeePath>,
}

#[derive(Clone, Copy)]
enum Edge {
    Top,
    Bottom,
    Deck,
}

/// Generates a recording and its ground truth. Output depends only on the
/// config, seed included.
pub fn generate(config: &SimConfig) -> Result<SimOutput, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_frames = config.n_frames();

    let mut bees: Vec<BeePath> = Vec::with_capacity(config.n_bees);
    for placed in 0..config.n_bees {
        let mut attempts = 0;
        let bee = loop {
            let candidate = sample_bee(config, n_frames, &mut rng);
            match config.min_separation_px {
                Some(sep) if !bees.iter().all(|other| separated(&candidate, other, sep)) => {}
                _ => break candidate,
            }
            attempts += 1;
            if attempts >= MAX_PLACEMENT_ATTEMPTS {
                return Err(SimError::Crowded {
                    placed,
                    requested: config.n_bees,
                });
            }
        };
        bees.push(bee);
    }

    // ids follow order of appearance so they line up with tracker ids
    bees.sort_by_key(|b| b.spawn_frame);
    for (i, bee) in bees.iter_mut().enumerate() {
        bee.bee_id = i as u64 + 1;
    }

    let jitter = (config.jitter_px > 0.0)
        .then(|| Normal::new(0.0, config.jitter_px).expect("jitter is finite and positive"));
    let mut frames: Vec<FrameDetections> = (0..n_frames).map(|i| FrameDetections::new(i, Vec::new())).collect();
    for bee in &bees {
        for (k, c) in bee.centers.iter().enumerate() {
            let frame = bee.spawn_frame + k as u64;
            // draw both so the noise sequence does not depend on dropout
            let dropped = rng.random_bool(config.dropout_prob);
            let mut center = *c;
            if let Some(noise) = &jitter {
                center.x += noise.sample(&mut rng);
                center.y += noise.sample(&mut rng);
                center = clamp_center(center, bee.width, bee.length, &config.geom);
            }
            if !dropped {
                frames[frame as usize].boxes.push(bee.box_around(center));
            }
        }
    }

    let truth = bees
        .iter()
        .map(|b| GroundTruthRecord {
            bee_id: b.bee_id,
            final_status: b.final_status(&config.geom),
            first_frame: b.spawn_frame,
            last_frame: b.last_frame(),
            has_pollen: b.flags.pollen,
            has_mite: b.flags.mite,
        })
        .collect();
    Ok(SimOutput { frames, truth, bees })
}

/// Summary a perfect tracker would report for this ground truth. Sizes are
/// not annotated, so `mean_size_mm` is always absent.
pub fn truth_summary(truth: &[GroundTruthRecord]) -> VideoSummary {
    VideoSummary::from_parts(truth.iter().map(|r| {
        (
            r.final_status,
            None,
            SecondaryFlags {
                pollen: r.has_pollen,
                mite: r.has_mite,
            },
        )
    }))
}

fn clamp_center(c: Midpoint, width: f64, length: f64, geom: &HiveGeometry) -> Midpoint {
    Midpoint::new(
        c.x.clamp(width / 2.0, geom.frame_w - width / 2.0),
        c.y.clamp(length / 2.0, geom.frame_h - length / 2.0),
    )
}

fn separated(a: &BeePath, b: &BeePath, sep: f64) -> bool {
    let lo = a.spawn_frame.max(b.spawn_frame).saturating_sub(1);
    let hi = a.last_frame().min(b.last_frame()) + 1;
    (lo..=hi).all(|f| {
        let pairs = [
            (a.center_at(f), b.center_at(f)),
            (a.center_at(f), f.checked_sub(1).and_then(|p| b.center_at(p))),
            (f.checked_sub(1).and_then(|p| a.center_at(p)), b.center_at(f)),
        ];
        pairs.iter().all(|pair| match pair {
            (Some(p), Some(q)) => p.distance(q) > sep,
            _ => true,
        })
    })
}

fn sample_bee(config: &SimConfig, n_frames: u64, rng: &mut ChaCha8Rng) -> BeePath {
    let geom = &config.geom;
    let is_drone = rng.random_bool(config.drone_ratio);
    let dims = if is_drone { &config.drone_px } else { &config.worker_px };
    let length = dims.length.sample(rng);
    let width = dims.width.sample(rng);
    let flags = SecondaryFlags {
        pollen: rng.random_bool(config.pollen_prob),
        mite: rng.random_bool(config.mite_prob),
    };
    let speed = config.speed_px_per_frame.sample(rng);
    let spawn_frame = rng.random_range(0..n_frames);

    let x_lo = width / 2.0;
    let x_hi = geom.frame_w - width / 2.0;
    let y_top = length / 2.0;
    let y_bottom = geom.frame_h - length / 2.0;
    let deck_y = |rng: &mut ChaCha8Rng| rng.random_range(geom.arrive_line + 1.0..geom.leave_line - 1.0);
    let drift_x = |x: f64, rng: &mut ChaCha8Rng| (x + rng.random_range(-80.0..=80.0)).clamp(x_lo, x_hi);

    let entry = {
        let w = config.entry;
        let roll = rng.random_range(0.0..w.top + w.bottom + w.deck);
        if roll < w.top {
            Edge::Top
        } else if roll < w.top + w.bottom {
            Edge::Bottom
        } else {
            Edge::Deck
        }
    };
    let x0 = rng.random_range(x_lo..=x_hi);
    let start = match entry {
        Edge::Top => Midpoint::new(x0, y_top),
        Edge::Bottom => Midpoint::new(x0, y_bottom),
        Edge::Deck => Midpoint::new(x0, deck_y(rng)),
    };
    let turn_back = rng.random_bool(config.turn_back_prob);
    let exit_top = match entry {
        Edge::Top => turn_back,
        Edge::Bottom => !turn_back,
        Edge::Deck => rng.random_bool(0.5),
    };

    let mut waypoints: Vec<(Midpoint, u64)> = vec![(start, 0)];
    if rng.random_bool(config.loiter_prob) {
        let pause = config.loiter_frames.sample(rng).round() as u64;
        let x = drift_x(x0, rng);
        waypoints.push((Midpoint::new(x, deck_y(rng)), pause));
    }
    let exit_x = drift_x(waypoints.last().map(|w| w.0.x).unwrap_or(x0), rng);
    waypoints.push((Midpoint::new(exit_x, if exit_top { y_top } else { y_bottom }), 0));

    let max_len = (n_frames - spawn_frame) as usize;
    let centers = walk(&waypoints, speed, max_len);
    BeePath {
        bee_id: 0,
        spawn_frame,
        width,
        length,
        is_drone,
        flags,
        centers,
    }
}

/// Positions at constant speed along the waypoints, holding still for each
/// waypoint's pause. At most `max_len` positions are produced.
fn walk(waypoints: &[(Midpoint, u64)], speed: f64, max_len: usize) -> Vec<Midpoint> {
    let mut out = vec![waypoints[0].0];
    let mut pos = waypoints[0].0;
    for &(target, pause) in &waypoints[1..] {
        loop {
            if out.len() >= max_len {
                return out;
            }
            let remaining = pos.distance(&target);
            if remaining <= speed {
                pos = target;
                out.push(pos);
                break;
            }
            let t = speed / remaining;
            pos = Midpoint::new(pos.x + (target.x - pos.x) * t, pos.y + (target.y - pos.y) * t);
            out.push(pos);
        }
        for _ in 0..pause {
            if out.len() >= max_len {
                return out;
            }
            out.push(pos);
        }
    }
    out.truncate(max_len);
    out
}
