//! Bee traffic analytics for a hive-entrance camera.
//!
//! Detector boxes go in frame by frame; the [`tracker`] links them into bee
//! profiles, counts trigger-line crossings and measures each bee once.
//! [`analytics`] folds the profiles into a per-video summary, [`eval`] scores
//! runs against hand counts, and [`simulator`] produces synthetic recordings
//! with exact ground truth.

pub mod analytics;
pub mod eval;
pub mod geometry;
pub mod simulator;
pub mod stream_io;
pub mod tracker;

pub use analytics::{associate_secondary, summarize_video, SecondaryFlags, Thresholds, VideoSummary};
pub use geometry::{bee_size_mm, crossing, midpoint, Crossing, DetectionBox, HiveGeometry, Midpoint};
pub use tracker::{match_detections, track_stream, FrameDetections, TrackProfile, TrackStatus, Tracker};
