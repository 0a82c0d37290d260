//! Coordinate math for the hive-entrance frame.
//!
//! Boxes are in continuous pixel space with `(min_x, min_y)` the top-left
//! corner and `(max_x, max_y)` the bottom-right corner. The y axis grows
//! downward, so the hive interior sits above the arrive line and the outside
//! world below the leave line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("box coordinates must be finite and non-negative: {0:?}")]
    NonFinite(DetectionBox),
    #[error("box corners are inverted: {0:?}")]
    Inverted(DetectionBox),
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("invalid hive geometry: {0}")]
    Geometry(String),
}

/// An axis-aligned detector box with its confidence score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
    pub confidence: f64,
}

impl DetectionBox {
    /// Builds a box and checks its invariants.
    pub fn new(
        min_x: f64,
        min_y: f64,
        max_x: f64,
        max_y: f64,
        confidence: f64,
    ) -> Result<Self, GeometryError> {
        let b = Self {
            min_x,
            min_y,
            max_x,
            max_y,
            confidence,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let coords = [self.min_x, self.min_y, self.max_x, self.max_y];
        if coords.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(GeometryError::NonFinite(*self));
        }
        if self.min_x > self.max_x || self.min_y > self.max_y {
            return Err(GeometryError::Inverted(*self));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(GeometryError::Confidence(self.confidence));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    /// Box center. Does not validate; see [`midpoint`] for the checked form.
    pub fn center(&self) -> Midpoint {
        Midpoint {
            x: (self.max_x - self.min_x) / 2.0 + self.min_x,
            y: (self.max_y - self.min_y) / 2.0 + self.min_y,
        }
    }
}

/// Position of a bee, taken as the center of its detection box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Midpoint {
    pub x: f64,
    pub y: f64,
}

impl Midpoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Midpoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Frame layout, trigger lines and the physical size of the imaged work area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HiveGeometry {
    pub frame_w: f64,
    pub frame_h: f64,
    /// y of the line whose upward crossing marks a bee as arriving.
    pub arrive_line: f64,
    /// y of the line whose downward crossing marks a bee as leaving.
    pub leave_line: f64,
    /// Largest midpoint displacement, in pixels, still treated as the same bee.
    pub match_tolerance: f64,
    pub container_w_mm: f64,
    pub container_h_mm: f64,
}

impl Default for HiveGeometry {
    fn default() -> Self {
        Self {
            frame_w: 640.0,
            frame_h: 420.0,
            arrive_line: 140.0,
            leave_line: 280.0,
            match_tolerance: 50.0,
            container_w_mm: 110.0,
            container_h_mm: 65.0,
        }
    }
}

impl HiveGeometry {
    /// A frame of the given size with the trigger lines splitting its height
    /// into three equal bands.
    pub fn with_frame(frame_w: f64, frame_h: f64) -> Self {
        Self {
            frame_w,
            frame_h,
            arrive_line: frame_h / 3.0,
            leave_line: 2.0 * frame_h / 3.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all = [
            self.frame_w,
            self.frame_h,
            self.arrive_line,
            self.leave_line,
            self.match_tolerance,
            self.container_w_mm,
            self.container_h_mm,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::Geometry("all values must be finite".into()));
        }
        if !(0.0 < self.arrive_line
            && self.arrive_line < self.leave_line
            && self.leave_line < self.frame_h)
        {
            return Err(GeometryError::Geometry(format!(
                "need 0 < arrive_line ({}) < leave_line ({}) < frame_h ({})",
                self.arrive_line, self.leave_line, self.frame_h
            )));
        }
        if self.frame_w <= 0.0 {
            return Err(GeometryError::Geometry("frame_w must be positive".into()));
        }
        if self.match_tolerance <= 0.0 {
            return Err(GeometryError::Geometry(
                "match_tolerance must be positive".into(),
            ));
        }
        if self.container_w_mm <= 0.0 || self.container_h_mm <= 0.0 {
            return Err(GeometryError::Geometry(
                "container dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Pixels per millimeter along x.
    pub fn px_per_mm_x(&self) -> f64 {
        self.frame_w / self.container_w_mm
    }

    /// Pixels per millimeter along y.
    pub fn px_per_mm_y(&self) -> f64 {
        self.frame_h / self.container_h_mm
    }
}

/// Center of a validated box.
pub fn midpoint(b: &DetectionBox) -> Result<Midpoint, GeometryError> {
    b.validate()?;
    Ok(b.center())
}

/// Bee body length in millimeters, measured along the longer side of its box.
///
/// Width wins ties. Each axis uses its own pixel-per-millimeter ratio since
/// the frame and the work area need not share an aspect ratio.
pub fn bee_size_mm(b: &DetectionBox, geom: &HiveGeometry) -> Result<f64, GeometryError> {
    b.validate()?;
    geom.validate()?;
    Ok(size_unchecked(b, geom))
}

pub(crate) fn size_unchecked(b: &DetectionBox, geom: &HiveGeometry) -> f64 {
    let (w, h) = (b.width(), b.height());
    if w >= h {
        w / (geom.frame_w / geom.container_w_mm)
    } else {
        h / (geom.frame_h / geom.container_h_mm)
    }
}

/// A trigger-line crossing between two consecutive frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Crossing {
    /// Moved up past the arrive line.
    ArriveCross,
    /// Moved down past the arrive line, onto the deck.
    DeckCrossFromArrive,
    /// Moved down past the leave line.
    LeaveCross,
    /// Moved up past the leave line, onto the deck.
    DeckCrossFromLeave,
}

impl Crossing {
    pub const ALL: [Crossing; 4] = [
        Crossing::ArriveCross,
        Crossing::DeckCrossFromArrive,
        Crossing::LeaveCross,
        Crossing::DeckCrossFromLeave,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Crossing::ArriveCross => "arrive",
            Crossing::DeckCrossFromArrive => "deck-from-arrive",
            Crossing::LeaveCross => "leave",
            Crossing::DeckCrossFromLeave => "deck-from-leave",
        }
    }
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Crossing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Crossing::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown crossing `{s}`"))
    }
}

/// Classifies the move of a midpoint from `prev_y` to `cur_y`.
///
/// The arrive line is checked before the leave line, so a single step that
/// spans both lines reports only the arrive-line event.
pub fn crossing(prev_y: f64, cur_y: f64, geom: &HiveGeometry) -> Option<Crossing> {
    let arrive = geom.arrive_line;
    let leave = geom.leave_line;
    if prev_y > arrive && cur_y <= arrive {
        Some(Crossing::ArriveCross)
    } else if prev_y <= arrive && cur_y > arrive {
        Some(Crossing::DeckCrossFromArrive)
    } else if prev_y < leave && cur_y >= leave {
        Some(Crossing::LeaveCross)
    } else if prev_y > leave && cur_y <= leave {
        Some(Crossing::DeckCrossFromLeave)
    } else {
        None
    }
}
