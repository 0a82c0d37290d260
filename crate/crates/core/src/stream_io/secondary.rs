//! Pollen and mite detections made on snapshot crops.
//!
//! ```text
//! profile_id,frame_index,class,confidence,min_x,min_y,max_x,max_y
//! 4,118,Pollen,0.87,12,30,20,41
//! ```
//!
//! `(profile_id, frame_index)` names the snapshot the crop was taken from;
//! box coordinates are local to that crop.

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{csv_reader, expect_header, field, record_line, FormatError};
use crate::geometry::DetectionBox;
use crate::tracker::ProfileId;

const HEADER: [&str; 8] = [
    "profile_id",
    "frame_index",
    "class",
    "confidence",
    "min_x",
    "min_y",
    "max_x",
    "max_y",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecondaryClass {
    Pollen,
    Mite,
}

impl fmt::Display for SecondaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecondaryClass::Pollen => "Pollen",
            SecondaryClass::Mite => "Mite",
        })
    }
}

impl FromStr for SecondaryClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Pollen" => Ok(SecondaryClass::Pollen),
            "Mite" => Ok(SecondaryClass::Mite),
            _ => Err(format!("unknown class `{s}` (expected Pollen or Mite)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondaryDetection {
    pub profile_id: ProfileId,
    pub frame_index: u64,
    pub class: SecondaryClass,
    pub confidence: f64,
    pub bbox: DetectionBox,
}

pub fn read_secondary<R: Read>(source: R) -> Result<Vec<SecondaryDetection>, FormatError> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &HEADER)? {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let confidence: f64 = field(&record, 3, "confidence")?;
        let bbox = DetectionBox::new(
            field(&record, 4, "min_x")?,
            field(&record, 5, "min_y")?,
            field(&record, 6, "max_x")?,
            field(&record, 7, "max_y")?,
            confidence,
        )
        .map_err(|e| FormatError::at(record_line(&record), e.to_string()))?;
        out.push(SecondaryDetection {
            profile_id: field(&record, 0, "profile_id")?,
            frame_index: field(&record, 1, "frame_index")?,
            class: field(&record, 2, "class")?,
            confidence,
            bbox,
        });
    }
    Ok(out)
}

pub fn write_secondary<W: Write>(sink: W, detections: &[SecondaryDetection]) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for d in detections {
        writer.write_record([
            d.profile_id.to_string(),
            d.frame_index.to_string(),
            d.class.to_string(),
            d.confidence.to_string(),
            d.bbox.min_x.to_string(),
            d.bbox.min_y.to_string(),
            d.bbox.max_x.to_string(),
            d.bbox.max_y.to_string(),
        ])?;
    }
    writer.flush()
}
