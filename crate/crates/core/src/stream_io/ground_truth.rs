//! Hand-annotated ground truth.
//!
//! ```text
//! bee_id,final_status,first_frame,last_frame,has_pollen,has_mite
//! 1,Arriving,0,41,true,false
//! ```

use std::collections::HashSet;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::{csv_reader, expect_header, field, record_line, FormatError};
use crate::tracker::TrackStatus;

const HEADER: [&str; 6] = [
    "bee_id",
    "final_status",
    "first_frame",
    "last_frame",
    "has_pollen",
    "has_mite",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub bee_id: u64,
    pub final_status: TrackStatus,
    pub first_frame: u64,
    pub last_frame: u64,
    pub has_pollen: bool,
    pub has_mite: bool,
}

pub fn read_ground_truth<R: Read>(source: R) -> Result<Vec<GroundTruthRecord>, FormatError> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &HEADER)? {
        return Ok(Vec::new());
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let row = GroundTruthRecord {
            bee_id: field(&record, 0, "bee_id")?,
            final_status: field(&record, 1, "final_status")?,
            first_frame: field(&record, 2, "first_frame")?,
            last_frame: field(&record, 3, "last_frame")?,
            has_pollen: field(&record, 4, "has_pollen")?,
            has_mite: field(&record, 5, "has_mite")?,
        };
        if row.last_frame < row.first_frame {
            return Err(FormatError::at(line, "last_frame precedes first_frame"));
        }
        if !seen.insert(row.bee_id) {
            return Err(FormatError::at(line, format!("duplicate bee_id {}", row.bee_id)));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_ground_truth<W: Write>(sink: W, records: &[GroundTruthRecord]) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for r in records {
        writer.write_record([
            r.bee_id.to_string(),
            r.final_status.to_string(),
            r.first_frame.to_string(),
            r.last_frame.to_string(),
            r.has_pollen.to_string(),
            r.has_mite.to_string(),
        ])?;
    }
    writer.flush()
}
