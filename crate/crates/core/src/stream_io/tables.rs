//! Per-video count tables used to score a tracker against hand counts.
//!
//! Tracking counts:
//!
//! ```text
//! video,arriving_manual,arriving_algorithm,leaving_manual,leaving_algorithm
//! ```
//!
//! Pollen counts:
//!
//! ```text
//! video,manual_pollen,algorithm_pollen,false_pos,false_neg,total_bees
//! ```

use std::io::Read;

use super::{csv_reader, expect_header, field, record_line, FormatError};
use crate::eval::{CountPair, PollenVideoCounts};

const COUNT_HEADER: [&str; 5] = [
    "video",
    "arriving_manual",
    "arriving_algorithm",
    "leaving_manual",
    "leaving_algorithm",
];

const POLLEN_HEADER: [&str; 6] = [
    "video",
    "manual_pollen",
    "algorithm_pollen",
    "false_pos",
    "false_neg",
    "total_bees",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub video: String,
    pub arriving: CountPair,
    pub leaving: CountPair,
}

pub fn read_count_table<R: Read>(source: R) -> Result<Vec<CountRow>, FormatError> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &COUNT_HEADER)? {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(CountRow {
            video: record.get(0).unwrap_or("").to_string(),
            arriving: CountPair::new(
                field(&record, 1, "arriving_manual")?,
                field(&record, 2, "arriving_algorithm")?,
            ),
            leaving: CountPair::new(
                field(&record, 3, "leaving_manual")?,
                field(&record, 4, "leaving_algorithm")?,
            ),
        });
    }
    Ok(rows)
}

pub fn read_pollen_table<R: Read>(source: R) -> Result<Vec<(String, PollenVideoCounts)>, FormatError> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &POLLEN_HEADER)? {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let counts = PollenVideoCounts {
            manual_pollen: field(&record, 1, "manual_pollen")?,
            algorithm_pollen: field(&record, 2, "algorithm_pollen")?,
            false_pos: field(&record, 3, "false_pos")?,
            false_neg: field(&record, 4, "false_neg")?,
            total_bees: field(&record, 5, "total_bees")?,
        };
        counts
            .validate()
            .map_err(|e| FormatError::at(record_line(&record), e.to_string()))?;
        rows.push((record.get(0).unwrap_or("").to_string(), counts));
    }
    Ok(rows)
}
