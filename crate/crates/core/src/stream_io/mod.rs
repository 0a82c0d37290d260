//! Text formats read and written by the pipeline.
//!
//! | file               | shape                                         |
//! |--------------------|-----------------------------------------------|
//! | detection stream   | one whitespace-separated line per frame       |
//! | ground truth       | CSV, one row per annotated bee                |
//! | track log          | CSV, one row per tracker profile              |
//! | secondary detections | CSV, one row per pollen/mite detection      |
//! | count tables       | CSV, one row per video                        |
//!
//! The exact grammars are documented in `docs/formats.md`. All readers report
//! the 1-based line a failure happened on.

mod detections;
mod ground_truth;
mod secondary;
mod tables;
mod track_log;

use std::io;

use thiserror::Error;

pub use detections::{read_detection_stream, write_detection_stream, write_frame, DetectionStreamReader};
pub use ground_truth::{read_ground_truth, write_ground_truth, GroundTruthRecord};
pub use secondary::{read_secondary, write_secondary, SecondaryClass, SecondaryDetection};
pub use tables::{read_count_table, read_pollen_table, CountRow};
pub use track_log::{read_track_log, write_track_log};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl FormatError {
    pub(crate) fn at(line: u64, message: impl Into<String>) -> Self {
        FormatError::Line {
            line,
            message: message.into(),
        }
    }

    /// Line number of a content error, if this is one.
    pub fn line(&self) -> Option<u64> {
        match self {
            FormatError::Line { line, .. } => Some(*line),
            FormatError::Io(_) => None,
        }
    }
}

impl From<csv::Error> for FormatError {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(e) => FormatError::Io(e),
            kind => FormatError::at(line, csv_message(kind)),
        }
    }
}

fn csv_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::Utf8 { err, .. } => format!("invalid UTF-8: {err}"),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(field) => format!("field {}: {}", field + 1, err.kind()),
            None => err.kind().to_string(),
        },
        other => format!("{other:?}"),
    }
}

pub(crate) fn csv_reader<R: io::Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source)
}

/// Line a csv record started on, for diagnostics.
pub(crate) fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Checks that the header row names exactly `expected`, in order.
pub(crate) fn expect_header<R: io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<bool, FormatError> {
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(false);
    }
    if headers.iter().ne(expected.iter().copied()) {
        return Err(FormatError::at(
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(true)
}

/// Parses field `index` of `record`, naming `name` on failure.
pub(crate) fn field<T>(record: &csv::StringRecord, index: usize, name: &str) -> Result<T, FormatError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    let raw = record.get(index).unwrap_or("");
    raw.parse().map_err(|e| {
        FormatError::at(record_line(record), format!("{name}: cannot parse `{raw}`: {e}"))
    })
}
