//! Finalized tracker profiles.
//!
//! ```text
//! id,status,first_frame,last_frame,last_x,last_y,size_mm,snapshots
//! 7,Arriving,12,58,322.5,96,11.2,40:arrive:300:120:340:140:0.91
//! ```
//!
//! `size_mm` is empty when the bee never crossed a trigger line. `snapshots`
//! holds zero or more `frame:crossing:min_x:min_y:max_x:max_y:confidence`
//! entries joined by `;`.

use std::io::{self, Read, Write};

use super::{csv_reader, expect_header, field, record_line, FormatError};
use crate::geometry::{DetectionBox, Midpoint};
use crate::tracker::{SnapshotRef, TrackProfile};

const HEADER: [&str; 8] = [
    "id",
    "status",
    "first_frame",
    "last_frame",
    "last_x",
    "last_y",
    "size_mm",
    "snapshots",
];

pub fn write_track_log<W: Write>(sink: W, profiles: &[TrackProfile]) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for p in profiles {
        let snapshots = p
            .snapshots
            .iter()
            .map(|s| {
                format!(
                    "{}:{}:{}:{}:{}:{}:{}",
                    s.frame_index,
                    s.crossing,
                    s.bbox.min_x,
                    s.bbox.min_y,
                    s.bbox.max_x,
                    s.bbox.max_y,
                    s.bbox.confidence
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        writer.write_record([
            p.id.to_string(),
            p.status.to_string(),
            p.first_frame.to_string(),
            p.last_frame.to_string(),
            p.last_midpoint.x.to_string(),
            p.last_midpoint.y.to_string(),
            p.size_mm.map(|s| s.to_string()).unwrap_or_default(),
            snapshots,
        ])?;
    }
    writer.flush()
}

pub fn read_track_log<R: Read>(source: R) -> Result<Vec<TrackProfile>, FormatError> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &HEADER)? {
        return Ok(Vec::new());
    }
    let mut out: Vec<TrackProfile> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let size_raw = record.get(6).unwrap_or("");
        let size_mm = if size_raw.is_empty() {
            None
        } else {
            Some(field::<f64>(&record, 6, "size_mm")?)
        };
        let snapshots = match record.get(7).unwrap_or("") {
            "" => Vec::new(),
            raw => raw
                .split(';')
                .map(|s| parse_snapshot(s).map_err(|m| FormatError::at(line, format!("snapshots: {m}"))))
                .collect::<Result<_, _>>()?,
        };
        let profile = TrackProfile {
            id: field(&record, 0, "id")?,
            status: field(&record, 1, "status")?,
            first_frame: field(&record, 2, "first_frame")?,
            last_frame: field(&record, 3, "last_frame")?,
            last_midpoint: Midpoint::new(field(&record, 4, "last_x")?, field(&record, 5, "last_y")?),
            size_mm,
            snapshots,
        };
        if profile.last_frame < profile.first_frame {
            return Err(FormatError::at(line, "last_frame precedes first_frame"));
        }
        if out.last().is_some_and(|prev| prev.id >= profile.id) {
            return Err(FormatError::at(line, "profile ids must strictly increase"));
        }
        out.push(profile);
    }
    Ok(out)
}

fn parse_snapshot(entry: &str) -> Result<SnapshotRef, String> {
    let parts: Vec<&str> = entry.split(':').collect();
    let [frame, crossing, rest @ ..] = parts.as_slice() else {
        return Err(format!("malformed entry `{entry}`"));
    };
    if rest.len() != 5 {
        return Err(format!("malformed entry `{entry}`"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("malformed number `{s}`"));
    let bbox = DetectionBox::new(num(rest[0])?, num(rest[1])?, num(rest[2])?, num(rest[3])?, num(rest[4])?)
        .map_err(|e| e.to_string())?;
    Ok(SnapshotRef {
        frame_index: frame.parse().map_err(|_| format!("bad frame index `{frame}`"))?,
        crossing: crossing.parse()?,
        bbox,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Crossing;
    use crate::tracker::TrackStatus;
    use proptest::prelude::*;

    fn profile(id: u64, size: Option<f64>, snaps: usize) -> TrackProfile {
        TrackProfile {
            id,
            last_midpoint: Midpoint::new(100.25 + id as f64, 0.1 * id as f64),
            status: TrackStatus::ALL[id as usize % 4],
            size_mm: size,
            first_frame: id,
            last_frame: id + 30,
            snapshots: (0..snaps)
                .map(|k| SnapshotRef {
                    frame_index: id + k as u64,
                    bbox: DetectionBox::new(1.5, 2.0, 30.0 / 7.0, 40.0, 0.875).unwrap(),
                    crossing: Crossing::ALL[k % 4],
                })
                .collect(),
        }
    }

    #[test]
    fn seven_profiles_round_trip() {
        let profiles: Vec<_> = (1..=7).map(|i| profile(i, Some(11.0 + i as f64 / 3.0), i as usize % 3)).collect();
        let mut out = Vec::new();
        write_track_log(&mut out, &profiles).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert_eq!(read_track_log(&out[..]).unwrap(), profiles);
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut out = Vec::new();
        write_track_log(&mut out, &[]).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), format!("{}\n", HEADER.join(",")));
        assert!(read_track_log(&out[..]).unwrap().is_empty());
    }

    #[test]
    fn missing_size_round_trips() {
        let profiles = vec![profile(3, None, 0)];
        let mut out = Vec::new();
        write_track_log(&mut out, &profiles).unwrap();
        assert!(String::from_utf8(out.clone()).unwrap().contains(",,"));
        assert_eq!(read_track_log(&out[..]).unwrap(), profiles);
    }

    #[test]
    fn rejects_bad_snapshot() {
        let text = format!("{}\n1,New,0,1,2,3,,0:sideways:1:1:2:2:0.5\n", HEADER.join(","));
        let err = read_track_log(text.as_bytes()).unwrap_err();
        assert_eq!(err.line(), Some(2));
    }

    proptest! {
        #[test]
        fn round_trip(sizes in prop::collection::vec((prop::option::of(0.0..40.0f64), 0usize..4), 0..12)) {
            let profiles: Vec<_> = sizes.iter().enumerate()
                .map(|(i, (s, n))| profile(i as u64 + 1, *s, *n)).collect();
            let mut out = Vec::new();
            write_track_log(&mut out, &profiles).unwrap();
            prop_assert_eq!(read_track_log(&out[..]).unwrap(), profiles);
        }

        #[test]
        fn never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
            let _ = read_track_log(&bytes[..]);
        }
    }
}
