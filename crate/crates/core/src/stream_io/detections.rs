//! Detection streams: one line per frame.
//!
//! ```text
//! <frame_index> [<min_x>,<min_y>,<max_x>,<max_y>,<confidence> ...]
//! ```
//!
//! Tokens are separated by spaces or tabs. Blank lines and lines starting with
//! `#` are skipped. Frame indices must strictly increase.

use std::io::{self, BufRead, Write};

use super::FormatError;
use crate::geometry::DetectionBox;
use crate::tracker::FrameDetections;

/// Streaming reader yielding one [`FrameDetections`] per record line.
///
/// The first error ends the iteration.
pub struct DetectionStreamReader<R> {
    source: R,
    buf: Vec<u8>,
    line: u64,
    last_frame: Option<u64>,
    failed: bool,
}

impl<R: BufRead> DetectionStreamReader<R> {
    pub fn new(source: R) -> Self {
        Self {
            source,
            buf: Vec::new(),
            line: 0,
            last_frame: None,
            failed: false,
        }
    }

    fn next_frame(&mut self) -> Result<Option<FrameDetections>, FormatError> {
        loop {
            self.buf.clear();
            if self.source.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let text = std::str::from_utf8(&self.buf)
                .map_err(|e| FormatError::at(self.line, format!("invalid UTF-8: {e}")))?;
            let text = text.trim_end_matches(['\n', '\r']);
            let trimmed = text.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let frame = parse_record(trimmed, self.line)?;
            if let Some(last) = self.last_frame {
                if frame.frame_index <= last {
                    return Err(FormatError::at(
                        self.line,
                        format!("frame index {} does not follow {last}", frame.frame_index),
                    ));
                }
            }
            self.last_frame = Some(frame.frame_index);
            return Ok(Some(frame));
        }
    }
}

impl<R: BufRead> Iterator for DetectionStreamReader<R> {
    type Item = Result<FrameDetections, FormatError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_frame() {
            Ok(Some(frame)) => Some(Ok(frame)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn parse_record(text: &str, line: u64) -> Result<FrameDetections, FormatError> {
    let mut tokens = text.split_ascii_whitespace();
    let head = tokens.next().unwrap_or_default();
    let frame_index: u64 = head
        .parse()
        .map_err(|_| FormatError::at(line, format!("bad frame index `{head}`")))?;
    let boxes = tokens
        .enumerate()
        .map(|(i, tok)| parse_box(tok).map_err(|msg| FormatError::at(line, format!("box {}: {msg}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrameDetections { frame_index, boxes })
}

fn parse_box(token: &str) -> Result<DetectionBox, String> {
    let mut values = [0.0f64; 5];
    let mut parts = token.split(',');
    for slot in values.iter_mut() {
        let part = parts
            .next()
            .ok_or_else(|| format!("`{token}` needs 5 comma-separated numbers"))?;
        *slot = part
            .parse()
            .map_err(|_| format!("malformed number `{part}`"))?;
    }
    if parts.next().is_some() {
        return Err(format!("`{token}` has more than 5 numbers"));
    }
    let [min_x, min_y, max_x, max_y, confidence] = values;
    DetectionBox::new(min_x, min_y, max_x, max_y, confidence).map_err(|e| e.to_string())
}

/// Reads a whole stream into memory.
pub fn read_detection_stream<R: BufRead>(source: R) -> Result<Vec<FrameDetections>, FormatError> {
    DetectionStreamReader::new(source).collect()
}

pub fn write_frame<W: Write>(sink: &mut W, frame: &FrameDetections) -> io::Result<()> {
    write!(sink, "{}", frame.frame_index)?;
    for b in &frame.boxes {
        write!(sink, " {},{},{},{},{}", b.min_x, b.min_y, b.max_x, b.max_y, b.confidence)?;
    }
    writeln!(sink)
}

pub fn write_detection_stream<'a, W, I>(sink: &mut W, frames: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a FrameDetections>,
{
    for frame in frames {
        write_frame(sink, frame)?;
    }
    sink.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_lines() {
        let text = "0 10,20,30,40,0.9 50,60,70,80,0.5\n1\n";
        let frames = read_detection_stream(text.as_bytes()).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].boxes.len(), 2);
        assert_eq!(frames[0].boxes[1].max_y, 80.0);
        assert!(frames[1].boxes.is_empty());
    }

    #[test]
    fn empty_input() {
        assert!(read_detection_stream(&b""[..]).unwrap().is_empty());
        assert!(read_detection_stream(&b"# only a comment\n\n"[..]).unwrap().is_empty());
    }

    #[test]
    fn inverted_box_names_line() {
        let text = "0 10,20,30,40,0.9\n1 50,60,40,80,0.5\n";
        let err = read_detection_stream(text.as_bytes()).unwrap_err();
        assert_eq!(err.line(), Some(2));
        assert!(err.to_string().contains("inverted"), "{err}");
    }

    #[test]
    fn rejects_non_monotone_frames() {
        let err = read_detection_stream(&b"3\n3\n"[..]).unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = read_detection_stream(&b"3\n# gap\n2\n"[..]).unwrap_err();
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn malformed_numbers() {
        for bad in ["x 1,1,2,2,0.5", "0 1,1,2,2", "0 1,1,2,2,0.5,7", "0 1,a,2,2,0.5", "-1", "0 1,1,2,2,inf"] {
            let err = read_detection_stream(bad.as_bytes()).unwrap_err();
            assert_eq!(err.line(), Some(1), "{bad}");
        }
    }

    #[test]
    fn iterator_stops_after_error() {
        let mut reader = DetectionStreamReader::new(&b"0\nbogus\n2\n"[..]);
        assert!(reader.next().unwrap().is_ok());
        assert!(reader.next().unwrap().is_err());
        assert!(reader.next().is_none());
    }

    #[test]
    fn tolerates_crlf_and_tabs() {
        let frames = read_detection_stream(&b"0\t1,1,2,2,0.5\r\n1\r\n"[..]).unwrap();
        assert_eq!(frames.len(), 2);
    }

    fn arb_frames() -> impl Strategy<Value = Vec<FrameDetections>> {
        let b = (0.0..600.0f64, 0.0..400.0f64, 0.0..60.0f64, 0.0..60.0f64, 0.0..=1.0f64).prop_map(
            |(x, y, w, h, c)| DetectionBox::new(x, y, x + w, y + h, c).unwrap(),
        );
        prop::collection::vec((1u64..5, prop::collection::vec(b, 0..6)), 0..20).prop_map(|rows| {
            let mut idx = 0;
            rows.into_iter()
                .map(|(gap, boxes)| {
                    idx += gap;
                    FrameDetections::new(idx, boxes)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn round_trip(frames in arb_frames()) {
            let mut out = Vec::new();
            write_detection_stream(&mut out, &frames).unwrap();
            prop_assert_eq!(read_detection_stream(&out[..]).unwrap(), frames);
        }

        #[test]
        fn never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
            let _ = read_detection_stream(&bytes[..]);
        }
    }
}
