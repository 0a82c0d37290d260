//! Hourly thinning of a 5-minute series for history queries.

use time::{Date, Month};

use crate::sample::HiveSample;

const HOUR: i64 = 3600;

/// Keeps the earliest sample of every UTC hour. Input must be ordered by
/// timestamp; hours with no samples simply do not appear.
pub fn downsample_hourly(series: &[HiveSample]) -> Vec<HiveSample> {
    let mut out: Vec<HiveSample> = Vec::new();
    let mut last_bucket = None;
    for s in series {
        let bucket = s.timestamp.div_euclid(HOUR);
        if last_bucket != Some(bucket) {
            out.push(s.clone());
            last_bucket = Some(bucket);
        }
    }
    out
}

/// `[start, end)` in UTC seconds for a calendar year, or `None` when the
/// year is outside what `time` can represent.
pub fn year_bounds(year: i32) -> Option<(i64, i64)> {
    let start = Date::from_calendar_date(year, Month::January, 1).ok()?;
    let end = Date::from_calendar_date(year.checked_add(1)?, Month::January, 1).ok()?;
    Some((
        start.midnight().assume_utc().unix_timestamp(),
        end.midnight().assume_utc().unix_timestamp(),
    ))
}
