//! The per-upload hive measurement record.

use std::fmt;

use hivewatch_core::VideoSummary;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One upload from a hive: environment readings plus the counts of the
/// video processed in that window. `timestamp` is UTC seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiveSample {
    pub timestamp: i64,
    pub temperature_f: f64,
    pub humidity_pct: f64,
    pub cpu_temp_c: f64,
    pub gpu_temp_c: f64,
    pub bees_deck: u64,
    pub bees_leaving: u64,
    pub bees_arriving: u64,
    #[serde(default)]
    pub avg_size_mm: Option<f64>,
    pub pollen_count: u64,
    pub mite_count: u64,
}

/// Names of every field that failed validation, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleError {
    pub fields: Vec<String>,
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid sample fields: {}", self.fields.join(", "))
    }
}

impl std::error::Error for SampleError {}

/// Sensor readings taken alongside a recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub temperature_f: f64,
    pub humidity_pct: f64,
    pub cpu_temp_c: f64,
    pub gpu_temp_c: f64,
}

const FLOAT_FIELDS: [&str; 4] = ["temperature_f", "humidity_pct", "cpu_temp_c", "gpu_temp_c"];
const COUNT_FIELDS: [&str; 5] = [
    "bees_deck",
    "bees_leaving",
    "bees_arriving",
    "pollen_count",
    "mite_count",
];

impl HiveSample {
    pub fn from_summary(timestamp: i64, env: Environment, summary: &VideoSummary) -> Self {
        Self {
            timestamp,
            temperature_f: env.temperature_f,
            humidity_pct: env.humidity_pct,
            cpu_temp_c: env.cpu_temp_c,
            gpu_temp_c: env.gpu_temp_c,
            bees_deck: summary.deck,
            bees_leaving: summary.leaving,
            bees_arriving: summary.arriving,
            avg_size_mm: summary.mean_size_mm,
            pollen_count: summary.pollen_tracks,
            mite_count: summary.mite_tracks,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let mut bad = Vec::new();
        let floats = [
            self.temperature_f,
            self.humidity_pct,
            self.cpu_temp_c,
            self.gpu_temp_c,
        ];
        for (name, v) in FLOAT_FIELDS.iter().zip(floats) {
            if !v.is_finite() || (*name == "humidity_pct" && !(0.0..=100.0).contains(&v)) {
                bad.push(name.to_string());
            }
        }
        if let Some(s) = self.avg_size_mm {
            if !s.is_finite() || s < 0.0 {
                bad.push("avg_size_mm".to_string());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SampleError { fields: bad })
        }
    }

    /// Parses an untrusted JSON payload, collecting every missing,
    /// mistyped, out-of-range or unknown field instead of stopping at the
    /// first one.
    pub fn from_json(value: &Value) -> Result<Self, SampleError> {
        let Some(obj) = value.as_object() else {
            return Err(SampleError {
                fields: vec!["<root>".to_string()],
            });
        };
        let mut bad = Vec::new();

        let timestamp = obj.get("timestamp").and_then(Value::as_i64);
        if timestamp.is_none() {
            bad.push("timestamp".to_string());
        }
        let mut floats = [0.0; 4];
        for (slot, name) in floats.iter_mut().zip(FLOAT_FIELDS) {
            match obj.get(name).and_then(Value::as_f64) {
                Some(v) if v.is_finite() => *slot = v,
                _ => bad.push(name.to_string()),
            }
        }
        let avg_size_mm = match obj.get("avg_size_mm") {
            None | Some(Value::Null) => None,
            Some(v) => {
                let s = v.as_f64();
                if s.is_none() {
                    bad.push("avg_size_mm".to_string());
                }
                s
            }
        };
        let mut counts = [0u64; 5];
        for (slot, name) in counts.iter_mut().zip(COUNT_FIELDS) {
            match obj.get(name).and_then(Value::as_u64) {
                Some(v) => *slot = v,
                None => bad.push(name.to_string()),
            }
        }
        bad.extend(unknown_fields(obj));

        let sample = Self {
            timestamp: timestamp.unwrap_or(0),
            temperature_f: floats[0],
            humidity_pct: floats[1],
            cpu_temp_c: floats[2],
            gpu_temp_c: floats[3],
            bees_deck: counts[0],
            bees_leaving: counts[1],
            bees_arriving: counts[2],
            avg_size_mm,
            pollen_count: counts[3],
            mite_count: counts[4],
        };
        if let Err(e) = sample.validate() {
            for f in e.fields {
                if !bad.contains(&f) {
                    bad.push(f);
                }
            }
        }
        if bad.is_empty() {
            Ok(sample)
        } else {
            bad.sort_by_key(|f| FIELD_ORDER.iter().position(|k| k == f).unwrap_or(usize::MAX));
            Err(SampleError { fields: bad })
        }
    }
}

const FIELD_ORDER: [&str; 11] = [
    "timestamp",
    "temperature_f",
    "humidity_pct",
    "cpu_temp_c",
    "gpu_temp_c",
    "bees_deck",
    "bees_leaving",
    "bees_arriving",
    "avg_size_mm",
    "pollen_count",
    "mite_count",
];

fn unknown_fields(obj: &Map<String, Value>) -> Vec<String> {
    obj.keys()
        .filter(|k| {
            let k = k.as_str();
            k != "timestamp"
                && k != "avg_size_mm"
                && !FLOAT_FIELDS.contains(&k)
                && !COUNT_FIELDS.contains(&k)
        })
        .cloned()
        .collect()
}

/// The ten per-hive measurements a sample carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measurement {
    Temperature,
    Humidity,
    CpuTemp,
    GpuTemp,
    BeesDeck,
    BeesLeaving,
    BeesArriving,
    AvgSize,
    Pollen,
    Mites,
}

impl Measurement {
    pub const ALL: [Measurement; 10] = [
        Measurement::Temperature,
        Measurement::Humidity,
        Measurement::CpuTemp,
        Measurement::GpuTemp,
        Measurement::BeesDeck,
        Measurement::BeesLeaving,
        Measurement::BeesArriving,
        Measurement::AvgSize,
        Measurement::Pollen,
        Measurement::Mites,
    ];

    /// Field name in [`HiveSample`].
    pub fn field(self) -> &'static str {
        match self {
            Measurement::Temperature => "temperature_f",
            Measurement::Humidity => "humidity_pct",
            Measurement::CpuTemp => "cpu_temp_c",
            Measurement::GpuTemp => "gpu_temp_c",
            Measurement::BeesDeck => "bees_deck",
            Measurement::BeesLeaving => "bees_leaving",
            Measurement::BeesArriving => "bees_arriving",
            Measurement::AvgSize => "avg_size_mm",
            Measurement::Pollen => "pollen_count",
            Measurement::Mites => "mite_count",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measurement::Temperature => "Temperature (F)",
            Measurement::Humidity => "Humidity (%)",
            Measurement::CpuTemp => "CPU temperature (C)",
            Measurement::GpuTemp => "GPU temperature (C)",
            Measurement::BeesDeck => "Bees on deck",
            Measurement::BeesLeaving => "Bees leaving",
            Measurement::BeesArriving => "Bees arriving",
            Measurement::AvgSize => "Average bee size (mm)",
            Measurement::Pollen => "Pollen count",
            Measurement::Mites => "Mite count",
        }
    }

    /// `None` only for a sample without a size estimate.
    pub fn value(self, s: &HiveSample) -> Option<f64> {
        Some(match self {
            Measurement::Temperature => s.temperature_f,
            Measurement::Humidity => s.humidity_pct,
            Measurement::CpuTemp => s.cpu_temp_c,
            Measurement::GpuTemp => s.gpu_temp_c,
            Measurement::BeesDeck => s.bees_deck as f64,
            Measurement::BeesLeaving => s.bees_leaving as f64,
            Measurement::BeesArriving => s.bees_arriving as f64,
            Measurement::AvgSize => return s.avg_size_mm,
            Measurement::Pollen => s.pollen_count as f64,
            Measurement::Mites => s.mite_count as f64,
        })
    }
}

#[cfg(test)]
pub(crate) fn sample_at(timestamp: i64) -> HiveSample {
    HiveSample {
        timestamp,
        temperature_f: 71.5,
        humidity_pct: 48.0,
        cpu_temp_c: 44.0,
        gpu_temp_c: 42.5,
        bees_deck: 3,
        bees_leaving: 19,
        bees_arriving: 17,
        avg_size_mm: Some(13.2),
        pollen_count: 4,
        mite_count: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_round_trip() {
        let s = sample_at(1_700_000_000);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(HiveSample::from_json(&v).unwrap(), s);
    }

    #[test]
    fn humidity_out_of_range_is_named() {
        let mut v = serde_json::to_value(sample_at(0)).unwrap();
        v["humidity_pct"] = json!(140.0);
        let err = HiveSample::from_json(&v).unwrap_err();
        assert_eq!(err.fields, vec!["humidity_pct"]);
    }

    #[test]
    fn all_bad_fields_are_listed() {
        let v = json!({
            "timestamp": "noon",
            "temperature_f": 70.0,
            "humidity_pct": -1.0,
            "cpu_temp_c": 40.0,
            "gpu_temp_c": 40.0,
            "bees_deck": -2,
            "bees_leaving": 1,
            "bees_arriving": 1,
            "pollen_count": 0,
            "mite_count": 0,
            "colour": "gold"
        });
        let err = HiveSample::from_json(&v).unwrap_err();
        assert_eq!(
            err.fields,
            vec!["timestamp", "humidity_pct", "bees_deck", "colour"]
        );
    }

    #[test]
    fn missing_size_is_allowed() {
        let mut v = serde_json::to_value(sample_at(5)).unwrap();
        v.as_object_mut().unwrap().remove("avg_size_mm");
        assert_eq!(HiveSample::from_json(&v).unwrap().avg_size_mm, None);
    }

    #[test]
    fn non_object_payload() {
        assert!(HiveSample::from_json(&json!([1, 2])).is_err());
    }

    #[test]
    fn from_summary_maps_counts() {
        let summary = VideoSummary {
            arriving: 17,
            leaving: 19,
            deck: 2,
            new: 5,
            pollen_tracks: 3,
            mite_tracks: 1,
            mean_size_mm: Some(12.5),
            total_tracks: 43,
        };
        let env = Environment {
            temperature_f: 80.0,
            humidity_pct: 55.0,
            cpu_temp_c: 50.0,
            gpu_temp_c: 49.0,
        };
        let s = HiveSample::from_summary(60, env, &summary);
        assert_eq!((s.bees_arriving, s.bees_leaving, s.bees_deck), (17, 19, 2));
        assert_eq!((s.pollen_count, s.mite_count), (3, 1));
        assert_eq!(s.avg_size_mm, Some(12.5));
        s.validate().unwrap();
    }

    #[test]
    fn ten_measurements_with_distinct_fields() {
        let fields: std::collections::HashSet<_> =
            Measurement::ALL.iter().map(|m| m.field()).collect();
        assert_eq!(fields.len(), 10);
        let v = serde_json::to_value(sample_at(0)).unwrap();
        for m in Measurement::ALL {
            assert!(v.get(m.field()).is_some(), "{}", m.field());
        }
    }
}
