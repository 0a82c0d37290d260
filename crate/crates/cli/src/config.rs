//! Run settings: built-in defaults, then an optional TOML file, then flags.
//!
//! ```toml
//! seed = 7
//! out = "runs/today"
//! interval = "5m30s"
//!
//! [geometry]
//! frame_w = 640
//! frame_h = 420
//! arrive_line = 140
//! leave_line = 280
//! match_tolerance = 50
//! container_w_mm = 110
//! container_h_mm = 65
//!
//! [thresholds]
//! pollen = 0.25
//! mite = 0.25
//!
//! [telemetry]
//! url = "http://127.0.0.1:8080"
//! hive = "north"
//! key_file = "north.key"
//!
//! [simulation]
//! n_bees = 30
//! duration_s = 60
//!
//! [service]
//! listen = "127.0.0.1:8080"
//! data_dir = "hivewatch-data"
//! key_file = "hive_keys.json"
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use hivewatch_core::simulator::SimConfig;
use hivewatch_core::{HiveGeometry, Thresholds};
use hivewatch_telemetry::ServiceConfig;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_INTERVAL: Duration = Duration::from_secs(5 * 60 + 30);

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelemetryTarget {
    pub url: Option<String>,
    pub hive: Option<String>,
    /// Text file holding the hive's upload key.
    pub key_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: HiveGeometry,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub interval: Duration,
    pub telemetry: TelemetryTarget,
    pub simulation: SimConfig,
    pub service: ServiceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: HiveGeometry::default(),
            thresholds: Thresholds::default(),
            seed: 0,
            out: None,
            interval: DEFAULT_INTERVAL,
            telemetry: TelemetryTarget::default(),
            simulation: SimConfig::default(),
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    geometry: HiveGeometry,
    thresholds: Thresholds,
    seed: u64,
    out: Option<PathBuf>,
    interval: Option<String>,
    telemetry: TelemetryTarget,
    simulation: SimConfig,
    service: ServiceConfig,
}

impl Default for FileConfig {
    fn default() -> Self {
        let d = RunConfig::default();
        Self {
            geometry: d.geometry,
            thresholds: d.thresholds,
            seed: d.seed,
            out: d.out,
            interval: None,
            telemetry: d.telemetry,
            simulation: d.simulation,
            service: d.service,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let f: FileConfig =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let interval = match f.interval {
            Some(s) => parse_interval(&s)?,
            None => DEFAULT_INTERVAL,
        };
        Ok(Self {
            geometry: f.geometry,
            thresholds: f.thresholds,
            seed: f.seed,
            out: f.out,
            interval,
            telemetry: f.telemetry,
            simulation: f.simulation,
            service: f.service,
        })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.geometry.validate().map_err(CliError::validation)?;
        self.thresholds.validate().map_err(CliError::validation)?;
        Ok(())
    }
}

/// Accepts `5m30s`, `330s`, `1h` and the like.
pub fn parse_interval(s: &str) -> CliResult<Duration> {
    humantime::parse_duration(s.trim()).map_err(|e| CliError::Usage(format!("interval {s:?}: {e}")))
}

/// `WxH` places the trigger lines at one and two thirds of the height;
/// `WxH:A:L` sets them explicitly. Other geometry values keep `base`.
pub fn parse_geometry(s: &str, base: HiveGeometry) -> CliResult<HiveGeometry> {
    let bad = || CliError::Usage(format!("geometry {s:?}: expected WxH or WxH:ARRIVE:LEAVE"));
    let mut parts = s.split(':');
    let size = parts.next().ok_or_else(bad)?;
    let (w, h) = size.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    let h: f64 = h.trim().parse().map_err(|_| bad())?;
    let thirds = HiveGeometry::with_frame(w, h);
    let mut g = HiveGeometry {
        frame_w: w,
        frame_h: h,
        arrive_line: thirds.arrive_line,
        leave_line: thirds.leave_line,
        ..base
    };
    match (parts.next(), parts.next(), parts.next()) {
        (None, None, None) => {}
        (Some(a), Some(l), None) => {
            g.arrive_line = a.trim().parse().map_err(|_| bad())?;
            g.leave_line = l.trim().parse().map_err(|_| bad())?;
        }
        _ => return Err(bad()),
    }
    g.validate().map_err(CliError::validation)?;
    Ok(g)
}
