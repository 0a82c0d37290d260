//! Durable per-hive sample logs.
//!
//! Layout under the data directory:
//!
//! ```text
//! samples/<hive>.jsonl   one HiveSample JSON object per line, append-only
//! network/<hive>.json    latest network report, replaced atomically
//! ```
//!
//! Every log is read fully when the store opens; the in-memory copy serves
//! queries and the file is only ever appended to.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use serde_json::Value;

use crate::auth::valid_hive_id;
use crate::downsample::{downsample_hourly, year_bounds};
use crate::sample::HiveSample;
use crate::TelemetryError;

struct HiveLog {
    file: File,
    len: u64,
    samples: Vec<HiveSample>,
}

pub struct HiveStore {
    dir: PathBuf,
    logs: RwLock<HashMap<String, Arc<Mutex<HiveLog>>>>,
    // Serializes network-report replacement per store; reports are rare.
    network: Mutex<()>,
}

impl HiveStore {
    /// Opens (creating if needed) a store rooted at `dir` and replays every
    /// hive log. A trailing partial line left by an interrupted write is
    /// cut off; any other unreadable line is an error.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, TelemetryError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("samples"))?;
        fs::create_dir_all(dir.join("network"))?;
        let mut logs = HashMap::new();
        for entry in fs::read_dir(dir.join("samples"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(hive) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            if !valid_hive_id(hive) {
                continue;
            }
            let log = replay(&path)?;
            logs.insert(hive.to_string(), Arc::new(Mutex::new(log)));
        }
        Ok(Self {
            dir,
            logs: RwLock::new(logs),
            network: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends one sample and returns its 1-based sequence number once the
    /// bytes are on disk.
    pub fn append(&self, hive: &str, sample: &HiveSample) -> Result<u64, TelemetryError> {
        let seqs = self.append_batch(hive, std::slice::from_ref(sample))?;
        Ok(seqs[0])
    }

    /// Appends several samples with a single sync. Either all are stored or
    /// none are.
    pub fn append_batch(
        &self,
        hive: &str,
        samples: &[HiveSample],
    ) -> Result<Vec<u64>, TelemetryError> {
        check_hive(hive)?;
        for s in samples {
            s.validate().map_err(|e| TelemetryError::Validation(e.fields))?;
        }
        if samples.is_empty() {
            return Ok(Vec::new());
        }
        let handle = self.log(hive, true)?.expect("created on demand");
        let mut log = lock(&handle);

        let mut last = log.samples.last().map(|s| s.timestamp);
        for s in samples {
            if let Some(l) = last {
                if s.timestamp <= l {
                    return Err(TelemetryError::Ordering {
                        last: l,
                        got: s.timestamp,
                    });
                }
            }
            last = Some(s.timestamp);
        }

        let mut buf = Vec::new();
        for s in samples {
            serde_json::to_writer(&mut buf, s).expect("samples always serialize");
            buf.push(b'\n');
        }
        let prev_len = log.len;
        let written = log.file.write_all(&buf).and_then(|_| log.file.sync_data());
        if let Err(e) = written {
            // Leave no half-written line behind for the next replay.
            let _ = log.file.set_len(prev_len);
            return Err(e.into());
        }
        log.len += buf.len() as u64;
        let first = log.samples.len() as u64 + 1;
        log.samples.extend_from_slice(samples);
        Ok((first..first + samples.len() as u64).collect())
    }

    pub fn latest(&self, hive: &str) -> Result<Option<HiveSample>, TelemetryError> {
        Ok(self.with_samples(hive, |s| s.last().cloned())?.flatten())
    }

    pub fn count(&self, hive: &str) -> Result<usize, TelemetryError> {
        Ok(self.with_samples(hive, |s| s.len())?.unwrap_or(0))
    }

    /// Every stored sample, oldest first.
    pub fn series(&self, hive: &str) -> Result<Vec<HiveSample>, TelemetryError> {
        Ok(self.with_samples(hive, |s| s.to_vec())?.unwrap_or_default())
    }

    /// Samples from the given UTC calendar year, one per hour.
    pub fn history(&self, hive: &str, year: i32) -> Result<Vec<HiveSample>, TelemetryError> {
        let (start, end) = year_bounds(year)
            .ok_or_else(|| TelemetryError::Validation(vec!["year".to_string()]))?;
        let in_year = self
            .with_samples(hive, |s| {
                let lo = s.partition_point(|x| x.timestamp < start);
                let hi = s.partition_point(|x| x.timestamp < end);
                downsample_hourly(&s[lo..hi])
            })?
            .unwrap_or_default();
        Ok(in_year)
    }

    /// Hives that have at least one stored sample, sorted.
    pub fn hives(&self) -> Vec<String> {
        let logs = self.logs.read().unwrap_or_else(|e| e.into_inner());
        let mut ids: Vec<_> = logs.keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Replaces the stored network report for a hive.
    pub fn put_network(&self, hive: &str, info: &Value) -> Result<(), TelemetryError> {
        check_hive(hive)?;
        let _guard = lock(&self.network);
        let dir = self.dir.join("network");
        let tmp = dir.join(format!("{hive}.json.tmp"));
        let dst = dir.join(format!("{hive}.json"));
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer(&mut f, info).map_err(std::io::Error::from)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &dst)?;
        sync_dir(&dir);
        Ok(())
    }

    pub fn get_network(&self, hive: &str) -> Result<Option<Value>, TelemetryError> {
        check_hive(hive)?;
        let path = self.dir.join("network").join(format!("{hive}.json"));
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| TelemetryError::Corrupt {
                    path,
                    line: 1,
                    message: e.to_string(),
                }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn log(&self, hive: &str, create: bool) -> Result<Option<Arc<Mutex<HiveLog>>>, TelemetryError> {
        if let Some(h) = self.logs.read().unwrap_or_else(|e| e.into_inner()).get(hive) {
            return Ok(Some(Arc::clone(h)));
        }
        if !create {
            return Ok(None);
        }
        let mut logs = self.logs.write().unwrap_or_else(|e| e.into_inner());
        if let Some(h) = logs.get(hive) {
            return Ok(Some(Arc::clone(h)));
        }
        let path = self.dir.join("samples").join(format!("{hive}.jsonl"));
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        sync_dir(&self.dir.join("samples"));
        let h = Arc::new(Mutex::new(HiveLog {
            file,
            len: 0,
            samples: Vec::new(),
        }));
        logs.insert(hive.to_string(), Arc::clone(&h));
        Ok(Some(h))
    }

    fn with_samples<T>(
        &self,
        hive: &str,
        f: impl FnOnce(&[HiveSample]) -> T,
    ) -> Result<Option<T>, TelemetryError> {
        check_hive(hive)?;
        Ok(self.log(hive, false)?.map(|h| f(&lock(&h).samples)))
    }
}

fn check_hive(hive: &str) -> Result<(), TelemetryError> {
    if valid_hive_id(hive) {
        Ok(())
    } else {
        Err(TelemetryError::UnknownHive(hive.to_string()))
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn sync_dir(dir: &Path) {
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
}

fn replay(path: &Path) -> Result<HiveLog, TelemetryError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;

    let mut samples: Vec<HiveSample> = Vec::new();
    let mut good = 0usize;
    let mut line_no = 0usize;
    while let Some(nl) = bytes[good..].iter().position(|&b| b == b'\n') {
        line_no += 1;
        let line = &bytes[good..good + nl];
        let corrupt = |message: String| TelemetryError::Corrupt {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let sample: HiveSample =
            serde_json::from_slice(line).map_err(|e| corrupt(e.to_string()))?;
        sample
            .validate()
            .map_err(|e| corrupt(e.to_string()))?;
        if let Some(prev) = samples.last() {
            if sample.timestamp <= prev.timestamp {
                return Err(corrupt(format!(
                    "timestamp {} not after {}",
                    sample.timestamp, prev.timestamp
                )));
            }
        }
        samples.push(sample);
        good += nl + 1;
    }

    let file = OpenOptions::new().append(true).open(path)?;
    if good < bytes.len() {
        tracing::warn!(
            path = %path.display(),
            dropped = bytes.len() - good,
            "discarding incomplete trailing record"
        );
        file.set_len(good as u64)?;
        file.sync_data()?;
    }
    Ok(HiveLog {
        file,
        len: good as u64,
        samples,
    })
}
