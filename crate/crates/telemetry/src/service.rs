//! Upload and query operations with authorization applied, independent of
//! the HTTP transport.

use serde_json::Value;

use crate::auth::Registry;
use crate::network::NetworkInfo;
use crate::sample::HiveSample;
use crate::store::HiveStore;
use crate::TelemetryError;

pub struct Telemetry {
    registry: Registry,
    store: HiveStore,
}

impl Telemetry {
    pub fn new(registry: Registry, store: HiveStore) -> Self {
        Self { registry, store }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn store(&self) -> &HiveStore {
        &self.store
    }

    /// Stores one sample, or every sample of a JSON array as one batch.
    /// Returns the assigned sequence numbers. The key is checked before the
    /// payload is looked at.
    pub fn upload_data(
        &self,
        hive: &str,
        token: Option<&str>,
        payload: &Value,
    ) -> Result<Vec<u64>, TelemetryError> {
        self.registry.authorize(hive, token)?;
        let samples = match payload {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                let mut bad = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    match HiveSample::from_json(item) {
                        Ok(s) => out.push(s),
                        Err(e) => bad.extend(e.fields.into_iter().map(|f| format!("[{i}].{f}"))),
                    }
                }
                if !bad.is_empty() {
                    return Err(TelemetryError::Validation(bad));
                }
                out
            }
            other => vec![HiveSample::from_json(other)
                .map_err(|e| TelemetryError::Validation(e.fields))?],
        };
        self.store.append_batch(hive, &samples)
    }

    pub fn upload_network(
        &self,
        hive: &str,
        token: Option<&str>,
        payload: &Value,
    ) -> Result<NetworkInfo, TelemetryError> {
        self.registry.authorize(hive, token)?;
        let info = NetworkInfo::from_json(payload)?;
        let value = serde_json::to_value(&info).expect("network info serializes");
        self.store.put_network(hive, &value)?;
        Ok(info)
    }

    /// Video uploads are acknowledged and dropped.
    pub fn upload_video(
        &self,
        hive: &str,
        token: Option<&str>,
        len: usize,
    ) -> Result<usize, TelemetryError> {
        self.registry.authorize(hive, token)?;
        tracing::debug!(hive, len, "video upload discarded");
        Ok(len)
    }

    pub fn latest(&self, hive: &str) -> Result<Option<HiveSample>, TelemetryError> {
        self.registered(hive)?;
        self.store.latest(hive)
    }

    pub fn history(&self, hive: &str, year: i32) -> Result<Vec<HiveSample>, TelemetryError> {
        self.registered(hive)?;
        self.store.history(hive, year)
    }

    pub fn network(&self, hive: &str, token: Option<&str>) -> Result<Option<Value>, TelemetryError> {
        self.registry.authorize_read(hive, token)?;
        self.store.get_network(hive)
    }

    fn registered(&self, hive: &str) -> Result<(), TelemetryError> {
        self.registry
            .hive(hive)
            .map(|_| ())
            .ok_or_else(|| TelemetryError::UnknownHive(hive.to_string()))
    }
}
