//! Service settings from a TOML file with environment overrides.
//!
//! ```toml
//! listen = "0.0.0.0:8080"
//! data_dir = "/var/lib/hivewatch"
//! key_file = "/etc/hivewatch/keys.json"
//! ```
//!
//! `HIVEWATCH_LISTEN`, `HIVEWATCH_DATA_DIR` and `HIVEWATCH_KEY_FILE`
//! replace the corresponding file values.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::TelemetryError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub key_file: PathBuf,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("hivewatch-data"),
            key_file: PathBuf::from("hive_keys.json"),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, TelemetryError> {
        toml::from_str(text).map_err(|e| TelemetryError::Config(e.to_string()))
    }

    /// Reads `path` if given, then applies the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, TelemetryError> {
        let base = match path {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        base.with_env(|k| std::env::var(k).ok())
    }

    pub fn with_env(
        mut self,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, TelemetryError> {
        if let Some(v) = lookup("HIVEWATCH_LISTEN") {
            self.listen = v
                .parse()
                .map_err(|_| TelemetryError::Config(format!("HIVEWATCH_LISTEN: bad address {v:?}")))?;
        }
        if let Some(v) = lookup("HIVEWATCH_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = lookup("HIVEWATCH_KEY_FILE") {
            self.key_file = v.into();
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let c = ServiceConfig::from_toml("listen = \"0.0.0.0:9000\"\ndata_dir = \"/d\"").unwrap();
        assert_eq!(c.listen.port(), 9000);
        assert_eq!(c.key_file, PathBuf::from("hive_keys.json"));
        let c = c
            .with_env(|k| (k == "HIVEWATCH_DATA_DIR").then(|| "/override".to_string()))
            .unwrap();
        assert_eq!(c.data_dir, PathBuf::from("/override"));
        assert_eq!(c.listen.port(), 9000);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_addresses() {
        assert!(ServiceConfig::from_toml("lisen = \"x\"").is_err());
        assert!(ServiceConfig::default()
            .with_env(|k| (k == "HIVEWATCH_LISTEN").then(|| "nowhere".to_string()))
            .is_err());
    }
}
